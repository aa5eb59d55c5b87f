"""Finite Kripke models with exact rational evaluation.

Two model classes: plain ``StandardModel`` where box/diamond take the
infimum/supremum over successors, and ``FModel`` where each world carries a
finite set of admissible modal truth values and box rounds down into it
while diamond rounds up.  All arithmetic is over ``fractions.Fraction``;
verdicts downstream depend on exact comparisons.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import IO, Iterable, Union

from . import formula as fm
from .errors import ModelValidationError, SchemaError, UnknownWorldError

ZERO = Fraction(0)
ONE = Fraction(1)
HALF = Fraction(1, 2)


def godel_imp(a: Fraction, b: Fraction) -> Fraction:
    return ONE if a <= b else b


def godel_coimp(a: Fraction, b: Fraction) -> Fraction:
    return ZERO if a <= b else a


def parse_rational(text: str) -> Fraction:
    """Parse "p/q" or an integer string into an exact rational."""
    return Fraction(text)


def rational_str(q: Fraction) -> str:
    """Canonical string form, e.g. 1/2, 0, 1."""
    return str(q)


@dataclass
class StandardModel:
    """Finite model: worlds, fuzzy accessibility, rational valuation.

    Absent accessibility or valuation entries default to 0 (sparse
    representation).  Treat instances as immutable once built.
    """

    worlds: tuple[str, ...]
    access: dict[tuple[str, str], Fraction] = field(default_factory=dict)
    val: dict[tuple[str, str], Fraction] = field(default_factory=dict)
    crisp: bool = False

    def acc(self, w: str, u: str) -> Fraction:
        return self.access.get((w, u), ZERO)

    def atom_value(self, name: str, w: str) -> Fraction:
        return self.val.get((name, w), ZERO)

    def require_world(self, w: str):
        if w not in self.worlds:
            raise UnknownWorldError(f"unknown world {w!r}")

    def range_violations(self) -> list[str]:
        out = []
        if not self.worlds:
            out.append("model has no worlds")
        if len(set(self.worlds)) != len(self.worlds):
            out.append("duplicate world names")
        for (w, u), q in self.access.items():
            if not (ZERO <= q <= ONE):
                out.append(f"R({w},{u}) = {q} out of [0,1]")
            if self.crisp and q not in (ZERO, ONE):
                out.append(f"R({w},{u}) = {q} not crisp")
        for (p, w), q in self.val.items():
            if not (ZERO <= q <= ONE):
                out.append(f"val({p},{w}) = {q} out of [0,1]")
        return out


@dataclass
class FModel(StandardModel):
    """Standard model plus a finite admissible-value set per world."""

    tvals: dict[str, frozenset[Fraction]] = field(default_factory=dict)

    def tset(self, w: str) -> frozenset[Fraction]:
        return self.tvals.get(w, frozenset((ZERO, HALF, ONE)))


def validate_f(m: FModel) -> list[str]:
    """Legality violations of the admissible-value sets.

    Empty iff every world's set contains {0, 1/2, 1} and is closed under
    x -> 1-x (and lies inside [0,1]).
    """
    out = list(m.range_violations())
    for w in m.worlds:
        ts = m.tset(w)
        for anchor in (ZERO, HALF, ONE):
            if anchor not in ts:
                out.append(f"{anchor} not in T({w})")
        for x in sorted(ts):
            if not (ZERO <= x <= ONE):
                out.append(f"T({w}) value {x} out of [0,1]")
            elif ONE - x not in ts:
                out.append(f"{ONE - x} not in T({w}) (complement of {x})")
    return out


def _eval(m: StandardModel, w: str, f: fm.Formula, modal, cache) -> Fraction:
    key = (f, w)
    hit = cache.get(key)
    if hit is not None:
        return hit

    def rec(g, u):
        return _eval(m, u, g, modal, cache)

    if isinstance(f, fm.Atom):
        v = m.atom_value(f.name, w)
    elif isinstance(f, fm.Inv):
        v = ONE - rec(f.sub, w)
    elif isinstance(f, fm.And):
        v = min(rec(f.left, w), rec(f.right, w))
    elif isinstance(f, fm.Imp):
        v = godel_imp(rec(f.left, w), rec(f.right, w))
    elif isinstance(f, fm.Or):
        v = max(rec(f.left, w), rec(f.right, w))
    elif isinstance(f, fm.Coimp):
        v = godel_coimp(rec(f.left, w), rec(f.right, w))
    elif isinstance(f, fm.Iff):
        a, b = rec(f.left, w), rec(f.right, w)
        v = ONE if a == b else min(a, b)
    elif isinstance(f, fm.Neg):
        v = ONE if rec(f.sub, w) == ZERO else ZERO
    elif isinstance(f, fm.Delta):
        v = ONE if rec(f.sub, w) == ONE else ZERO
    elif isinstance(f, fm.Top):
        v = ONE
    elif isinstance(f, fm.Bottom):
        v = ZERO
    elif isinstance(f, fm.Box):
        bound = min(godel_imp(m.acc(w, u), rec(f.sub, u)) for u in m.worlds)
        v = modal(m, w, "box", bound)
    elif isinstance(f, fm.Dia):
        bound = max(min(m.acc(w, u), rec(f.sub, u)) for u in m.worlds)
        v = modal(m, w, "dia", bound)
    else:
        raise TypeError(f"not a formula: {f!r}")
    cache[key] = v
    return v


def _modal_standard(m, w, kind, bound):
    return bound


def _modal_f(m: FModel, w, kind, bound):
    ts = m.tset(w)
    if kind == "box":
        cands = [x for x in ts if x <= bound]
        if not cands:
            raise ModelValidationError([f"T({w}) has no value <= {bound} for box"])
        return max(cands)
    cands = [x for x in ts if x >= bound]
    if not cands:
        raise ModelValidationError([f"T({w}) has no value >= {bound} for diamond"])
    return min(cands)


def eval_standard(m: StandardModel, w: str, f: fm.Formula) -> Fraction:
    """Value of ``f`` at ``w``: box = inf of residua, diamond = sup of minima.

    Over the empty accessible set box is 1 and diamond is 0.
    """
    m.require_world(w)
    return _eval(m, w, f, _modal_standard, {})


def eval_f(m: FModel, w: str, f: fm.Formula, override: bool = False) -> Fraction:
    """Value of ``f`` at ``w`` with modal values rounded into T(w).

    Rejects illegal models unless ``override`` is set (the override exists
    only to reproduce deliberately broken textbook examples).
    """
    m.require_world(w)
    if not override:
        violations = validate_f(m)
        if violations:
            raise ModelValidationError(violations)
    return _eval(m, w, f, _modal_f, {})


def lift_standard(m: StandardModel, f: fm.Formula) -> FModel:
    """Extend a standard model with admissible-value sets tailored to ``f``.

    T(w) collects the standard values at w of every boxed/diamonded
    subformula of ``f``, closed under 1-x and united with {0, 1/2, 1}; the
    F-evaluation of ``f`` (and of its subformulas) then agrees with the
    standard one at every world.
    """
    modal_subs = [g for g in fm.subformulas(f) if isinstance(g, (fm.Box, fm.Dia))]
    tvals = {}
    for w in m.worlds:
        vals = {ZERO, HALF, ONE}
        for g in modal_subs:
            q = eval_standard(m, w, g)
            vals.add(q)
            vals.add(ONE - q)
        tvals[w] = frozenset(vals)
    return FModel(
        worlds=m.worlds,
        access=dict(m.access),
        val=dict(m.val),
        crisp=m.crisp,
        tvals=tvals,
    )


# --- JSON serialisation -------------------------------------------------------
#
# { "worlds": [str], "R": [[src, dst, "p/q"]], "T": {world: ["p/q", ...]},
#   "val": {atom: {world: "p/q"}}, "crisp": bool? }
#
# "T" is optional as a whole (its absence means a standard model) but must
# cover every world when present.  Rationals are canonicalised on save.


def _schema_rational(raw, path: str) -> Fraction:
    if not isinstance(raw, str):
        raise SchemaError(f"expected a rational string, got {raw!r}", path)
    try:
        q = parse_rational(raw)
    except (ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"bad rational {raw!r}: {exc}", path) from None
    if not (ZERO <= q <= ONE):
        raise SchemaError(f"{raw} out of [0,1]", path)
    return q


def model_from_dict(data) -> Union[StandardModel, FModel]:
    if not isinstance(data, dict):
        raise SchemaError("expected an object", "$")
    worlds_raw = data.get("worlds")
    if not isinstance(worlds_raw, list) or not worlds_raw:
        raise SchemaError("expected a nonempty list", "worlds")
    for i, w in enumerate(worlds_raw):
        if not isinstance(w, str) or not w:
            raise SchemaError(f"bad world name {w!r}", f"worlds[{i}]")
    worlds = tuple(worlds_raw)
    if len(set(worlds)) != len(worlds):
        raise SchemaError("duplicate world names", "worlds")

    access = {}
    for i, entry in enumerate(data.get("R", [])):
        path = f"R[{i}]"
        if not (isinstance(entry, list) and len(entry) == 3):
            raise SchemaError("expected [src, dst, rational]", path)
        src, dst, raw = entry
        if src not in worlds:
            raise SchemaError(f"unknown world {src!r}", path)
        if dst not in worlds:
            raise SchemaError(f"unknown world {dst!r}", path)
        access[(src, dst)] = _schema_rational(raw, path)

    val = {}
    val_raw = data.get("val", {})
    if not isinstance(val_raw, dict):
        raise SchemaError("expected an object", "val")
    for atom, per_world in val_raw.items():
        if not fm.ATOM_RE.fullmatch(atom):
            raise SchemaError(f"bad atom name {atom!r}", "val")
        if not isinstance(per_world, dict):
            raise SchemaError("expected an object", f"val[{atom!r}]")
        for w, raw in per_world.items():
            path = f"val[{atom!r}][{w!r}]"
            if w not in worlds:
                raise SchemaError(f"unknown world {w!r}", path)
            val[(atom, w)] = _schema_rational(raw, path)

    crisp = data.get("crisp", False)
    if not isinstance(crisp, bool):
        raise SchemaError("expected a boolean", "crisp")

    if "T" not in data:
        m = StandardModel(worlds=worlds, access=access, val=val, crisp=crisp)
    else:
        t_raw = data["T"]
        if not isinstance(t_raw, dict):
            raise SchemaError("expected an object", "T")
        tvals = {}
        for w in worlds:
            if w not in t_raw:
                raise SchemaError(f"missing entry for world {w!r}", "T")
            entries = t_raw[w]
            if not isinstance(entries, list):
                raise SchemaError("expected a list", f"T[{w!r}]")
            tvals[w] = frozenset(
                _schema_rational(raw, f"T[{w!r}][{i}]") for i, raw in enumerate(entries)
            )
        for w in t_raw:
            if w not in worlds:
                raise SchemaError(f"unknown world {w!r}", "T")
        m = FModel(worlds=worlds, access=access, val=val, crisp=crisp, tvals=tvals)

    problems = m.range_violations()
    if problems:
        raise SchemaError("; ".join(problems), "$")
    return m


def model_to_dict(m: StandardModel) -> dict:
    data = {
        "worlds": list(m.worlds),
        "R": [
            [src, dst, rational_str(q)]
            for (src, dst), q in sorted(m.access.items())
            if q != ZERO
        ],
        "val": {},
    }
    atoms = sorted({p for (p, _w) in m.val})
    for p in atoms:
        per_world = {
            w: rational_str(q) for (a, w), q in sorted(m.val.items()) if a == p
        }
        data["val"][p] = per_world
    if isinstance(m, FModel):
        data["T"] = {w: [rational_str(x) for x in sorted(m.tset(w))] for w in m.worlds}
    if m.crisp:
        data["crisp"] = True
    return data


def load_model(source: Union[str, IO]) -> Union[StandardModel, FModel]:
    """Load a model from a path or an open text stream."""
    if isinstance(source, str):
        with open(source, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    else:
        data = json.load(source)
    return model_from_dict(data)


def save_model(m: StandardModel, target: Union[str, IO]):
    """Write a model as canonical JSON to a path or an open text stream."""
    data = model_to_dict(m)
    if isinstance(target, str):
        with open(target, "w", encoding="utf-8") as fh:
            json.dump(data, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        json.dump(data, target, indent=2, sort_keys=True)
        target.write("\n")


def model_to_dot(m: StandardModel, atoms: Iterable[str] | None = None) -> str:
    """GraphViz rendering: worlds as nodes (with T(w) and atom values when
    present), positive accessibility entries as labelled edges."""
    if atoms is None:
        atoms = sorted({p for (p, _w) in m.val})
    lines = ["digraph countermodel {", "  rankdir=LR;", "  node [shape=box];"]
    for i, w in enumerate(m.worlds):
        parts = [w]
        for p in atoms:
            parts.append(f"{p}={rational_str(m.atom_value(p, w))}")
        if isinstance(m, FModel):
            ts = ",".join(rational_str(x) for x in sorted(m.tset(w)))
            parts.append(f"T={{{ts}}}")
        label = "\\n".join(parts)
        lines.append(f'  n{i} [label="{label}"];')
    index = {w: i for i, w in enumerate(m.worlds)}
    for (src, dst), q in sorted(m.access.items()):
        if q != ZERO:
            lines.append(
                f'  n{index[src]} -> n{index[dst]} [label="{rational_str(q)}"];'
            )
    lines.append("}")
    return "\n".join(lines) + "\n"
