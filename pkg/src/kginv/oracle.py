"""Independent ground truth: grid oracle, bounded refutation, enumerators.

Nothing here shares code paths with the tableau or the closure check; the
point is to cross-examine them.  The propositional oracle enumerates grid
valuations; the bounded refuter enumerates small legal F-models outright;
the side-condition enumerator rebuilds the closure disjunctions from
ordered-partition patterns rather than per-symbol splitting.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Optional

from . import formula as fm
from .constraints import LinearAtom, Rel, Term, TSym, ZeroSym, OneSym
from .errors import KGInvError
from .models import (
    HALF,
    ONE,
    ZERO,
    FModel,
    StandardModel,
    eval_f,
    eval_standard,
    validate_f,
)


@dataclass(frozen=True)
class Grid:
    """Evaluation grid {0, 1/d, ..., 1}; d is kept even so the grid contains
    1/2 and is closed under x -> 1-x."""

    denominator: int

    def __post_init__(self):
        if self.denominator <= 0 or self.denominator % 2:
            raise ValueError("grid denominator must be a positive even number")

    def points(self) -> list[Fraction]:
        d = self.denominator
        return [Fraction(k, d) for k in range(d + 1)]


def prop_valid_grid(phi: fm.Formula) -> bool:
    """Propositional validity by exhaustive grid evaluation.

    A formula's value depends only on how the atom values, their
    complements, and {0, 1/2, 1} are ordered; with n distinct atoms every
    such configuration is realised on the grid with denominator 2(n+1), so
    the enumeration is exact for modality-free formulas.
    """
    if any(isinstance(g, (fm.Box, fm.Dia)) for g in fm.subformulas(phi)):
        raise KGInvError("the propositional oracle rejects modal formulas")
    names = fm.atoms_of(phi)
    grid = Grid(2 * (len(names) + 1))
    points = grid.points()
    world = "w"
    for combo in itertools.product(points, repeat=len(names)):
        model = StandardModel(
            worlds=(world,),
            val={(name, world): value for name, value in zip(names, combo)},
        )
        if eval_standard(model, world, phi) != ONE:
            return False
    return True


def prop_counterexample(phi: fm.Formula) -> Optional[dict[str, Fraction]]:
    """A grid valuation giving the formula a value below 1, if any."""
    if any(isinstance(g, (fm.Box, fm.Dia)) for g in fm.subformulas(phi)):
        raise KGInvError("the propositional oracle rejects modal formulas")
    names = fm.atoms_of(phi)
    grid = Grid(2 * (len(names) + 1))
    world = "w"
    for combo in itertools.product(grid.points(), repeat=len(names)):
        model = StandardModel(
            worlds=(world,),
            val={(name, world): value for name, value in zip(names, combo)},
        )
        if eval_standard(model, world, phi) != ONE:
            return dict(zip(names, combo))
    return None


def _legal_tsets(points: list[Fraction], max_size: Optional[int]) -> list[frozenset]:
    """Subsets of the grid containing {0,1/2,1} and closed under 1-x."""
    anchors = frozenset((ZERO, HALF, ONE))
    orbits = sorted(
        {frozenset((p, ONE - p)) for p in points if p not in anchors},
        key=lambda orb: min(orb),
    )
    out = []
    for r in range(len(orbits) + 1):
        for chosen in itertools.combinations(orbits, r):
            ts = anchors.union(*chosen) if chosen else anchors
            if max_size is None or len(ts) <= max_size:
                out.append(frozenset(ts))
    return out


def refute_small(
    phi: fm.Formula,
    max_worlds: int = 2,
    denominator: int = 2,
    max_t_size: Optional[int] = None,
    crisp: bool = False,
) -> Optional[FModel]:
    """Search all legal F-models within the bounds for one giving the
    formula a value below 1 at the first world; None when none exists
    within the bounds (absence is not a validity proof)."""
    grid = Grid(denominator)
    points = grid.points()
    acc_points = [ZERO, ONE] if crisp else points
    names = fm.atoms_of(phi) or []
    tsets = _legal_tsets(points, max_t_size)
    for n in range(1, max_worlds + 1):
        worlds = tuple(f"w{i}" for i in range(n))
        pairs = [(w, u) for w in worlds for u in worlds]
        cells = [(name, w) for name in names for w in worlds]
        for tchoice in itertools.product(tsets, repeat=n):
            tvals = dict(zip(worlds, tchoice))
            for acc_combo in itertools.product(acc_points, repeat=len(pairs)):
                access = {
                    pair: q for pair, q in zip(pairs, acc_combo) if q != ZERO
                }
                for val_combo in itertools.product(points, repeat=len(cells)):
                    val = {
                        cell: q for cell, q in zip(cells, val_combo) if q != ZERO
                    }
                    model = FModel(
                        worlds=worlds,
                        access=access,
                        val=val,
                        crisp=crisp,
                        tvals=tvals,
                    )
                    if eval_f(model, worlds[0], phi) < ONE:
                        return model
    return None


# --- side-condition enumeration -------------------------------------------------


def _sym_value(t: Term) -> Optional[Fraction]:
    if isinstance(t, ZeroSym):
        return ZERO
    if isinstance(t, OneSym):
        return ONE
    return None


def _pin_atoms(var_of, t: Term, q: Fraction) -> Optional[list[LinearAtom]]:
    fixed = _sym_value(t)
    if fixed is not None:
        return [] if fixed == q else None
    v = var_of(t)
    return [
        LinearAtom("const", v, Rel.LE, q=q),
        LinearAtom("const", v, Rel.GE, q=q),
    ]


def _equal_atoms(var_of, s: Term, t: Term) -> Optional[list[LinearAtom]]:
    qs, qt = _sym_value(s), _sym_value(t)
    if qs is not None and qt is not None:
        return [] if qs == qt else None
    if qs is not None:
        return _pin_atoms(var_of, t, qs)
    if qt is not None:
        return _pin_atoms(var_of, s, qt)
    a, b = var_of(s), var_of(t)
    if a == b:
        return []
    return [
        LinearAtom("diff", a, Rel.LE, b=b),
        LinearAtom("diff", b, Rel.LE, b=a),
    ]


def _strict_atoms(var_of, s: Term, t: Term) -> Optional[list[LinearAtom]]:
    qs, qt = _sym_value(s), _sym_value(t)
    if qs is not None and qt is not None:
        return [] if qs < qt else None
    if qs is not None:
        v = var_of(t)
        return [LinearAtom("const", v, Rel.GT, q=qs)]
    if qt is not None:
        v = var_of(s)
        return [LinearAtom("const", v, Rel.LT, q=qt)]
    return [LinearAtom("diff", var_of(s), Rel.LT, b=var_of(t))]


def _ordered_partitions(items: list) -> Iterator[list[list]]:
    """All ways to split ``items`` into a sequence of nonempty blocks."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for blocks in _ordered_partitions(rest):
        yield [[first]] + blocks
        for i in range(len(blocks)):
            with_first = [list(b) for b in blocks]
            with_first[i].insert(0, first)
            yield with_first


def _world_resolutions(
    registry: list[Term],
    pairs: list[tuple[TSym, TSym]],
    var_of,
    betweenness: str,
) -> list[list[LinearAtom]]:
    """All admissible resolutions for one label's registry, phrased as
    ordered-and-identified value patterns."""
    if not registry:
        return [[]]
    only_pair = (
        len(registry) == 2
        and len(pairs) == 1
        and set(registry) == {pairs[0][0], pairs[0][1]}
    )
    if only_pair:
        lo, hi = pairs[0]
        out = []
        for a, b in ((ZERO, HALF), (HALF, ONE)):
            atoms = _pin_atoms(var_of, lo, a) + _pin_atoms(var_of, hi, b)
            out.append(atoms)
        return out
    if len(registry) < 3:
        return [[]]

    out = []
    for blocks in _ordered_partitions(list(registry)):
        m = len(blocks)
        if m < 3 or m % 2 == 0:
            continue
        position = {}
        for i, block in enumerate(blocks):
            for t in block:
                position[t] = i
        ok = True
        for lo, hi in pairs:
            if position[lo] >= position[hi]:
                ok = False
                break
            for other in registry:
                if not isinstance(other, TSym) or other.index == lo.index:
                    continue
                if betweenness == "lower" and other.kind != "lo":
                    continue
                if position[lo] < position[other] < position[hi]:
                    ok = False
                    break
            if not ok:
                break
        if not ok:
            continue
        atoms: Optional[list[LinearAtom]] = []

        def push(extra):
            nonlocal atoms
            if atoms is None or extra is None:
                atoms = None
            else:
                atoms = atoms + [a for a in extra if a not in atoms]

        for block in blocks:
            rep = block[0]
            for t in block[1:]:
                push(_equal_atoms(var_of, rep, t))
        for i in range(m - 1):
            push(_strict_atoms(var_of, blocks[i][0], blocks[i + 1][0]))
        # symmetric values: block i and block m-1-i sum to 1
        for i in range((m + 1) // 2):
            j = m - 1 - i
            if i == j:
                push(_pin_atoms(var_of, blocks[i][0], HALF))
            else:
                a, b = blocks[i][0], blocks[j][0]
                qa, qb = _sym_value(a), _sym_value(b)
                if qa is not None:
                    push(_pin_atoms(var_of, b, ONE - qa))
                elif qb is not None:
                    push(_pin_atoms(var_of, a, ONE - qb))
                else:
                    va, vb = var_of(a), var_of(b)
                    push(
                        [
                            LinearAtom("sum", va, Rel.LE, b=vb),
                            LinearAtom("sum", va, Rel.GE, b=vb),
                        ]
                    )
        # anchors: the ends carry 0 and 1
        push(_pin_atoms(var_of, blocks[0][0], ZERO))
        push(_pin_atoms(var_of, blocks[-1][0], ONE))
        if atoms is not None:
            out.append(atoms)
    return out


def enumerate_side_conditions(
    registries: dict[str, tuple[list[Term], list[tuple[TSym, TSym]]]],
    var_of: Callable[[Term], int],
    betweenness: str = "all",
    max_registry: int = 6,
) -> Iterator[list[LinearAtom]]:
    """Every admissible resolution of the published anchor conditions, one
    atom list at a time (ordered-partition patterns rather than per-symbol
    splitting, so it cross-checks the solver's closure search).

    ``registries`` maps each label to its (registry, matched pairs).
    """
    per_world = []
    for label in registries:
        registry, pairs = registries[label]
        if len(registry) > max_registry:
            raise KGInvError(
                f"registry at {label} has {len(registry)} symbols; "
                f"limit is {max_registry}"
            )
        per_world.append(_world_resolutions(registry, pairs, var_of, betweenness))
    for combo in itertools.product(*per_world):
        merged: list[LinearAtom] = []
        for atoms in combo:
            merged.extend(a for a in atoms if a not in merged)
        yield merged


def enumerate_adjacency_conditions(
    registries: dict[str, tuple[list[Term], list[tuple[TSym, TSym]]]],
    var_of: Callable[[Term], int],
    max_registry: int = 6,
) -> Iterator[list[LinearAtom]]:
    """Every resolution of the adjacency conditions: for each matched pair
    and each potential admissible value (registry values, their
    complements, 1/2), pick a side of the pair for it to sit on."""
    choice_sets = []
    for label in registries:
        registry, pairs = registries[label]
        if len(registry) > max_registry:
            raise KGInvError(
                f"registry at {label} has {len(registry)} symbols; "
                f"limit is {max_registry}"
            )
        for lo, hi in pairs:
            vl, vh = var_of(lo), var_of(hi)
            for t in registry:
                for complemented in (False, True):
                    fixed = _sym_value(t)
                    if fixed is not None:
                        value = ONE - fixed if complemented else fixed
                        if value in (ZERO, ONE):
                            continue
                        choice_sets.append(
                            (
                                [LinearAtom("const", vl, Rel.GE, q=value)],
                                [LinearAtom("const", vh, Rel.LE, q=value)],
                            )
                        )
                        continue
                    v = var_of(t)
                    if not complemented and v in (vl, vh):
                        continue
                    if complemented:
                        below = [LinearAtom("sum", v, Rel.GE, b=vl)]
                        above = [LinearAtom("sum", v, Rel.LE, b=vh)]
                    else:
                        below = [LinearAtom("diff", v, Rel.LE, b=vl)]
                        above = [LinearAtom("diff", vh, Rel.LE, b=v)]
                    choice_sets.append((below, above))
            choice_sets.append(
                (
                    [LinearAtom("const", vl, Rel.GE, q=HALF)],
                    [LinearAtom("const", vh, Rel.LE, q=HALF)],
                )
            )
    for combo in itertools.product(*choice_sets):
        merged: list[LinearAtom] = []
        for atoms in combo:
            merged.extend(a for a in atoms if a not in merged)
        yield merged


# --- random generators -----------------------------------------------------------

_BINARY = (fm.And, fm.Or, fm.Imp, fm.Coimp, fm.Iff)
_UNARY = (fm.Inv, fm.Neg, fm.Delta)
_MODAL = (fm.Box, fm.Dia)


def random_formula(
    rng: random.Random,
    max_length: int = 12,
    atom_pool: int = 3,
    modal: bool = False,
    max_modal_depth: int = 2,
) -> fm.Formula:
    """Random formula weighted 40% binary / 30% unary / 30% atoms.

    ``max_length`` bounds the symbol count of the core form (defined
    connectives expand before measuring); candidates over the bound are
    rejected and redrawn, so heavy sugar only appears when it fits.
    """
    names = ["p", "q", "r", "s", "u", "v"][:atom_pool]

    def gen(budget: int, depth: int) -> tuple[fm.Formula, int]:
        roll = rng.random()
        if budget <= 1 or roll < 0.3:
            return fm.Atom(rng.choice(names)), 1
        if roll < 0.6:
            unaries = list(_UNARY)
            if modal and depth < max_modal_depth:
                unaries += list(_MODAL)
            ctor = rng.choice(unaries)
            sub, used = gen(budget - 1, depth + (1 if ctor in _MODAL else 0))
            return ctor(sub), used + 1
        # implication-heavy mix keeps a useful share of valid formulas
        ctor = rng.choices(_BINARY, weights=(15, 15, 40, 15, 15))[0]
        left, used_l = gen((budget - 1) // 2, depth)
        right, used_r = gen(budget - 1 - used_l, depth)
        return ctor(left, right), used_l + used_r + 1

    for _ in range(200):
        f, _ = gen(max_length, 0)
        m = fm.metrics(f)
        if m.length <= max_length and m.modal_depth <= max_modal_depth:
            return f
    return fm.Atom(names[0])


def random_standard_model(
    rng: random.Random,
    atom_names: list[str],
    max_worlds: int = 3,
    denominator: int = 4,
    crisp: bool = False,
) -> StandardModel:
    n = rng.randint(1, max_worlds)
    worlds = tuple(f"w{i}" for i in range(n))
    points = Grid(denominator).points()
    acc_points = [ZERO, ONE] if crisp else points
    access = {}
    for w in worlds:
        for u in worlds:
            if rng.random() < 0.6:
                q = rng.choice(acc_points)
                if q != ZERO:
                    access[(w, u)] = q
    val = {}
    for name in atom_names:
        for w in worlds:
            q = rng.choice(points)
            if q != ZERO:
                val[(name, w)] = q
    return StandardModel(worlds=worlds, access=access, val=val, crisp=crisp)


def random_f_model(
    rng: random.Random,
    atom_names: list[str],
    max_worlds: int = 3,
    denominator: int = 4,
    crisp: bool = False,
) -> FModel:
    base = random_standard_model(rng, atom_names, max_worlds, denominator, crisp)
    tsets = _legal_tsets(Grid(denominator).points(), None)
    tvals = {w: rng.choice(tsets) for w in base.worlds}
    model = FModel(
        worlds=base.worlds,
        access=base.access,
        val=base.val,
        crisp=base.crisp,
        tvals=tvals,
    )
    assert not validate_f(model)
    return model
