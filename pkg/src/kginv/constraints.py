"""Proof state: value terms, labelled constraints and branches.

A branch is an insertion-ordered set of constraints together with the
bookkeeping the calculus needs: fresh-symbol counters, the relational terms
seen so far, the per-label registry of bracketing symbols, and an
incrementally maintained translation of every constraint into solver atoms
(one variable per distinct term or labelled formula).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from . import formula as fm
from .models import ONE, ZERO


class Rel(enum.Enum):
    LE = "<="
    LT = "<"
    GE = ">="
    GT = ">"
    EQ = "="

    def mirror(self) -> "Rel":
        """Swap the direction: <= with >=, < with >; = is self-mirror."""
        return _MIRROR[self]

    def holds(self, a: Fraction, b: Fraction) -> bool:
        if self is Rel.LE:
            return a <= b
        if self is Rel.LT:
            return a < b
        if self is Rel.GE:
            return a >= b
        if self is Rel.GT:
            return a > b
        return a == b

    def __str__(self):
        return self.value


_MIRROR = {
    Rel.LE: Rel.GE,
    Rel.GE: Rel.LE,
    Rel.LT: Rel.GT,
    Rel.GT: Rel.LT,
    Rel.EQ: Rel.EQ,
}

LOWER = (Rel.GE, Rel.GT)  # lower bounds on the structure's value
UPPER = (Rel.LE, Rel.LT)


class Term:
    """Base class for value terms."""

    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class TSym(Term):
    """Bracketing symbol: one endpoint of a pair of consecutive admissible
    values at a label; kind "lo" is the lower endpoint, "hi" the upper."""

    kind: str
    label: str
    index: int

    def __str__(self):
        stem = "t" if self.kind == "lo" else "ts"
        return f"{stem}{self.index}({self.label})"


@dataclass(frozen=True)
class ZeroSym(Term):
    def __str__(self):
        return "0*"


@dataclass(frozen=True)
class OneSym(Term):
    def __str__(self):
        return "1*"


@dataclass(frozen=True)
class RelTerm(Term):
    src: str
    dst: str

    def __str__(self):
        return f"{self.src}R{self.dst}"


@dataclass(frozen=True)
class Const(Term):
    value: Fraction

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Compl(Term):
    inner: Term

    def __str__(self):
        return f"1 - {self.inner}"


CONST0 = Const(ZERO)
CONST1 = Const(ONE)


def compl(t: Term) -> Term:
    """Complement constructor; collapses double complements and constants."""
    if isinstance(t, Compl):
        return t.inner
    if isinstance(t, Const):
        return Const(ONE - t.value)
    return Compl(t)


@dataclass(frozen=True)
class LabelledFormula:
    label: str
    formula: fm.Formula

    def __str__(self):
        return f"{self.label}: {fm.render(self.formula)}"


Structure = Union[LabelledFormula, Term]


@dataclass(frozen=True)
class Constraint:
    left: Structure
    rel: Rel
    right: Term

    def __str__(self):
        return f"{self.left} {self.rel} {self.right}"


# --- solver atoms -------------------------------------------------------------
#
# Normal forms over solver variables (indices into the branch's variable
# table), all with unit coefficients:
#   diff   x - y  rel  0      (rel in {<=, <, =} after flipping)
#   sum    x + y  rel  1      (i.e. x rel 1 - y)
#   const  x      rel  q


@dataclass(frozen=True)
class LinearAtom:
    kind: str  # "diff" | "sum" | "const"
    a: int
    rel: Rel
    b: Optional[int] = None
    q: Optional[Fraction] = None

    def render(self, names=None) -> str:
        def name(i):
            return names[i] if names else f"x{i}"

        if self.kind == "diff":
            return f"{name(self.a)} {self.rel} {name(self.b)}"
        if self.kind == "sum":
            return f"{name(self.a)} {self.rel} 1 - {name(self.b)}"
        return f"{name(self.a)} {self.rel} {self.q}"

    def __str__(self):
        return self.render()


def _norm_diff(a: int, rel: Rel, b: int) -> Optional[LinearAtom]:
    if a == b:
        if rel in (Rel.LT, Rel.GT):
            return LinearAtom("const", a, Rel.LT, q=None)  # marker: impossible
        return None  # trivially true
    if rel in (Rel.GE, Rel.GT):
        a, b, rel = b, a, rel.mirror()
    return LinearAtom("diff", a, rel, b=b)


def _make_atoms(a: int, rel: Rel, b: int, kind: str) -> list[LinearAtom]:
    """kind "diff": x_a rel x_b;  kind "sum": x_a rel 1 - x_b."""
    out = []
    rels = (Rel.LE, Rel.GE) if rel is Rel.EQ else (rel,)
    for r in rels:
        if kind == "diff":
            atom = _norm_diff(a, r, b)
            if atom is not None:
                out.append(atom)
        else:
            if a == b:
                # x rel 1 - x  collapses to  x rel 1/2
                out.append(LinearAtom("const", a, r, q=Fraction(1, 2)))
            else:
                out.append(LinearAtom("sum", a, r, b=b))
    return out


FALSE_ATOM = LinearAtom("const", -1, Rel.LT, q=None)


class Branch:
    """One tableau branch: constraints plus all derived bookkeeping.

    Extension is copy-on-write via :meth:`clone`; a cloned branch shares
    nothing mutable with its parent, so children can be explored (even
    concurrently) without interference.
    """

    def __init__(self):
        self.constraints: list[Constraint] = []
        self.origins: list[tuple[str, int]] = []  # (rule name, premise index)
        self._cset: set[Constraint] = set()
        self.applied: set = set()
        self._next_label = 0
        self._next_var = 0
        self._next_pair: dict[str, int] = {}
        self.labels: list[str] = []
        self._pending_parent: dict[str, str] = {}
        self.parent_of: dict[str, str] = {}
        self.children_of: dict[str, list[str]] = {}
        self.relterms: list[RelTerm] = []
        self.tsyms: dict[str, list[TSym]] = {}
        self.zero_pinned: set[str] = set()
        self.one_pinned: set[str] = set()
        # translation state
        self.varmap: dict = {}
        self.varnames: list[str] = []
        self.atoms: list[LinearAtom] = []
        self._pairs_seen: dict[tuple[str, int], set[str]] = {}
        self.trivially_false = False

    def clone(self) -> "Branch":
        b = Branch.__new__(Branch)
        b.constraints = list(self.constraints)
        b.origins = list(self.origins)
        b._cset = set(self._cset)
        b.applied = set(self.applied)
        b._next_label = self._next_label
        b._next_var = self._next_var
        b._next_pair = dict(self._next_pair)
        b.labels = list(self.labels)
        b._pending_parent = dict(self._pending_parent)
        b.parent_of = dict(self.parent_of)
        b.children_of = {k: list(v) for k, v in self.children_of.items()}
        b.relterms = list(self.relterms)
        b.tsyms = {k: list(v) for k, v in self.tsyms.items()}
        b.zero_pinned = set(self.zero_pinned)
        b.one_pinned = set(self.one_pinned)
        b.varmap = dict(self.varmap)
        b.varnames = list(self.varnames)
        b.atoms = list(self.atoms)
        b._pairs_seen = {k: set(v) for k, v in self._pairs_seen.items()}
        b.trivially_false = self.trivially_false
        return b

    # -- fresh symbols ----------------------------------------------------

    def fresh_label(self, parent: Optional[str] = None) -> str:
        """Fresh label; it joins the branch only when it first occurs in a
        constraint (a rule child may never mention it)."""
        name = f"w{self._next_label}"
        self._next_label += 1
        if parent is not None:
            self._pending_parent[name] = parent
        return name

    def _register_label(self, name: str):
        if name not in self.children_of:
            self.children_of[name] = []
            self.labels.append(name)
            parent = self._pending_parent.get(name)
            if parent is not None:
                self.parent_of[name] = parent
                self.children_of[parent].append(name)

    def fresh_var(self) -> Var:
        v = Var(f"c{self._next_var}")
        self._next_var += 1
        return v

    def fresh_tpair(self, label: str) -> tuple[TSym, TSym]:
        i = self._next_pair.get(label, 0)
        self._next_pair[label] = i + 1
        return TSym("lo", label, i), TSym("hi", label, i)

    # -- registries ---------------------------------------------------------

    def registry(self, label: str) -> list[Term]:
        """Bracketing symbols with this label occurring on the branch, plus
        the zero/one symbols when pinned here by an equality constraint."""
        out: list[Term] = list(self.tsyms.get(label, ()))
        if label in self.zero_pinned:
            out.append(ZeroSym())
        if label in self.one_pinned:
            out.append(OneSym())
        return out

    def matched_pairs(self, label: str) -> list[tuple[TSym, TSym]]:
        syms = self.tsyms.get(label, ())
        lows = {s.index: s for s in syms if s.kind == "lo"}
        highs = {s.index: s for s in syms if s.kind == "hi"}
        return [(lows[i], highs[i]) for i in sorted(lows) if i in highs]

    # -- extension ----------------------------------------------------------

    def add(self, c: Constraint, rule: str, premise_index: int) -> bool:
        """Append a constraint (no-op on duplicates); updates every index."""
        if c in self._cset:
            return False
        self._cset.add(c)
        self.constraints.append(c)
        self.origins.append((rule, premise_index))
        self._index_terms(c)
        self._translate(c)
        return True

    def _index_terms(self, c: Constraint):
        if isinstance(c.left, LabelledFormula):
            self._register_label(c.left.label)
            if c.rel is Rel.EQ:
                if isinstance(c.right, ZeroSym):
                    self.zero_pinned.add(c.left.label)
                elif isinstance(c.right, OneSym):
                    self.one_pinned.add(c.left.label)
        for t in _walk_terms(c):
            if isinstance(t, TSym):
                self._register_label(t.label)
                bucket = self.tsyms.setdefault(t.label, [])
                if t not in bucket:
                    bucket.append(t)
            elif isinstance(t, RelTerm):
                self._register_label(t.src)
                self._register_label(t.dst)
                if t not in self.relterms:
                    self.relterms.append(t)

    # -- translation ---------------------------------------------------------

    def var_of(self, key) -> int:
        idx = self.varmap.get(key)
        if idx is None:
            idx = len(self.varnames)
            self.varmap[key] = idx
            self.varnames.append(str(key))
        return idx

    def _expr(self, t: Term):
        """('var', i) | ('comp', i) | ('const', q)."""
        if isinstance(t, Const):
            return ("const", t.value)
        if isinstance(t, ZeroSym):
            return ("const", ZERO)
        if isinstance(t, OneSym):
            return ("const", ONE)
        if isinstance(t, Compl):
            kind, payload = self._expr(t.inner)
            if kind == "const":
                return ("const", ONE - payload)
            if kind == "comp":
                return ("var", payload)
            return ("comp", payload)
        return ("var", self.var_of(t))

    def _translate(self, c: Constraint):
        if isinstance(c.left, LabelledFormula):
            left = ("var", self.var_of(c.left))
        else:
            left = self._expr(c.left)
        right = self._expr(c.right)
        for atom in _atoms_for(left, c.rel, right):
            if atom.kind == "const" and atom.q is None:
                self.trivially_false = True
            elif atom not in self.atoms:
                self.atoms.append(atom)
        self._note_pairs(c)

    def _note_pairs(self, c: Constraint):
        # the ordering obligation x_t < x_ts joins the system as soon as a
        # pair member first occurs on the branch
        for t in _walk_terms(c):
            if isinstance(t, TSym):
                key = (t.label, t.index)
                seen = self._pairs_seen.setdefault(key, set())
                if "done" in seen:
                    continue
                seen.add(t.kind)
                lo = TSym("lo", t.label, t.index)
                hi = TSym("hi", t.label, t.index)
                atom = LinearAtom(
                    "diff", self.var_of(lo), Rel.LT, b=self.var_of(hi)
                )
                if atom not in self.atoms:
                    self.atoms.append(atom)
                seen.add("done")

    def dump_atoms(self) -> str:
        lines = [atom.render() for atom in self.atoms]
        legend = [f"# x{i} = {name}" for i, name in enumerate(self.varnames)]
        return "\n".join(lines + legend) + "\n"

    def pretty(self) -> list[str]:
        out = []
        for i, (c, (rule, prem)) in enumerate(zip(self.constraints, self.origins)):
            note = f"  ({rule}:{prem + 1})" if rule != "init" else ""
            out.append(f"{i + 1}. {c}{note}")
        return out


def _walk_terms(c: Constraint):
    stack = []
    if isinstance(c.left, Term):
        stack.append(c.left)
    stack.append(c.right)
    while stack:
        t = stack.pop()
        if isinstance(t, Compl):
            stack.append(t.inner)
        else:
            yield t


def _atoms_for(left, rel: Rel, right) -> list[LinearAtom]:
    lk, lv = left
    rk, rv = right
    if lk == "const" and rk == "const":
        return [] if rel.holds(lv, rv) else [FALSE_ATOM]
    if lk == "const":
        # q rel x  ->  x rel' q ;  q rel 1-x  ->  x rel 1-q
        if rk == "var":
            return _const_atoms(rv, rel.mirror(), lv)
        return _const_atoms(rv, rel, ONE - lv)
    if rk == "const":
        # x rel q ;  1-x rel q  ->  x rel' 1-q
        if lk == "var":
            return _const_atoms(lv, rel, rv)
        return _const_atoms(lv, rel.mirror(), ONE - rv)
    if lk == "var" and rk == "var":
        return _make_atoms(lv, rel, rv, "diff")
    if lk == "var" and rk == "comp":
        return _make_atoms(lv, rel, rv, "sum")
    if lk == "comp" and rk == "var":
        # 1-x rel y  <=>  x rel' 1-y
        return _make_atoms(lv, rel.mirror(), rv, "sum")
    # 1-x rel 1-y  <=>  y rel x
    return _make_atoms(rv, rel, lv, "diff")


def _const_atoms(v: int, rel: Rel, q: Fraction) -> list[LinearAtom]:
    rels = (Rel.LE, Rel.GE) if rel is Rel.EQ else (rel,)
    return [LinearAtom("const", v, r, q=q) for r in rels]
