"""Object language: syntax tree, concrete grammar, desugaring, metrics.

The core language has six constructors (atoms, involutive negation,
conjunction, implication, box, diamond).  The extended connectives
(or, coimplication, iff, Goedel negation, delta, and the two truth
constants) are definable and expanded away by :func:`desugar`; the
evaluators also interpret them directly so the expansion can be
cross-checked.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ParseError

# Atom reserved for the expansion of the truth constant 1 (written `1` in the
# concrete syntax, expanded to `_one -> _one`).  The leading underscore is not
# lexable, so user formulas can never mention it.
RESERVED_ATOM = "_one"

ATOM_RE = re.compile(r"[a-z][a-z0-9_]*")


class Formula:
    """Base class for all formula nodes.  Instances are immutable."""

    __slots__ = ()

    def __str__(self):
        return render(self)


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class Inv(Formula):
    sub: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Imp(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Box(Formula):
    sub: Formula


@dataclass(frozen=True)
class Dia(Formula):
    sub: Formula


# Extended (defined) connectives.


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Coimp(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Neg(Formula):
    sub: Formula


@dataclass(frozen=True)
class Delta(Formula):
    sub: Formula


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bottom(Formula):
    pass


CORE_NODES = (Atom, Inv, And, Imp, Box, Dia)


def is_core(f: Formula) -> bool:
    """True iff the tree only uses the six core constructors."""
    if isinstance(f, Atom):
        return True
    if isinstance(f, (Inv, Box, Dia)):
        return is_core(f.sub)
    if isinstance(f, (And, Imp)):
        return is_core(f.left) and is_core(f.right)
    return False


def desugar(f: Formula) -> Formula:
    """Expand every defined connective, returning an equivalent core formula.

    Expansions: 1 := p0 -> p0 (for the reserved atom p0), 0 := ~1,
    !a := a -> 0, a | b := ~(~a & ~b), a -< b := ~(~b -> ~a),
    #a := 1 -< (1 -< a), a <-> b := (a -> b) & (b -> a).
    Idempotent on core formulas.
    """
    if isinstance(f, Atom):
        return f
    if isinstance(f, Inv):
        return Inv(desugar(f.sub))
    if isinstance(f, And):
        return And(desugar(f.left), desugar(f.right))
    if isinstance(f, Imp):
        return Imp(desugar(f.left), desugar(f.right))
    if isinstance(f, Box):
        return Box(desugar(f.sub))
    if isinstance(f, Dia):
        return Dia(desugar(f.sub))
    if isinstance(f, Top):
        p0 = Atom(RESERVED_ATOM)
        return Imp(p0, p0)
    if isinstance(f, Bottom):
        return Inv(desugar(Top()))
    if isinstance(f, Neg):
        return Imp(desugar(f.sub), desugar(Bottom()))
    if isinstance(f, Or):
        return Inv(And(Inv(desugar(f.left)), Inv(desugar(f.right))))
    if isinstance(f, Coimp):
        return Inv(Imp(Inv(desugar(f.right)), Inv(desugar(f.left))))
    if isinstance(f, Delta):
        return desugar(Coimp(Top(), Coimp(Top(), f.sub)))
    if isinstance(f, Iff):
        a, b = desugar(f.left), desugar(f.right)
        return And(Imp(a, b), Imp(b, a))
    raise TypeError(f"not a formula: {f!r}")


@dataclass(frozen=True)
class FormulaMetrics:
    length: int
    modal_depth: int
    atom_count: int


def metrics(f: Formula) -> FormulaMetrics:
    """Symbol-occurrence length, modal depth and distinct-atom count.

    Length is the node count of the core form (one occurrence per atom,
    connective or modality; parentheses are not counted).
    """
    core = desugar(f)
    atoms: set[str] = set()

    def walk(g: Formula) -> tuple[int, int]:
        if isinstance(g, Atom):
            atoms.add(g.name)
            return 1, 0
        if isinstance(g, (Box, Dia)):
            n, d = walk(g.sub)
            return n + 1, d + 1
        if isinstance(g, Inv):
            n, d = walk(g.sub)
            return n + 1, d
        n1, d1 = walk(g.left)
        n2, d2 = walk(g.right)
        return n1 + n2 + 1, max(d1, d2)

    length, depth = walk(core)
    return FormulaMetrics(length=length, modal_depth=depth, atom_count=len(atoms))


def subformulas(f: Formula) -> list[Formula]:
    """All subformulas of ``f`` in post-order, deduplicated, ending with ``f``."""
    out: list[Formula] = []
    seen: set[Formula] = set()

    def walk(g: Formula):
        if isinstance(g, (Inv, Box, Dia, Neg, Delta)):
            walk(g.sub)
        elif isinstance(g, (And, Imp, Or, Coimp, Iff)):
            walk(g.left)
            walk(g.right)
        if g not in seen:
            seen.add(g)
            out.append(g)

    walk(f)
    return out


def atoms_of(f: Formula) -> list[str]:
    """Distinct atom names in first-occurrence order."""
    out: list[str] = []
    for sub in subformulas(f):
        if isinstance(sub, Atom) and sub.name not in out:
            out.append(sub.name)
    return out


# --- concrete syntax ---------------------------------------------------------
#
# Tokens:   atoms  [a-z][a-z0-9_]*     constants  1  0
#   ~ involutive negation   ! Goedel negation   # delta
#   & and   | or   -> implication   -< coimplication   <-> iff
#   [] box   <> diamond   ( ) grouping
#
# Precedence, loosest to tightest:  <->, ->, -<, |, &, unary.
# -> , -< and <-> are right-associative; | and & are left-associative.

_MULTI_TOKENS = ("<->", "<>", "->", "-<", "[]")
_SINGLE_TOKENS = "~!#&|()01"


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        for tok in _MULTI_TOKENS:
            if text.startswith(tok, i):
                tokens.append(("op", tok, i))
                i += len(tok)
                break
        else:
            if ch in _SINGLE_TOKENS:
                tokens.append(("op", ch, i))
                i += 1
            else:
                m = ATOM_RE.match(text, i)
                if m is None:
                    raise ParseError(f"unexpected character {ch!r}", i)
                tokens.append(("atom", m.group(0), i))
                i = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, value: str):
        kind, val, at = self.peek()
        if kind != "op" or val != value:
            raise ParseError(f"expected {value!r}", at)
        return self.take()

    def parse(self) -> Formula:
        f = self.iff()
        kind, val, at = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {val!r} after formula", at)
        return f

    def iff(self) -> Formula:
        left = self.imp()
        if self.peek()[1] == "<->":
            self.take()
            return Iff(left, self.iff())
        return left

    def imp(self) -> Formula:
        left = self.coimp()
        if self.peek()[1] == "->":
            self.take()
            return Imp(left, self.imp())
        return left

    def coimp(self) -> Formula:
        left = self.disj()
        if self.peek()[1] == "-<":
            self.take()
            return Coimp(left, self.coimp())
        return left

    def disj(self) -> Formula:
        left = self.conj()
        while self.peek()[1] == "|":
            self.take()
            left = Or(left, self.conj())
        return left

    def conj(self) -> Formula:
        left = self.unary()
        while self.peek()[1] == "&":
            self.take()
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        kind, val, at = self.peek()
        if kind == "op":
            if val == "~":
                self.take()
                return Inv(self.unary())
            if val == "!":
                self.take()
                return Neg(self.unary())
            if val == "#":
                self.take()
                return Delta(self.unary())
            if val == "[]":
                self.take()
                return Box(self.unary())
            if val == "<>":
                self.take()
                return Dia(self.unary())
        return self.primary()

    def primary(self) -> Formula:
        kind, val, at = self.take()
        if kind == "atom":
            return Atom(val)
        if kind == "op":
            if val == "1":
                return Top()
            if val == "0":
                return Bottom()
            if val == "(":
                f = self.iff()
                self.expect(")")
                return f
        raise ParseError(f"expected a formula, found {val or 'end of input'!r}", at)


def parse(text: str) -> Formula:
    """Parse ASCII formula text into a syntax tree."""
    return _Parser(text).parse()


# Binding strength per node type; higher binds tighter.
_PREC = {
    Iff: 1,
    Imp: 2,
    Coimp: 3,
    Or: 4,
    And: 5,
}
_UNARY_PREC = 6


def _prec(f: Formula) -> int:
    return _PREC.get(type(f), _UNARY_PREC)


def render(f: Formula) -> str:
    """Print with minimal parentheses; ``parse(render(f)) == f``."""

    def wrap(child: Formula, limit: int) -> str:
        s = render(child)
        return f"({s})" if _prec(child) < limit else s

    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Top):
        return "1"
    if isinstance(f, Bottom):
        return "0"
    if isinstance(f, Inv):
        return "~" + wrap(f.sub, _UNARY_PREC)
    if isinstance(f, Neg):
        return "!" + wrap(f.sub, _UNARY_PREC)
    if isinstance(f, Delta):
        return "#" + wrap(f.sub, _UNARY_PREC)
    if isinstance(f, Box):
        return "[]" + wrap(f.sub, _UNARY_PREC)
    if isinstance(f, Dia):
        return "<>" + wrap(f.sub, _UNARY_PREC)
    prec = _prec(f)
    if isinstance(f, (And, Or)):
        # left-associative: parenthesize an equal-precedence right child
        op = "&" if isinstance(f, And) else "|"
        return f"{wrap(f.left, prec)} {op} {wrap(f.right, prec + 1)}"
    if isinstance(f, (Imp, Coimp, Iff)):
        # right-associative: parenthesize an equal-precedence left child
        op = {"Imp": "->", "Coimp": "-<", "Iff": "<->"}[type(f).__name__]
        return f"{wrap(f.left, prec + 1)} {op} {wrap(f.right, prec)}"
    raise TypeError(f"not a formula: {f!r}")
