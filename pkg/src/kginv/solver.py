"""Exact rational feasibility and the branch closure check.

The atom shapes produced by translation (x rel y, x rel 1-y, x rel q, unit
coefficients, variables bounded to [0,1]) are decided without a general LP:
every atom becomes one or two difference edges over a doubled node set (a
"plus" and a "minus" node per variable, standing for +x and -x), strict
inequalities ride along as an infinitesimal on the edge weight, and the
system is feasible iff the graph has no negative cycle under the
lexicographic (rational, strict-count) order.  A witness is read off the
shortest-path potentials: x = (pot(x+) - pot(x-)) / 2, which lands in [0,1]
because the bounds are part of the graph.

Branch closure additionally quantifies over the involution side conditions
on each label's registry; those are disjunctive, so the check splits over
the admissible resolutions depth-first, pruning with the solver at every
choice.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .constraints import (
    Branch,
    Compl,
    Constraint,
    LabelledFormula,
    LinearAtom,
    OneSym,
    Rel,
    RelTerm,
    TSym,
    Term,
    ZeroSym,
)
from .models import HALF, ONE, ZERO


@dataclass
class SolveResult:
    sat: bool
    assignment: Optional[list[Fraction]] = None


def _edges_for(atom: LinearAtom, out: list):
    """Append (from_node, to_node, weight, strict) edges meaning
    pot(to) - pot(from) <= weight (minus an infinitesimal when strict).
    Node 2i is +x_i, node 2i+1 is -x_i."""
    rel = atom.rel
    strict = rel in (Rel.LT, Rel.GT)
    if atom.kind == "diff":
        # normalised to <= / <:  x - y <= 0
        a, b = atom.a, atom.b
        out.append((2 * b, 2 * a, ZERO, strict))
        out.append((2 * a + 1, 2 * b + 1, ZERO, strict))
    elif atom.kind == "sum":
        a, b = atom.a, atom.b
        if rel in (Rel.LE, Rel.LT):
            # x + y <= 1
            out.append((2 * b + 1, 2 * a, ONE, strict))
            out.append((2 * a + 1, 2 * b, ONE, strict))
        else:
            # x + y >= 1
            out.append((2 * b, 2 * a + 1, -ONE, strict))
            out.append((2 * a, 2 * b + 1, -ONE, strict))
    else:
        a, q = atom.a, atom.q
        if rel in (Rel.LE, Rel.LT):
            out.append((2 * a + 1, 2 * a, 2 * q, strict))
        else:
            out.append((2 * a, 2 * a + 1, -2 * q, strict))


def feasible(atoms: list[LinearAtom], var_count: Optional[int] = None) -> SolveResult:
    """Decide the system exactly; strict inequalities are honoured.

    Returns a witness assignment (indexed by variable) when satisfiable; the
    witness is re-verified against every atom before being reported.
    """
    for atom in atoms:
        if atom.kind == "const" and atom.q is None:
            return SolveResult(False)
    if var_count is None:
        var_count = 0
        for atom in atoms:
            var_count = max(var_count, atom.a + 1)
            if atom.b is not None:
                var_count = max(var_count, atom.b + 1)
    if var_count == 0:
        return SolveResult(True, [])

    edges: list = []
    for i in range(var_count):
        edges.append((2 * i, 2 * i + 1, ZERO, False))  # x >= 0
        edges.append((2 * i + 1, 2 * i, Fraction(2), False))  # x <= 1
    for atom in atoms:
        _edges_for(atom, edges)

    # Scale weights to integers (lcm of the denominators) so the relaxation
    # loop runs on machine integers instead of Fraction objects.
    scale = 1
    for _u, _v, w, _s in edges:
        d = w.denominator
        if d != 1:
            g = _gcd(scale, d)
            scale = scale // g * d
    int_edges = [
        (u, v, int(w * scale), 1 if s else 0) for u, v, w, s in edges
    ]

    n = 2 * var_count
    # Bellman-Ford from an implicit source with 0-edges to every node;
    # distances are (weight, strict-count) pairs under the order
    # "smaller weight first, more strict edges first on ties".
    dist_q = [0] * n
    dist_s = [0] * n
    changed = True
    for _ in range(n + 1):
        changed = False
        for u, v, w, s in int_edges:
            cq = dist_q[u] + w
            cs = dist_s[u] + s
            dq = dist_q[v]
            if cq < dq or (cq == dq and cs > dist_s[v]):
                dist_q[v] = cq
                dist_s[v] = cs
                changed = True
        if not changed:
            break
    if changed:
        return SolveResult(False)  # still relaxing after n passes: negative cycle

    # Concrete value for the infinitesimal: small enough that every edge with
    # positive scaled slack survives the strict-count correction.
    eps_num, eps_den = 1, 1  # eps as a fraction of 1/scale units
    for u, v, w, s in int_edges:
        slack = dist_q[u] + w - dist_q[v]  # >= 0 after convergence
        drop = dist_s[v] - dist_s[u]
        if drop < 0 and slack * eps_den < eps_num * (-drop):
            eps_num, eps_den = slack, -drop
    eps = Fraction(eps_num, 2 * eps_den * scale)
    if eps <= 0:
        return SolveResult(False)

    values = []
    for i in range(var_count):
        plus = Fraction(dist_q[2 * i], scale) - dist_s[2 * i] * eps
        minus = Fraction(dist_q[2 * i + 1], scale) - dist_s[2 * i + 1] * eps
        values.append((plus - minus) / 2)

    for i, x in enumerate(values):
        assert ZERO <= x <= ONE, f"witness x{i}={x} out of range"
    for atom in atoms:
        assert check_atom(atom, values), f"witness violates {atom}"
    return SolveResult(True, values)


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def check_atom(atom: LinearAtom, values: list[Fraction]) -> bool:
    if atom.kind == "diff":
        return atom.rel.holds(values[atom.a], values[atom.b])
    if atom.kind == "sum":
        return atom.rel.holds(values[atom.a], ONE - values[atom.b])
    if atom.q is None:
        return False
    return atom.rel.holds(values[atom.a], atom.q)


# --- side conditions -----------------------------------------------------------


@dataclass
class SideConditions:
    """Disjunctive closure conditions, one entry per disjunction.

    Each disjunction is a list of alternative atom lists; an admissible
    resolution picks one alternative from every disjunction.
    """

    disjunctions: list[list[list[LinearAtom]]]

    def resolution_count(self) -> int:
        n = 1
        for d in self.disjunctions:
            n *= max(len(d), 1)
        return n


def _sym_expr(b: Branch, t: Term):
    if isinstance(t, ZeroSym):
        return ("const", ZERO)
    if isinstance(t, OneSym):
        return ("const", ONE)
    return ("var", b.var_of(t))


def _pin(b: Branch, t: Term, q: Fraction) -> Optional[list[LinearAtom]]:
    """Atoms for x_t = q, or None when t is a constant symbol with value != q."""
    kind, payload = _sym_expr(b, t)
    if kind == "const":
        return [] if payload == q else None
    return [
        LinearAtom("const", payload, Rel.LE, q=q),
        LinearAtom("const", payload, Rel.GE, q=q),
    ]


def _partner_atoms(b: Branch, s: Term, t: Term) -> Optional[list[LinearAtom]]:
    """Atoms for x_s = 1 - x_t (None when contradictory on constants)."""
    ks, vs = _sym_expr(b, s)
    kt, vt = _sym_expr(b, t)
    if ks == "const" and kt == "const":
        return [] if vs == ONE - vt else None
    if ks == "const":
        return _pin(b, t, ONE - vs)
    if kt == "const":
        return _pin(b, s, ONE - vt)
    if vs == vt:
        return _pin(b, s, HALF)
    return [LinearAtom("sum", vs, Rel.LE, b=vt), LinearAtom("sum", vs, Rel.GE, b=vt)]


def _outside_disjunction(
    branch: Branch, lo: TSym, hi: TSym, candidate
) -> Optional[list[list[LinearAtom]]]:
    """Disjunction keeping a candidate value out of the pair's open interval:
    candidate <= lo or candidate >= hi.  The candidate is a term or
    (term, complemented) or a constant; None when trivially outside."""
    vl, vh = branch.var_of(lo), branch.var_of(hi)
    if isinstance(candidate, Fraction):
        if candidate == ZERO or candidate == ONE:
            return None  # never strictly inside: bounds
        below = [LinearAtom("const", vl, Rel.GE, q=candidate)]
        above = [LinearAtom("const", vh, Rel.LE, q=candidate)]
        return [below, above]
    term, complemented = candidate
    kind, payload = _sym_expr(branch, term)
    if kind == "const":
        value = ONE - payload if complemented else payload
        return _outside_disjunction(branch, lo, hi, value)
    if complemented:
        # 1 - x <= lo  <=>  x >= 1 - lo ; 1 - x >= hi  <=>  x <= 1 - hi
        below = [LinearAtom("sum", payload, Rel.GE, b=vl)]
        above = [LinearAtom("sum", payload, Rel.LE, b=vh)]
        return [below, above]
    if payload in (vl, vh):
        return None  # an endpoint is never strictly inside its own pair
    below = [LinearAtom("diff", payload, Rel.LE, b=vl)]
    above = [LinearAtom("diff", vh, Rel.LE, b=payload)]
    return [below, above]


def build_side_conditions(
    branch: Branch, crisp: bool = False, betweenness: str = "adjacent"
) -> SideConditions:
    """Closure conditions for every label registry on the branch.

    The default ``adjacent`` scope demands that no registry symbol's value,
    no such value's complement, and none of the anchors 0, 1/2, 1 falls
    strictly inside a matched pair's open interval; extraction then keeps
    every pair adjacent in the countermodel's admissible-value set, which
    is what the rounding semantics of the rules needs, and every honestly
    realisable branch stays open because those values all live in the
    realising model's own admissible set.

    The ``all`` and ``lower`` scopes implement the two readings of the
    published conditions instead: (a) a registry that is exactly one
    matched pair is pinned to {0,1/2} or {1/2,1}; (b) a registry of three
    or more symbols needs every member complement-paired with a member and
    the anchors all taken by members; (c) no symbol (``all``) or no lower
    symbol (``lower``) strictly inside a pair.  Crisp mode adds x in {0,1}
    for every relational term.
    """
    disjunctions: list[list[list[LinearAtom]]] = []
    for label in branch.labels:
        registry = branch.registry(label)
        if not registry:
            continue
        pairs = branch.matched_pairs(label)
        if betweenness == "adjacent":
            candidates = [(s, False) for s in registry]
            candidates += [(s, True) for s in registry]
            candidates.append(HALF)
            for lo, hi in pairs:
                for cand in candidates:
                    disj = _outside_disjunction(branch, lo, hi, cand)
                    if disj is not None:
                        disjunctions.append(disj)
            continue
        only_pair = (
            len(registry) == 2
            and len(pairs) == 1
            and set(registry) == {pairs[0][0], pairs[0][1]}
        )
        if only_pair:
            lo, hi = pairs[0]
            low_case = _pin(branch, lo, ZERO) + _pin(branch, hi, HALF)
            high_case = _pin(branch, lo, HALF) + _pin(branch, hi, ONE)
            disjunctions.append([low_case, high_case])
        elif len(registry) >= 3:
            for s in registry:
                alts = []
                for t in registry:
                    atoms = _partner_atoms(branch, s, t)
                    if atoms is not None:
                        alts.append(atoms)
                disjunctions.append(alts)
            for anchor in (ZERO, HALF, ONE):
                alts = []
                for s in registry:
                    atoms = _pin(branch, s, anchor)
                    if atoms is not None:
                        alts.append(atoms)
                disjunctions.append(alts)
        syms = branch.tsyms.get(label, [])
        for lo, hi in pairs:
            for other in syms:
                if other.index == lo.index:
                    continue
                if betweenness == "lower" and other.kind != "lo":
                    continue
                vo = branch.var_of(other)
                below = LinearAtom("diff", vo, Rel.LE, b=branch.var_of(lo))
                above = LinearAtom("diff", branch.var_of(hi), Rel.LE, b=vo)
                disjunctions.append([[below], [above]])
    if crisp:
        for disj in crisp_conditions(branch).disjunctions:
            disjunctions.append(disj)
    return SideConditions(disjunctions)


def crisp_conditions(branch: Branch) -> SideConditions:
    """Extra disjunctions forcing every relational term to 0 or 1."""
    disjunctions = []
    for rho in branch.relterms:
        v = branch.var_of(rho)
        disjunctions.append(
            [
                [
                    LinearAtom("const", v, Rel.LE, q=ZERO),
                ],
                [
                    LinearAtom("const", v, Rel.GE, q=ONE),
                ],
            ]
        )
    return SideConditions(disjunctions)


def translate(branch: Branch, crisp: bool = False, betweenness: str = "adjacent"):
    """The branch's raw atom system plus its side conditions."""
    return list(branch.atoms), build_side_conditions(branch, crisp, betweenness)


@dataclass
class Closed:
    pass


@dataclass
class Open:
    values: Optional[dict]  # Term or LabelledFormula -> Fraction

    @property
    def exhibited(self) -> bool:
        return self.values is not None


def _solution_map(branch: Branch, assignment: list[Fraction]) -> dict:
    out = {}
    for key, idx in branch.varmap.items():
        out[key] = assignment[idx] if idx < len(assignment) else ZERO
    return out


def resolve_scope(betweenness: str, crisp: bool) -> str:
    """The closure verdict's no-betweenness scope.

    "auto" picks the adjacency conditions for fuzzy frames and, for the
    crisp extension, the published conditions with the broad reading (the
    adjacency conditions alone admit solutions no crisp model realises).
    """
    if betweenness == "auto":
        return "all" if crisp else "adjacent"
    return betweenness


def _search_resolutions(branch: Branch, conditions: SideConditions, on_witness):
    """Depth-first resolution of the disjunctions with feasibility pruning;
    calls ``on_witness`` on each completed satisfiable resolution until it
    returns a value.  Returns (result, saw_satisfiable)."""
    base = list(branch.atoms)
    var_count = len(branch.varnames)
    order = sorted(
        range(len(conditions.disjunctions)),
        key=lambda i: (len(conditions.disjunctions[i]), i),
    )
    disjunctions = [conditions.disjunctions[i] for i in order]
    saw_sat = False

    def search(level: int, atoms: list[LinearAtom]):
        nonlocal saw_sat
        if level == len(disjunctions):
            result = feasible(atoms, var_count)
            if not result.sat:  # pragma: no cover - pruned earlier
                return None
            saw_sat = True
            return on_witness(_solution_map(branch, result.assignment))
        for alt in disjunctions[level]:
            extended = atoms + [a for a in alt if a not in atoms]
            if not feasible(extended, var_count).sat:
                continue
            found = search(level + 1, extended)
            if found is not None:
                return found
        return None

    if not feasible(base, var_count).sat:
        return None, False
    return search(0, base), saw_sat


def close_check(
    branch: Branch,
    crisp: bool = False,
    betweenness: str = "auto",
    witness_filter=None,
):
    """Closed iff no solution of the branch system survives the side
    conditions; Open carries one witness solution otherwise.

    The disjunctions are resolved depth-first in deterministic order with a
    feasibility check at every choice point.  Witness candidates satisfying
    the published anchor conditions are tried first (they give the familiar
    {0,1/2,1}-style countermodels); ``witness_filter`` may reject candidate
    solutions, and an Open verdict whose every candidate was rejected is
    returned with ``values=None``.
    """
    if branch.trivially_false:
        return Closed()
    scope = resolve_scope(betweenness, crisp)

    def accept(values):
        if witness_filter is None or witness_filter(values):
            return values
        return None

    if scope == "adjacent":
        # canonical witnesses first: published conditions, broad reading
        canonical = build_side_conditions(branch, crisp, "all")
        found, _sat = _search_resolutions(branch, canonical, accept)
        if found is not None:
            return Open(found)
    conditions = build_side_conditions(branch, crisp, scope)
    found, saw_sat = _search_resolutions(branch, conditions, accept)
    if found is not None:
        return Open(found)
    if saw_sat:
        return Open(None)
    return Closed()
