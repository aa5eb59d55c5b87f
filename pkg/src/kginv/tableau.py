"""The constraint tableau calculus: rules, proof search, countermodels.

Fourteen rules decompose labelled constraints; a branch with no applicable
instance left is complete, and completeness of the calculus lets the solver
decide it: the branch is closed iff its translated system has no solution
under the involution side conditions.  A complete open branch yields a
finite countermodel together with a realisation map witnessing every
constraint, which the caller re-verifies exactly before reporting.

Two search drivers produce identical verdicts: ``full`` is a plain
depth-first worklist over branches; ``on_the_fly`` processes one model
state at a time (equality saturation, then propositional rules, then modal
rules, then children depth-first), retiring each finished state from the
live slice so that peak live-constraint counts stay polynomial in the
formula length.  Verdict extraction always re-checks the entire branch.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from . import formula as fm
from .constraints import (
    CONST0,
    CONST1,
    Branch,
    Compl,
    Constraint,
    LabelledFormula,
    LOWER,
    OneSym,
    Rel,
    RelTerm,
    TSym,
    Term,
    UPPER,
    Var,
    ZeroSym,
    compl,
)
from .errors import BudgetExceededError, InternalSoundnessError
from .models import HALF, ONE, ZERO, FModel, eval_f, validate_f
from .solver import Open, close_check, feasible

PROP_RULES = ("inv", "and_lb", "and_ub", "imp_lb", "imp_le", "imp_lt")
EQ_RULES = ("box_eq", "dia_eq")
WITNESS_RULES = ("box_lb", "box_le", "box_lt", "dia_ub", "dia_ge", "dia_gt")
FRESH_RULES = ("imp_lb", "imp_le", "imp_lt") + WITNESS_RULES

# selection priority: non-branching before branching within the propositional
# rules, propositional before modal, equality saturation before new witnesses
_PRIORITY = {
    "inv": 0,
    "and_lb": 0,
    "imp_lt": 0,
    "and_ub": 1,
    "imp_lb": 1,
    "imp_le": 1,
    "box_eq": 2,
    "dia_eq": 2,
    "box_lt": 3,
    "dia_gt": 3,
    "box_lb": 4,
    "box_le": 4,
    "dia_ub": 4,
    "dia_ge": 4,
}


@dataclass(frozen=True)
class RuleInstance:
    rule: str
    premise_index: int
    premise: Constraint
    relterm: Optional[RelTerm] = None

    def key(self):
        return (self.rule, self.premise, self.relterm)


def _is_one_term(t: Term) -> bool:
    from .constraints import Const

    return isinstance(t, OneSym) or (isinstance(t, Const) and t.value == ONE)


def _is_zero_term(t: Term) -> bool:
    from .constraints import Const

    return isinstance(t, ZeroSym) or (isinstance(t, Const) and t.value == ZERO)


def _rule_name(c: Constraint) -> Optional[str]:
    if not isinstance(c.left, LabelledFormula):
        return None
    f = c.left.formula
    rel = c.rel
    if isinstance(f, fm.Atom):
        return None
    if isinstance(f, fm.Inv):
        return "inv" if rel is not Rel.EQ else None
    if isinstance(f, fm.And):
        if rel in LOWER:
            return "and_lb"
        if rel in UPPER:
            return "and_ub"
        return None
    if isinstance(f, fm.Imp):
        if rel in LOWER:
            return "imp_lb"
        if rel is Rel.LE:
            return "imp_le"
        if rel is Rel.LT:
            return "imp_lt"
        return None
    if isinstance(f, fm.Box):
        if rel in LOWER:
            return "box_lb"
        if rel is Rel.LE:
            return "box_le"
        if rel is Rel.LT:
            return "box_lt"
        return "box_eq"
    if isinstance(f, fm.Dia):
        if rel in UPPER:
            return "dia_ub"
        if rel is Rel.GE:
            return "dia_ge"
        if rel is Rel.GT:
            return "dia_gt"
        return "dia_eq"
    raise TypeError(f"non-core formula reached the tableau: {f!r}")


def _suppressed(branch: Branch, c: Constraint) -> bool:
    """Completeness exception: with both w:f < T and w:f < 1 on the branch the
    rules go to the constraint with T, not 1 (dually for > with 0)."""
    if c.rel is Rel.LT and _is_one_term(c.right):
        return any(
            d.rel is Rel.LT
            and d.left == c.left
            and not _is_one_term(d.right)
            and not _is_zero_term(d.right)
            for d in branch.constraints
        )
    if c.rel is Rel.GT and _is_zero_term(c.right):
        return any(
            d.rel is Rel.GT
            and d.left == c.left
            and not _is_one_term(d.right)
            and not _is_zero_term(d.right)
            for d in branch.constraints
        )
    return False


def _peek_conclusions(inst: RuleInstance) -> Optional[list[list[Constraint]]]:
    """Conclusions of rules that introduce no fresh symbols (None for others)."""
    if inst.rule in FRESH_RULES:
        return None
    return _build_conclusions(None, inst)


def _build_conclusions(
    branch: Optional[Branch], inst: RuleInstance
) -> list[list[Constraint]]:
    c = inst.premise
    lf = c.left
    w = lf.label
    f = lf.formula
    rel = c.rel
    T = c.right
    rule = inst.rule

    def LF(label, g):
        return LabelledFormula(label, g)

    if rule == "inv":
        return [[Constraint(LF(w, f.sub), rel.mirror(), compl(T))]]
    if rule == "and_lb":
        return [
            [Constraint(LF(w, f.left), rel, T), Constraint(LF(w, f.right), rel, T)]
        ]
    if rule == "and_ub":
        return [
            [Constraint(LF(w, f.left), rel, T)],
            [Constraint(LF(w, f.right), rel, T)],
        ]
    if rule == "imp_lb":
        cv = branch.fresh_var()
        return [
            [Constraint(LF(w, f.right), rel, T)],
            [
                Constraint(T, rel.mirror(), CONST1),
                Constraint(LF(w, f.right), Rel.GE, cv),
                Constraint(LF(w, f.left), Rel.LE, cv),
            ],
        ]
    if rule == "imp_le":
        cv = branch.fresh_var()
        return [
            [Constraint(CONST1, Rel.LE, T)],
            [
                Constraint(LF(w, f.right), Rel.LE, T),
                Constraint(LF(w, f.left), Rel.GE, cv),
                Constraint(LF(w, f.right), Rel.LT, cv),
            ],
        ]
    if rule == "imp_lt":
        cv = branch.fresh_var()
        return [
            [
                Constraint(LF(w, f.right), Rel.LT, T),
                Constraint(LF(w, f.left), Rel.GE, cv),
                Constraint(LF(w, f.right), Rel.LT, cv),
            ]
        ]
    if rule == "box_lb":
        u = branch.fresh_label(parent=w)
        lo, hi = branch.fresh_tpair(w)
        return [
            [Constraint(lf, Rel.EQ, OneSym()), Constraint(CONST1, rel, T)],
            [
                Constraint(lf, Rel.EQ, lo),
                Constraint(T, rel.mirror(), lo),
                Constraint(LF(u, f.sub), Rel.LT, RelTerm(w, u)),
                Constraint(LF(u, f.sub), Rel.LT, hi),
            ],
        ]
    if rule == "box_le":
        u = branch.fresh_label(parent=w)
        lo, hi = branch.fresh_tpair(w)
        return [
            [Constraint(CONST1, Rel.LE, T)],
            [
                Constraint(T, Rel.GE, lo),
                Constraint(LF(u, f.sub), Rel.LT, RelTerm(w, u)),
                Constraint(LF(u, f.sub), Rel.LT, hi),
            ],
        ]
    if rule == "box_lt":
        u = branch.fresh_label(parent=w)
        lo, hi = branch.fresh_tpair(w)
        return [
            [
                Constraint(T, Rel.GT, lo),
                Constraint(LF(u, f.sub), Rel.LT, RelTerm(w, u)),
                Constraint(LF(u, f.sub), Rel.LT, hi),
            ]
        ]
    if rule == "dia_ub":
        u = branch.fresh_label(parent=w)
        lo, hi = branch.fresh_tpair(w)
        return [
            [Constraint(lf, Rel.EQ, ZeroSym()), Constraint(T, rel.mirror(), CONST0)],
            [
                Constraint(lf, Rel.EQ, hi),
                Constraint(hi, rel, T),
                Constraint(RelTerm(w, u), Rel.GT, lo),
                Constraint(LF(u, f.sub), Rel.GT, lo),
            ],
        ]
    if rule == "dia_ge":
        u = branch.fresh_label(parent=w)
        lo, hi = branch.fresh_tpair(w)
        return [
            [Constraint(T, Rel.LE, CONST0)],
            [
                Constraint(T, Rel.LE, hi),
                Constraint(RelTerm(w, u), Rel.GT, lo),
                Constraint(LF(u, f.sub), Rel.GT, lo),
            ],
        ]
    if rule == "dia_gt":
        u = branch.fresh_label(parent=w)
        lo, hi = branch.fresh_tpair(w)
        return [
            [
                Constraint(T, Rel.LT, hi),
                Constraint(RelTerm(w, u), Rel.GT, lo),
                Constraint(LF(u, f.sub), Rel.GT, lo),
            ]
        ]
    if rule == "box_eq":
        u = inst.relterm.dst
        return [
            [Constraint(LF(u, f.sub), Rel.GE, T)],
            [
                Constraint(LF(u, f.sub), Rel.LT, T),
                Constraint(LF(u, f.sub), Rel.GE, inst.relterm),
            ],
        ]
    if rule == "dia_eq":
        u = inst.relterm.dst
        return [
            [Constraint(inst.relterm, Rel.LE, T)],
            [
                Constraint(LF(u, f.sub), Rel.LE, T),
                Constraint(inst.relterm, Rel.GT, T),
            ],
        ]
    raise ValueError(f"unknown rule {rule!r}")


def applicable(branch: Branch) -> list[RuleInstance]:
    """Every rule instance whose premise is on the branch, minus instances
    already applied, instances whose conclusions are already present, and
    instances suppressed by the completeness exception."""
    out = []
    for i, c in enumerate(branch.constraints):
        rule = _rule_name(c)
        if rule is None:
            continue
        if _suppressed(branch, c):
            continue
        if rule in EQ_RULES:
            label = c.left.label
            for rho in branch.relterms:
                if rho.src != label:
                    continue
                inst = RuleInstance(rule, i, c, rho)
                if not _saturated(branch, inst):
                    out.append(inst)
        else:
            inst = RuleInstance(rule, i, c)
            if not _saturated(branch, inst):
                out.append(inst)
    out.sort(key=lambda inst: (_PRIORITY[inst.rule], inst.premise_index))
    return out


def _saturated(branch: Branch, inst: RuleInstance) -> bool:
    if inst.key() in branch.applied:
        return True
    peek = _peek_conclusions(inst)
    if peek is None:
        return False
    return any(all(c in branch._cset for c in child) for child in peek)


def apply(branch: Branch, inst: RuleInstance) -> list[Branch]:
    """Children of the branch under one rule instance (one or two).

    The input branch is not modified; fresh symbols are drawn from a shared
    base so sibling children never collide.
    """
    base = branch.clone()
    base.applied.add(inst.key())
    children_constraints = _build_conclusions(base, inst)
    children = []
    for constraints in children_constraints:
        child = base.clone()
        for c in constraints:
            child.add(c, inst.rule, inst.premise_index)
        children.append(child)
    return children


def is_complete(branch: Branch) -> bool:
    return not applicable(branch)


def initial_branch(core: fm.Formula) -> Branch:
    b = Branch()
    w0 = b.fresh_label()
    b.add(Constraint(LabelledFormula(w0, core), Rel.LT, CONST1), "init", -1)
    return b


# --- countermodels -------------------------------------------------------------


@dataclass
class Realisation:
    """Map from labels to worlds and from structures to exact values."""

    world_of: dict[str, str]
    values: dict  # Term | LabelledFormula -> Fraction

    def value(self, t) -> Fraction:
        if isinstance(t, Compl):
            return ONE - self.value(t.inner)
        if isinstance(t, ZeroSym):
            return self.values.get(t, ZERO)
        if isinstance(t, OneSym):
            return self.values.get(t, ONE)
        from .constraints import Const

        if isinstance(t, Const):
            return t.value
        return self.values[t]


def extract_countermodel(
    branch: Branch, solution: dict, crisp: bool = False
) -> tuple[FModel, Realisation, str]:
    """Turn a complete open branch and a closure-check solution into an
    F-model, a realisation and the witness world (the root label).

    Worlds are the branch labels; accessibility comes from the relational
    terms' solution values; T(w) collects the bracketing symbols' values
    plus the anchors; atom values come from the labelled-atom variables,
    defaulting to 0 for atoms the branch never constrained.
    """
    worlds = tuple(branch.labels)
    access = {}
    for rho in branch.relterms:
        q = solution[rho]
        if q != ZERO:
            access[(rho.src, rho.dst)] = q
    tvals = {}
    for w in worlds:
        # complement-closed by construction, so the model is always legal
        vals = {ZERO, HALF, ONE}
        for t in branch.tsyms.get(w, ()):
            vals.add(solution[t])
            vals.add(ONE - solution[t])
        tvals[w] = frozenset(vals)
    val = {}
    for key, q in solution.items():
        if isinstance(key, LabelledFormula) and isinstance(key.formula, fm.Atom):
            if q != ZERO:
                val[(key.formula.name, key.label)] = q
    model = FModel(worlds=worlds, access=access, val=val, crisp=crisp, tvals=tvals)
    realisation = Realisation(world_of={w: w for w in worlds}, values=dict(solution))
    return model, realisation, worlds[0]


def check_realisation(model: FModel, rl: Realisation, branch: Branch) -> list[str]:
    """Violations of the realisation conditions; empty iff the map realises
    the branch exactly.

    Checks: the zero/one symbols map to 0/1; relational terms agree with
    the model's accessibility; every registry value (plus the anchors) lies
    in T at the mapped world with each pair strictly ordered; no registry
    value, complement of one, or anchor falls strictly inside a pair's open
    interval (so each pair brackets two adjacent admissible values); and
    every constraint holds under exact evaluation.
    """
    out = []
    for sym, expected in ((ZeroSym(), ZERO), (OneSym(), ONE)):
        if sym in rl.values and rl.values[sym] != expected:
            out.append(f"{sym} realised as {rl.values[sym]}")
    for rho in branch.relterms:
        got = rl.value(rho)
        actual = model.acc(rl.world_of[rho.src], rl.world_of[rho.dst])
        if got != actual:
            out.append(f"{rho} = {got} but model access is {actual}")
    for label in branch.labels:
        world = rl.world_of.get(label)
        if world is None:
            out.append(f"label {label} not mapped to a world")
            continue
        ts = model.tset(world)
        registry = branch.registry(label)
        reg_vals = [rl.value(t) for t in registry]
        for t, v in zip(registry, reg_vals):
            if v not in ts:
                out.append(f"{t} = {v} not in T({world})")
        for anchor in (ZERO, HALF, ONE):
            if anchor not in ts:
                out.append(f"{anchor} not in T({world})")
        pairs = branch.matched_pairs(label)
        for lo, hi in pairs:
            if not rl.value(lo) < rl.value(hi):
                out.append(f"{lo} = {rl.value(lo)} not below {hi} = {rl.value(hi)}")
        blockers = {ZERO, HALF, ONE}
        for v in reg_vals:
            blockers.add(v)
            blockers.add(ONE - v)
        for lo, hi in pairs:
            for v in sorted(blockers):
                if rl.value(lo) < v < rl.value(hi):
                    out.append(
                        f"value {v} strictly inside ({lo}, {hi}) = "
                        f"({rl.value(lo)}, {rl.value(hi)})"
                    )
    for c in branch.constraints:
        if isinstance(c.left, LabelledFormula):
            world = rl.world_of[c.left.label]
            left_val = eval_f(model, world, c.left.formula, override=True)
        else:
            left_val = rl.value(c.left)
        right_val = rl.value(c.right)
        if not c.rel.holds(left_val, right_val):
            out.append(f"constraint not realised: {c} ({left_val} {c.rel} {right_val})")
    return out


# --- proof search --------------------------------------------------------------


@dataclass
class ProveStats:
    applications: int = 0
    branches_explored: int = 0
    branches_closed: int = 0
    peak_live_constraints: int = 0


@dataclass
class BranchTrace:
    status: str
    lines: list[str] = field(default_factory=list)


@dataclass
class Verdict:
    valid: bool
    countermodel: Optional[FModel] = None
    realisation: Optional[Realisation] = None
    witness: Optional[str] = None
    open_branch: Optional[Branch] = None
    stats: ProveStats = field(default_factory=ProveStats)
    traces: Optional[list[BranchTrace]] = None

    def __bool__(self):
        return self.valid


class _Budget:
    def __init__(self, nodes: int, seconds: Optional[float], stats: ProveStats):
        self.nodes = nodes
        self.deadline = time.monotonic() + seconds if seconds else None
        self.stats = stats

    def spend(self):
        self.stats.applications += 1
        if self.stats.applications > self.nodes:
            raise BudgetExceededError(
                f"rule-application budget of {self.nodes} exceeded",
                self.stats.applications,
            )
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise BudgetExceededError(
                "time budget exceeded", self.stats.applications
            )


def _note_trace(traces, branch: Branch, status: str, want: bool):
    if want:
        traces.append(BranchTrace(status=status, lines=branch.pretty()))


def _witness_filter(branch: Branch, crisp: bool, core: fm.Formula):
    """Accept only solutions whose extracted model demonstrably realises the
    branch and refutes the formula."""

    def ok(values: dict) -> bool:
        model, rl, witness = extract_countermodel(branch, values, crisp=crisp)
        if validate_f(model):
            return False
        if check_realisation(model, rl, branch):
            return False
        return eval_f(model, witness, core) < ONE

    return ok


def _finish_open(branch, result, crisp, traces, want_trace, stats, original):
    model, rl, witness = extract_countermodel(branch, result.values, crisp=crisp)
    problems = validate_f(model)
    if problems:
        raise InternalSoundnessError(
            "extracted countermodel is illegal: " + "; ".join(problems)
        )
    problems = check_realisation(model, rl, branch)
    if problems:
        raise InternalSoundnessError(
            "extracted countermodel fails realisation: " + "; ".join(problems)
        )
    value = eval_f(model, witness, original)
    if not value < ONE:
        raise InternalSoundnessError(
            f"countermodel evaluates the formula to {value}, expected < 1"
        )
    _note_trace(traces, branch, "open", want_trace)
    return Verdict(
        valid=False,
        countermodel=model,
        realisation=rl,
        witness=witness,
        open_branch=branch,
        stats=stats,
        traces=traces if want_trace else None,
    )


def prove(
    phi: Union[str, fm.Formula],
    mode: str = "fuzzy",
    strategy: str = "full",
    budget_nodes: int = 10**6,
    budget_seconds: Optional[float] = None,
    betweenness: str = "auto",
    trace: bool = False,
) -> Verdict:
    """Decide validity of ``phi``; not-valid verdicts carry a verified
    finite countermodel.

    ``mode="crisp"`` restricts accessibility to {0,1} (an experimental
    extension of the calculus realised purely in the solver's side
    conditions).  Both strategies agree on verdicts; ``on_the_fly``
    additionally reports the peak number of live constraints.
    """
    if isinstance(phi, str):
        phi = fm.parse(phi)
    if mode not in ("fuzzy", "crisp"):
        raise ValueError(f"unknown mode {mode!r}")
    if strategy not in ("full", "on_the_fly"):
        raise ValueError(f"unknown strategy {strategy!r}")
    if betweenness not in ("auto", "adjacent", "all", "lower"):
        raise ValueError(f"unknown betweenness scope {betweenness!r}")
    core = fm.desugar(phi)
    crisp = mode == "crisp"
    stats = ProveStats()
    budget = _Budget(budget_nodes, budget_seconds, stats)
    traces: list[BranchTrace] = []
    b0 = initial_branch(core)
    if strategy == "full":
        return _prove_full(b0, core, crisp, betweenness, budget, stats, traces, trace)
    return _prove_otf(b0, core, crisp, betweenness, budget, stats, traces, trace)


def _close_complete(branch, core, crisp, betweenness):
    return close_check(
        branch,
        crisp=crisp,
        betweenness=betweenness,
        witness_filter=_witness_filter(branch, crisp, core),
    )


def _all_closed_verdict(unexhibited: bool, stats, traces, want_trace):
    if unexhibited:
        # an open branch exists (the verdict would be NOT VALID) but no
        # enumerated solution extracted to a realising model; refuse to
        # guess rather than report either verdict wrongly
        raise InternalSoundnessError(
            "open branch without an extractable countermodel"
        )
    return Verdict(valid=True, stats=stats, traces=traces if want_trace else None)


def _prove_full(b0, core, crisp, betweenness, budget, stats, traces, want_trace):
    stack = [b0]
    stats.peak_live_constraints = len(b0.constraints)
    unexhibited = False
    while stack:
        branch = stack.pop()
        insts = applicable(branch)
        if not insts:
            stats.branches_explored += 1
            result = _close_complete(branch, core, crisp, betweenness)
            if isinstance(result, Open):
                if result.exhibited:
                    return _finish_open(
                        branch, result, crisp, traces, want_trace, stats, core
                    )
                unexhibited = True
                _note_trace(traces, branch, "open (no witness)", want_trace)
                continue
            stats.branches_closed += 1
            _note_trace(traces, branch, "closed", want_trace)
            continue
        budget.spend()
        children = apply(branch, insts[0])
        for child in reversed(children):
            stats.peak_live_constraints = max(
                stats.peak_live_constraints, len(child.constraints)
            )
            if child.trivially_false or not feasible(
                child.atoms, len(child.varnames)
            ).sat:
                stats.branches_closed += 1
                _note_trace(traces, child, "closed (early)", want_trace)
            else:
                stack.append(child)
    return _all_closed_verdict(unexhibited, stats, traces, want_trace)


# phases of a state in the on-the-fly driver
_PH_EQ, _PH_PROP, _PH_MODAL, _PH_KIDS = range(4)

_PHASE_RULES = {
    _PH_EQ: EQ_RULES,
    _PH_PROP: PROP_RULES,
    _PH_MODAL: WITNESS_RULES,
}


def _next_instance(branch: Branch, label: str, phase: int) -> Optional[RuleInstance]:
    rules = _PHASE_RULES[phase]
    for inst in applicable(branch):
        if inst.rule not in rules:
            continue
        if phase == _PH_EQ:
            if inst.relterm.dst == label:
                return inst
        elif inst.premise.left.label == label:
            return inst
    return None


def _live_count(branch: Branch, retired: frozenset) -> int:
    """Constraints still owned by an unretired state; a constraint belongs
    to the deepest state it mentions (the initial constraint to the root)."""
    order = {label: i for i, label in enumerate(branch.labels)}
    live = 0
    for c in branch.constraints:
        owner = None
        for t in _constraint_labels(branch, c):
            if owner is None or order[t] > order[owner]:
                owner = t
        if owner is None:
            owner = branch.labels[0]
        if owner not in retired:
            live += 1
    return live


def _constraint_labels(branch: Branch, c: Constraint):
    seen = []
    if isinstance(c.left, LabelledFormula):
        seen.append(c.left.label)
    stack = [c.right] + ([c.left] if isinstance(c.left, Term) else [])
    while stack:
        t = stack.pop()
        if isinstance(t, Compl):
            stack.append(t.inner)
        elif isinstance(t, TSym):
            seen.append(t.label)
        elif isinstance(t, RelTerm):
            seen.append(t.src)
            seen.append(t.dst)
    return seen


def _prove_otf(b0, core, crisp, betweenness, budget, stats, traces, want_trace):
    root = b0.labels[0]
    work = [(b0, [(root, _PH_PROP, 0)], frozenset())]
    stats.peak_live_constraints = len(b0.constraints)
    unexhibited = False
    while work:
        branch, frames, retired = work.pop()
        frames = list(frames)
        while True:
            if not frames:
                assert not applicable(branch), "on-the-fly left work behind"
                stats.branches_explored += 1
                result = _close_complete(branch, core, crisp, betweenness)
                if isinstance(result, Open):
                    if result.exhibited:
                        return _finish_open(
                            branch, result, crisp, traces, want_trace, stats, core
                        )
                    unexhibited = True
                    _note_trace(traces, branch, "open (no witness)", want_trace)
                    break
                stats.branches_closed += 1
                _note_trace(traces, branch, "closed", want_trace)
                break
            label, phase, cursor = frames[-1]
            if phase == _PH_KIDS:
                kids = branch.children_of.get(label, [])
                if cursor < len(kids):
                    frames[-1] = (label, phase, cursor + 1)
                    frames.append((kids[cursor], _PH_EQ, 0))
                    continue
                frames.pop()
                retired = retired | {label}
                continue
            inst = _next_instance(branch, label, phase)
            if inst is None:
                frames[-1] = (label, phase + 1, 0)
                continue
            budget.spend()
            children = apply(branch, inst)
            viable = []
            for child in children:
                live = _live_count(child, retired)
                stats.peak_live_constraints = max(
                    stats.peak_live_constraints, live
                )
                if child.trivially_false or not feasible(
                    child.atoms, len(child.varnames)
                ).sat:
                    stats.branches_closed += 1
                    _note_trace(traces, child, "closed (early)", want_trace)
                else:
                    viable.append(child)
            if not viable:
                break
            if len(viable) == 2:
                work.append((viable[1], list(frames), retired))
            branch = viable[0]
    return _all_closed_verdict(unexhibited, stats, traces, want_trace)
