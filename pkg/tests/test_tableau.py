import random
from fractions import Fraction as Fr

import pytest

from kginv.constraints import (
    CONST1,
    Constraint,
    LabelledFormula,
    OneSym,
    Rel,
    RelTerm,
    Var,
    compl,
)
from kginv.errors import BudgetExceededError
from kginv.formula import parse
from kginv.models import HALF, ONE, ZERO, eval_f, validate_f
from kginv.oracle import random_formula
from kginv.solver import close_check, Open
from kginv.tableau import (
    Realisation,
    applicable,
    apply,
    check_realisation,
    extract_countermodel,
    initial_branch,
    is_complete,
    prove,
)

from helpers import ALL_RULES, run_rule_soundness


def lf(label, text):
    return LabelledFormula(label, parse(text))


def test_initial_branch_has_single_instance():
    b = initial_branch(parse("[]p -> ~<>~p"))
    insts = applicable(b)
    assert [i.rule for i in insts] == ["imp_lt"]


def test_eq_instance_appears_with_relterm():
    b = initial_branch(parse("[]p -> ~<>~p"))
    b.add(Constraint(lf("w0", "[]p"), Rel.EQ, OneSym()), "x", 0)
    assert not any(i.rule == "box_eq" for i in applicable(b))
    b.add(Constraint(RelTerm("w0", "w1"), Rel.GT, Var("c")), "x", 0)
    assert any(i.rule == "box_eq" for i in applicable(b))


def test_completeness_exception_suppresses_the_one_bound():
    b = initial_branch(parse("<>p"))  # w0: <>p < 1
    assert [i.rule for i in applicable(b)] == ["dia_ub"]
    b.add(Constraint(lf("w0", "<>p"), Rel.LT, Var("c")), "x", 0)
    insts = applicable(b)
    # only the constraint with the variable bound is a premise now
    assert len(insts) == 1
    assert insts[0].premise.right == Var("c")


def test_apply_inv():
    b = initial_branch(parse("~<>~p"))
    b2 = apply(b, applicable(b)[0])[0]
    # the mirror of "< 1" with the complement folded on constants
    assert str(b2.constraints[-1]) == "w0: <>~p > 0"
    # with a plain variable bound the complement is kept symbolic
    b3 = initial_branch(parse("p -> p"))
    b3.add(Constraint(lf("w0", "~q"), Rel.LT, Var("c")), "x", 0)
    inst = [i for i in applicable(b3) if i.rule == "inv"][0]
    child = apply(b3, inst)[0]
    assert str(child.constraints[-1]) == "w0: q > 1 - c"


def test_apply_box_lb_children():
    b = initial_branch(parse("p -> p"))
    b.add(Constraint(lf("w0", "[]p"), Rel.GE, Var("c")), "x", 0)
    inst = [i for i in applicable(b) if i.rule == "box_lb"][0]
    left, right = apply(b, inst)
    left_strs = [str(c) for c in left.constraints[-2:]]
    assert left_strs == ["w0: []p = 1*", "1 >= c"]
    right_strs = [str(c) for c in right.constraints[-4:]]
    assert right_strs == [
        "w0: []p = t0(w0)",
        "c <= t0(w0)",
        "w1: p < w0Rw1",
        "w1: p < ts0(w0)",
    ]


def test_apply_dia_gt_child():
    b = initial_branch(parse("p -> p"))
    b.add(Constraint(lf("w0", "<>~p"), Rel.GT, compl(Var("c"))), "x", 0)
    inst = [i for i in applicable(b) if i.rule == "dia_gt"][0]
    (child,) = apply(b, inst)
    strs = [str(c) for c in child.constraints[-3:]]
    assert strs == [
        "1 - c < ts0(w0)",
        "w0Rw1 > t0(w0)",
        "w1: ~p > t0(w0)",
    ]


def test_apply_does_not_mutate_parent():
    b = initial_branch(parse("p & q"))
    n = len(b.constraints)
    apply(b, applicable(b)[0])
    assert len(b.constraints) == n
    assert applicable(b)  # still pending on the parent


def test_instances_not_repeated():
    b = initial_branch(parse("p & q"))
    inst = applicable(b)[0]
    child = apply(b, inst)[0]
    assert inst.key() in child.applied
    assert all(i.key() != inst.key() for i in applicable(child))


def drive_frown_branch():
    """Follow the worked example's open branch through the engine."""
    b = initial_branch(parse("[]p -> ~<>~p"))
    picks = {"imp_lt": 0, "inv": 0, "dia_gt": 0, "box_lb": 0, "box_eq": 1}
    while True:
        insts = applicable(b)
        if not insts:
            return b
        inst = insts[0]
        children = apply(b, inst)
        b = children[picks[inst.rule]]


def test_engine_reproduces_open_branch():
    b = drive_frown_branch()
    assert is_complete(b)
    got = [str(c) for c in b.constraints]
    assert got == [
        "w0: []p -> ~<>~p < 1",
        "w0: ~<>~p < 1",
        "w0: []p >= c0",
        "w0: ~<>~p < c0",
        "w0: <>~p > 1 - c0",
        "1 - c0 < ts0(w0)",
        "w0Rw1 > t0(w0)",
        "w1: ~p > t0(w0)",
        "w1: p < 1 - t0(w0)",
        "w0: []p = 1*",
        "1 >= c0",
        "w1: p < 1*",
        "w1: p >= w0Rw1",
    ]


def test_initial_branch_incomplete():
    assert not is_complete(initial_branch(parse("p -> p")))


def test_extraction_from_driven_branch():
    b = drive_frown_branch()
    result = close_check(b)
    assert isinstance(result, Open)
    model, rl, witness = extract_countermodel(b, result.values)
    assert witness == "w0"
    assert validate_f(model) == []
    assert model.tset("w0") == frozenset((ZERO, HALF, ONE))
    assert check_realisation(model, rl, b) == []
    assert eval_f(model, "w0", parse("[]p -> ~<>~p")) == HALF


def test_tampered_realisation_detected():
    b = drive_frown_branch()
    result = close_check(b)
    model, rl, _ = extract_countermodel(b, result.values)
    pair = b.matched_pairs("w0")[0]
    tampered = Realisation(world_of=dict(rl.world_of), values=dict(rl.values))
    tampered.values[pair[0]] = tampered.values[pair[1]]
    problems = check_realisation(model, tampered, b)
    assert any("not below" in p for p in problems)


def test_tampered_model_detected():
    b = drive_frown_branch()
    result = close_check(b)
    model, rl, _ = extract_countermodel(b, result.values)
    model.val[("p", "w1")] = ONE  # violates w1: p < 1*
    problems = check_realisation(model, rl, b)
    assert any("constraint not realised" in p for p in problems)


# -- prove ---------------------------------------------------------------------


def test_prove_axiom_shape():
    assert prove("p -> p").valid


def test_prove_running_example_countermodel():
    v = prove("[]p -> ~<>~p")
    assert not v.valid
    m = v.countermodel
    assert validate_f(m) == []
    assert eval_f(m, v.witness, parse("[]p")) == ONE
    assert eval_f(m, v.witness, parse("~<>~p")) == HALF
    assert eval_f(m, v.witness, parse("[]p -> ~<>~p")) == HALF


def test_prove_crisp_interdefinability():
    assert prove("[]p <-> ~<>~p", mode="crisp").valid
    v = prove("[]p <-> ~<>~p", mode="fuzzy")
    assert not v.valid
    strict = [q for q in v.countermodel.access.values() if ZERO < q < ONE]
    assert strict


@pytest.mark.parametrize(
    "text,expected",
    [
        ("p -> p", True),
        ("p | ~p", False),
        ("(p -> q) | (q -> p)", True),
        ("#p | ~#p", True),
        ("(p & q) -> p", True),
        ("p -> (p | q)", True),
        ("1", True),
        ("0 -> p", True),
        ("p -> #p", False),
        ("#p -> p", True),
        ("~(p & ~p)", False),
        ("!(p & !p)", True),
        ("[](p & q) <-> ([]p & []q)", True),
        ("<>(p | q) <-> (<>p | <>q)", True),
        ("[]p & <>~p", False),
    ],
)
def test_prove_catalogue(text, expected):
    assert prove(text).valid is expected
    assert prove(text, strategy="on_the_fly").valid is expected


def test_no_relterm_open_branch_gives_single_world():
    v = prove("~[]p")
    assert not v.valid
    assert v.countermodel.worlds == ("w0",)
    assert eval_f(v.countermodel, "w0", parse("[]p")) == ONE


def test_unconstrained_atom_defaults_to_zero():
    v = prove("<>q")
    assert not v.valid
    assert v.countermodel.atom_value("q", "w0") == ZERO


def test_budget_exceeded_is_not_a_verdict():
    with pytest.raises(BudgetExceededError):
        prove("([]p <-> ~<>~p) & ([]q <-> ~<>~q)", budget_nodes=3)


def test_trace_annotations():
    v = prove("[]p -> ~<>~p", trace=True)
    assert v.traces
    open_traces = [t for t in v.traces if t.status == "open"]
    assert len(open_traces) == 1
    lines = open_traces[0].lines
    assert lines[0] == "1. w0: []p -> ~<>~p < 1"
    assert any("(imp_lt:1)" in line for line in lines)


def test_strategy_agreement_random():
    rng = random.Random(42)
    for _ in range(60):
        f = random_formula(rng, max_length=12, atom_pool=2, modal=True)
        assert prove(f).valid == prove(f, strategy="on_the_fly").valid


def test_on_the_fly_reports_live_peak():
    v = prove("[]p -> ~<>~p", strategy="on_the_fly")
    assert not v.valid
    assert 0 < v.stats.peak_live_constraints <= 7**3


def test_verdict_soundness_random_sample():
    rng = random.Random(9)
    for _ in range(40):
        f = random_formula(rng, max_length=12, atom_pool=2, modal=True)
        v = prove(f)
        if not v.valid:
            assert validate_f(v.countermodel) == []
            assert eval_f(v.countermodel, v.witness, f) < ONE
            assert check_realisation(v.countermodel, v.realisation, v.open_branch) == []


@pytest.mark.parametrize("rule", ALL_RULES)
def test_rule_local_soundness_sample(rule):
    assert run_rule_soundness(rule, 60, seed=5) == 60
