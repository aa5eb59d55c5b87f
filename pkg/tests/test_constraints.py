from fractions import Fraction as Fr

from kginv.constraints import (
    CONST1,
    Branch,
    Compl,
    Const,
    Constraint,
    LabelledFormula,
    OneSym,
    Rel,
    RelTerm,
    TSym,
    Var,
    ZeroSym,
    compl,
)
from kginv.formula import parse
from kginv.tableau import initial_branch


def lf(label, text):
    return LabelledFormula(label, parse(text))


def test_fresh_label_on_initial_branch():
    b = initial_branch(parse("p -> p"))
    assert b.labels == ["w0"]
    assert b.fresh_label() == "w1"


def test_fresh_tpair_indices():
    b = Branch()
    w = b.fresh_label()
    lo0, hi0 = b.fresh_tpair(w)
    lo1, hi1 = b.fresh_tpair(w)
    assert (lo0.index, hi0.index) == (0, 0)
    assert (lo1.index, hi1.index) == (1, 1)
    assert lo0.kind == "lo" and hi0.kind == "hi"


def test_fresh_vars_distinct():
    b = Branch()
    assert b.fresh_var() != b.fresh_var()


def test_complement_normalisation():
    c = Var("c")
    assert compl(compl(c)) == c
    assert compl(Const(Fr(1))) == Const(Fr(0))
    assert compl(compl(compl(c))) == compl(c)
    assert isinstance(compl(c), Compl)


def test_registry_from_constraints():
    # the shape of the complete open branch of the worked example
    b = Branch()
    w = b.fresh_label()
    lo, hi = b.fresh_tpair(w)
    w1 = b.fresh_label()
    rho = RelTerm(w, w1)
    b.add(Constraint(lf(w, "[]p -> ~<>~p"), Rel.LT, CONST1), "init", -1)
    b.add(Constraint(lf(w, "[]p"), Rel.EQ, OneSym()), "box_lb", 0)
    b.add(Constraint(Compl(Var("c0")), Rel.LT, hi), "dia_gt", 0)
    b.add(Constraint(rho, Rel.GT, lo), "dia_gt", 0)
    reg = b.registry(w)
    assert set(reg) == {lo, hi, OneSym()}
    assert b.registry(w1) == []
    assert b.matched_pairs(w) == [(lo, hi)]
    assert b.relterms == [rho]


def test_registry_monotone_under_extension():
    b = Branch()
    w = b.fresh_label()
    lo, hi = b.fresh_tpair(w)
    b.add(Constraint(Var("c"), Rel.LT, lo), "x", 0)
    before = set(b.registry(w))
    child = b.clone()
    child.add(Constraint(Var("d"), Rel.LT, hi), "x", 0)
    assert before <= set(child.registry(w))
    # the parent is untouched by the child's extension
    assert set(b.registry(w)) == before


def test_zero_one_membership_requires_equality_pin():
    b = Branch()
    w = b.fresh_label()
    b.add(Constraint(lf(w, "p"), Rel.LT, OneSym()), "x", 0)
    assert b.registry(w) == []  # occurrence in a non-pin constraint: no member
    b.add(Constraint(lf(w, "<>p"), Rel.EQ, ZeroSym()), "x", 0)
    assert b.registry(w) == [ZeroSym()]


def test_duplicate_constraints_ignored():
    b = Branch()
    w = b.fresh_label()
    c = Constraint(lf(w, "p"), Rel.LT, CONST1)
    assert b.add(c, "init", -1)
    assert not b.add(c, "init", -1)
    assert len(b.constraints) == 1


def test_pair_order_atom_joins_system():
    b = Branch()
    w = b.fresh_label()
    lo, hi = b.fresh_tpair(w)
    b.add(Constraint(Var("c"), Rel.LE, lo), "x", 0)
    rendered = [str(a) for a in b.atoms]
    lo_var = b.varmap[lo]
    hi_var = b.varmap[hi]
    assert f"x{lo_var} < x{hi_var}" in rendered


def test_translation_shapes():
    b = Branch()
    w = b.fresh_label()
    b.add(Constraint(lf(w, "p"), Rel.LT, CONST1), "x", 0)
    b.add(Constraint(lf(w, "p"), Rel.GE, Var("c")), "x", 0)
    b.add(Constraint(lf(w, "q"), Rel.LT, compl(Var("c"))), "x", 0)
    kinds = {(a.kind, str(a.rel)) for a in b.atoms}
    assert ("const", "<") in kinds  # x_{w:p} < 1
    assert ("diff", "<=") in kinds  # flipped x_{w:p} >= x_c
    assert ("sum", "<") in kinds  # x_{w:q} < 1 - x_c


def test_trivially_false_constant_comparison():
    b = Branch()
    b.add(Constraint(CONST1, Rel.GT, CONST1), "x", 0)
    assert b.trivially_false


def test_constraint_dump_format():
    w = "w0"
    c = Constraint(lf(w, "[]p -> ~<>~p"), Rel.LT, CONST1)
    assert str(c) == "w0: []p -> ~<>~p < 1"
    rho = Constraint(RelTerm("w0", "w1"), Rel.GT, TSym("lo", "w0", 0))
    assert str(rho) == "w0Rw1 > t0(w0)"
