"""Sampling machinery for rule-local soundness checks.

For a rule and a random (model, realisation) pair realising a premise of
that rule, ``some_child_realisable`` searches finite candidate sets for an
extension of the realisation (fresh variable values, bracketing pairs drawn
from adjacent admissible values, witness worlds) that realises every
conclusion of at least one child.  Soundness of the calculus says this must
always succeed.
"""

import itertools
import random
from fractions import Fraction as Fr

from kginv import formula as fm
from kginv.constraints import (
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
)
from kginv.models import HALF, ONE, ZERO, eval_f
from kginv.oracle import random_f_model
from kginv.tableau import RuleInstance, _build_conclusions

GRID = [Fr(0), Fr(1, 4), Fr(1, 2), Fr(3, 4), Fr(1)]

LOWER_RELS = (Rel.GE, Rel.GT)
UPPER_RELS = (Rel.LE, Rel.LT)

_PREMISE_SHAPES = {
    "inv": (fm.Inv, (Rel.LE, Rel.LT, Rel.GE, Rel.GT)),
    "and_lb": (fm.And, LOWER_RELS),
    "and_ub": (fm.And, UPPER_RELS),
    "imp_lb": (fm.Imp, LOWER_RELS),
    "imp_le": (fm.Imp, (Rel.LE,)),
    "imp_lt": (fm.Imp, (Rel.LT,)),
    "box_lb": (fm.Box, LOWER_RELS),
    "box_le": (fm.Box, (Rel.LE,)),
    "box_lt": (fm.Box, (Rel.LT,)),
    "box_eq": (fm.Box, (Rel.EQ,)),
    "dia_ub": (fm.Dia, UPPER_RELS),
    "dia_ge": (fm.Dia, (Rel.GE,)),
    "dia_gt": (fm.Dia, (Rel.GT,)),
    "dia_eq": (fm.Dia, (Rel.EQ,)),
}

ALL_RULES = tuple(_PREMISE_SHAPES)


def _small_formula(rng):
    names = ["p", "q"]
    roll = rng.random()
    if roll < 0.5:
        return fm.Atom(rng.choice(names))
    if roll < 0.7:
        return fm.Inv(fm.Atom(rng.choice(names)))
    if roll < 0.85:
        return fm.And(fm.Atom(rng.choice(names)), fm.Atom(rng.choice(names)))
    return fm.Imp(fm.Atom(rng.choice(names)), fm.Atom(rng.choice(names)))


def sample_premise(rng: random.Random, rule: str):
    """A random (model, world_of, instance, values) realising one premise of
    ``rule``; None when the draw cannot realise it (caller retries)."""
    ctor, rels = _PREMISE_SHAPES[rule]
    model = random_f_model(rng, ["p", "q"], max_worlds=3, denominator=4)
    branch = Branch()
    w = branch.fresh_label()
    world_of = {w: rng.choice(model.worlds)}
    if ctor in (fm.Inv, fm.Box, fm.Dia):
        f = ctor(_small_formula(rng))
    else:
        f = ctor(_small_formula(rng), _small_formula(rng))
    rel = rng.choice(rels)
    value = eval_f(model, world_of[w], f)
    tvar = Var("tv")
    values = {}
    if rel is Rel.EQ:
        values[tvar] = value
    else:
        candidates = [q for q in GRID if rel.holds(value, q)]
        if not candidates:
            return None
        values[tvar] = rng.choice(candidates)
    premise = Constraint(LabelledFormula(w, f), rel, tvar)
    branch.add(premise, "premise", -1)
    relterm = None
    if rule in ("box_eq", "dia_eq"):
        u = branch.fresh_label()
        world_of[u] = rng.choice(model.worlds)
        relterm = RelTerm(w, u)
        values[relterm] = model.acc(world_of[w], world_of[u])
        branch.add(Constraint(relterm, Rel.GE, Const(ZERO)), "premise", -1)
    inst = RuleInstance(rule, 0, premise, relterm)
    children = _build_conclusions(branch, inst)
    return model, world_of, values, children


def _term_value(t, values, world_of, model):
    if isinstance(t, Compl):
        inner = _term_value(t.inner, values, world_of, model)
        return None if inner is None else ONE - inner
    if isinstance(t, Const):
        return t.value
    if isinstance(t, ZeroSym):
        return ZERO
    if isinstance(t, OneSym):
        return ONE
    if isinstance(t, RelTerm):
        if t.src in world_of and t.dst in world_of:
            return model.acc(world_of[t.src], world_of[t.dst])
        return None
    return values.get(t)


def _child_realised(child, model, world_of, values):
    for c in child:
        right = _term_value(c.right, values, world_of, model)
        if right is None:
            return False
        if isinstance(c.left, LabelledFormula):
            if c.left.label not in world_of:
                return False
            left = eval_f(model, world_of[c.left.label], c.left.formula)
        else:
            left = _term_value(c.left, values, world_of, model)
            if left is None:
                return False
        if not c.rel.holds(left, right):
            return False
    return True


def _fresh_symbols(children, values):
    fresh_vars = set()
    fresh_pairs = set()
    fresh_labels = set()
    known = set(values)

    def note(t):
        if isinstance(t, Compl):
            note(t.inner)
        elif isinstance(t, Var) and t not in known:
            fresh_vars.add(t)
        elif isinstance(t, TSym):
            fresh_pairs.add((t.label, t.index))
        elif isinstance(t, RelTerm):
            pass

    for child in children:
        for c in child:
            if isinstance(c.left, LabelledFormula):
                fresh_labels.add(c.left.label)
            else:
                note(c.left)
            note(c.right)
            if isinstance(c.right, RelTerm):
                fresh_labels.add(c.right.dst)
            if isinstance(c.left, RelTerm):
                fresh_labels.add(c.left.dst)
    return fresh_vars, fresh_pairs, fresh_labels


def some_child_realisable(model, world_of, values, children) -> bool:
    fresh_vars, fresh_pairs, fresh_labels = _fresh_symbols(children, values)
    fresh_labels = [l for l in fresh_labels if l not in world_of]
    fresh_vars = sorted(fresh_vars, key=str)
    fresh_pairs = sorted(fresh_pairs)

    world_options = [model.worlds] * len(fresh_labels)
    var_options = [GRID] * len(fresh_vars)

    for child in children:
        for worlds in itertools.product(*world_options):
            wmap = dict(world_of)
            wmap.update(zip(fresh_labels, worlds))
            # bracketing pairs range over adjacent admissible values at the
            # pair's own label
            pair_opts = []
            for label, _index in fresh_pairs:
                ts = sorted(model.tset(wmap[label]))
                pair_opts.append(list(zip(ts, ts[1:])))
            for pairs in itertools.product(*pair_opts):
                vmap = dict(values)
                for (label, index), (lo_v, hi_v) in zip(fresh_pairs, pairs):
                    vmap[TSym("lo", label, index)] = lo_v
                    vmap[TSym("hi", label, index)] = hi_v
                for var_vals in itertools.product(*var_options):
                    vmap2 = dict(vmap)
                    vmap2.update(zip(fresh_vars, var_vals))
                    if _child_realised(child, model, wmap, vmap2):
                        return True
    return False


def run_rule_soundness(rule: str, samples: int, seed: int = 0) -> int:
    """Sample ``samples`` premise-realising pairs for ``rule`` and assert the
    soundness property on each; returns the number of samples checked."""
    rng = random.Random(seed)
    checked = 0
    attempts = 0
    while checked < samples:
        attempts += 1
        assert attempts < 80 * samples, f"cannot realise premises of {rule}"
        drawn = sample_premise(rng, rule)
        if drawn is None:
            continue
        model, world_of, values, children = drawn
        assert some_child_realisable(model, world_of, values, children), (
            f"no realisable child for {rule} "
            f"(model {model}, worlds {world_of}, values {values})"
        )
        checked += 1
    return checked
