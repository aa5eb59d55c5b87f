"""Command-line front end.

Subcommands: prove, eval, check-model, parse, oracle prop, oracle refute,
fuzz.  Exit codes for prove: 0 = VALID, 2 = NOT VALID, 1 = error or budget
exceeded.  All numeric output is exact-rational text; reports are
deterministic for a fixed seed.
"""

from __future__ import annotations

import argparse
import random
import sys

from . import formula as fm
from . import oracle
from .errors import BudgetExceededError, KGInvError
from .models import (
    FModel,
    eval_f,
    eval_standard,
    load_model,
    model_to_dot,
    rational_str,
    save_model,
    validate_f,
)
from .tableau import prove

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_VALID = 2

CRISP_BANNER = (
    "note: crisp mode is an experimental extension (side conditions only); "
    "its verdicts are cross-checked empirically, not covered by the core "
    "soundness argument"
)


def _read_formula(text: str) -> str:
    """Inline formula, or @file to read one from disk."""
    if text.startswith("@"):
        with open(text[1:], "r", encoding="utf-8") as fh:
            return fh.read().strip()
    return text


def _add_prove_flags(p: argparse.ArgumentParser):
    p.add_argument("--crisp", action="store_true", help="restrict accessibility to {0,1}")
    p.add_argument(
        "--strategy",
        choices=["full", "on_the_fly"],
        default="full",
        help="search driver (default: full)",
    )
    p.add_argument("--emit-model", metavar="PATH", help="write the countermodel as JSON")
    p.add_argument("--dot", metavar="PATH", help="write the countermodel as GraphViz DOT")
    p.add_argument("--trace", action="store_true", help="print per-branch traces")
    p.add_argument(
        "--dump-lp", action="store_true", help="print the open branch's atom system"
    )
    p.add_argument("--budget-nodes", type=int, default=10**6, metavar="N")
    p.add_argument("--budget-seconds", type=float, default=None, metavar="S")
    p.add_argument(
        "--betweenness",
        choices=["auto", "adjacent", "all", "lower"],
        default="auto",
        help="closure scope barring values from pair interiors (auto = "
        "adjacency conditions on fuzzy frames, published broad reading in "
        "crisp mode; adjacent/all/lower force one reading everywhere)",
    )
    p.add_argument(
        "--threads",
        type=int,
        default=1,
        metavar="N",
        help="reserved concurrency knob; the engine currently always runs "
        "deterministically on one thread",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kginv",
        description="Theorem prover and countermodel finder for Goedel modal "
        "logic with involutive negation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prove", help="decide validity of a formula")
    p.add_argument("formula", help="formula text, or @file")
    _add_prove_flags(p)

    p = sub.add_parser("eval", help="evaluate a formula in a model file")
    p.add_argument("model", help="model JSON path")
    p.add_argument("world")
    p.add_argument("formula", help="formula text, or @file")
    p.add_argument("--override-validation", action="store_true")

    p = sub.add_parser("check-model", help="validate a model file")
    p.add_argument("model", help="model JSON path")

    p = sub.add_parser("parse", help="parse a formula and print it back")
    p.add_argument("formula", help="formula text, or @file")

    p = sub.add_parser("oracle", help="independent ground-truth oracles")
    osub = p.add_subparsers(dest="oracle_command", required=True)
    op = osub.add_parser("prop", help="propositional grid validity")
    op.add_argument("formula", help="formula text, or @file")
    op = osub.add_parser("refute", help="bounded countermodel search")
    op.add_argument("formula", help="formula text, or @file")
    op.add_argument("--max-worlds", type=int, default=2)
    op.add_argument("--denominator", type=int, default=2)
    op.add_argument("--max-t-size", type=int, default=None)
    op.add_argument("--crisp", action="store_true")
    op.add_argument("--emit-model", metavar="PATH")

    p = sub.add_parser("fuzz", help="run the oracle-agreement and soundness suites")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--prop-count", type=int, default=500)
    p.add_argument("--modal-count", type=int, default=200)
    p.add_argument("--threads", type=int, default=1, metavar="N")

    return parser


def _cmd_prove(args) -> int:
    if args.threads < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return EXIT_ERROR
    if args.budget_nodes < 1 or (
        args.budget_seconds is not None and args.budget_seconds <= 0
    ):
        print("error: budgets must be positive", file=sys.stderr)
        return EXIT_ERROR
    text = _read_formula(args.formula)
    phi = fm.parse(text)
    mode = "crisp" if args.crisp else "fuzzy"
    if args.crisp:
        print(CRISP_BANNER)
    verdict = prove(
        phi,
        mode=mode,
        strategy=args.strategy,
        budget_nodes=args.budget_nodes,
        budget_seconds=args.budget_seconds,
        betweenness=args.betweenness,
        trace=args.trace or args.dump_lp,
    )
    if args.trace and verdict.traces:
        for i, tr in enumerate(verdict.traces):
            print(f"--- branch {i + 1}: {tr.status}")
            for line in tr.lines:
                print(line)
    print(f"formula: {fm.render(phi)}")
    print(f"mode: {mode}  strategy: {args.strategy}")
    print(f"rule applications: {verdict.stats.applications}")
    print(f"peak live constraints: {verdict.stats.peak_live_constraints}")
    if verdict.valid:
        print("verdict: VALID")
        return EXIT_OK
    print("verdict: NOT VALID")
    model = verdict.countermodel
    print(f"countermodel witness world: {verdict.witness}")
    value = eval_f(model, verdict.witness, phi)
    print(f"formula value at witness: {rational_str(value)}")
    if args.dump_lp and verdict.open_branch is not None:
        print("--- open branch atom system")
        print(verdict.open_branch.dump_atoms(), end="")
    if args.emit_model:
        save_model(model, args.emit_model)
        print(f"countermodel written to {args.emit_model}")
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(model_to_dot(model))
        print(f"DOT written to {args.dot}")
    return EXIT_NOT_VALID


def _cmd_eval(args) -> int:
    model = load_model(args.model)
    phi = fm.parse(_read_formula(args.formula))
    if isinstance(model, FModel):
        value = eval_f(model, args.world, phi, override=args.override_validation)
    else:
        value = eval_standard(model, args.world, phi)
    print(rational_str(value))
    return EXIT_OK


def _cmd_check_model(args) -> int:
    model = load_model(args.model)
    if isinstance(model, FModel):
        violations = validate_f(model)
    else:
        violations = model.range_violations()
    if violations:
        for v in violations:
            print(v)
        return EXIT_NOT_VALID
    print("ok")
    return EXIT_OK


def _cmd_parse(args) -> int:
    phi = fm.parse(_read_formula(args.formula))
    m = fm.metrics(phi)
    print(fm.render(phi))
    print(f"core: {fm.render(fm.desugar(phi))}")
    print(f"length: {m.length}  modal depth: {m.modal_depth}  atoms: {m.atom_count}")
    return EXIT_OK


def _cmd_oracle(args) -> int:
    phi = fm.parse(_read_formula(args.formula))
    if args.oracle_command == "prop":
        witness = oracle.prop_counterexample(phi)
        if witness is None:
            print("valid")
            return EXIT_OK
        pretty = ", ".join(f"{k}={rational_str(v)}" for k, v in witness.items())
        print(f"not valid ({pretty})" if pretty else "not valid")
        return EXIT_NOT_VALID
    model = oracle.refute_small(
        phi,
        max_worlds=args.max_worlds,
        denominator=args.denominator,
        max_t_size=args.max_t_size,
        crisp=args.crisp,
    )
    if model is None:
        print("none within bounds")
        return EXIT_OK
    print("countermodel found")
    if args.emit_model:
        save_model(model, args.emit_model)
        print(f"countermodel written to {args.emit_model}")
    else:
        save_model(model, sys.stdout)
    return EXIT_NOT_VALID


def run_fuzz(
    seed: int,
    prop_count: int = 500,
    modal_count: int = 200,
    out=None,
    eval_hook=None,
) -> int:
    """Oracle-agreement and verdict-soundness suites; nonzero on any failure.

    ``eval_hook`` replaces the propositional oracle verdict (used by the
    harness self-test that injects a deliberate bug).
    """
    from .models import ONE
    from .tableau import check_realisation

    out = out or sys.stdout
    failures = []
    rng = random.Random(seed)
    agreements = 0
    for _ in range(prop_count):
        phi = oracle.random_formula(rng, max_length=12, atom_pool=3, modal=False)
        expected = (
            eval_hook(phi) if eval_hook is not None else oracle.prop_valid_grid(phi)
        )
        verdict = prove(phi)
        if verdict.valid == expected:
            agreements += 1
        else:
            failures.append(f"prop disagreement: {fm.render(phi)}")
    print(f"{agreements}/{prop_count} propositional agreements", file=out)

    sound = 0
    refuted = 0
    for _ in range(modal_count):
        phi = oracle.random_formula(
            rng, max_length=14, atom_pool=3, modal=True, max_modal_depth=2
        )
        verdict = prove(phi)
        if verdict.valid:
            sound += 1
            continue
        model = verdict.countermodel
        problems = validate_f(model)
        problems += check_realisation(model, verdict.realisation, verdict.open_branch)
        value = eval_f(model, verdict.witness, phi)
        if problems or not value < ONE:
            failures.append(f"unsound countermodel: {fm.render(phi)}")
        else:
            sound += 1
            refuted += 1
    print(
        f"{sound}/{modal_count} modal verdicts sound ({refuted} refuted)",
        file=out,
    )
    for line in failures:
        print(line, file=out)
    print(("FAIL" if failures else "OK"), file=out)
    return EXIT_ERROR if failures else EXIT_OK


def _cmd_fuzz(args) -> int:
    return run_fuzz(args.seed, args.prop_count, args.modal_count)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "prove":
            return _cmd_prove(args)
        if args.command == "eval":
            return _cmd_eval(args)
        if args.command == "check-model":
            return _cmd_check_model(args)
        if args.command == "parse":
            return _cmd_parse(args)
        if args.command == "oracle":
            return _cmd_oracle(args)
        if args.command == "fuzz":
            return _cmd_fuzz(args)
        parser.error(f"unknown command {args.command!r}")
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except KGInvError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
