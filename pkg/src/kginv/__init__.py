"""Theorem prover and countermodel finder for Goedel modal logic with
involutive negation."""

from .errors import (
    BudgetExceededError,
    InternalSoundnessError,
    KGInvError,
    ModelValidationError,
    ParseError,
    SchemaError,
    UnknownWorldError,
)
from .formula import (
    And,
    Atom,
    Bottom,
    Box,
    Coimp,
    Delta,
    Dia,
    Formula,
    FormulaMetrics,
    Iff,
    Imp,
    Inv,
    Neg,
    Or,
    Top,
    desugar,
    is_core,
    metrics,
    parse,
    render,
    subformulas,
)
from .models import (
    FModel,
    StandardModel,
    eval_f,
    eval_standard,
    lift_standard,
    load_model,
    model_to_dot,
    save_model,
    validate_f,
)
from .oracle import prop_valid_grid, refute_small
from .solver import Closed, Open, SolveResult, close_check, feasible, translate
from .tableau import (
    Realisation,
    Verdict,
    applicable,
    apply,
    check_realisation,
    extract_countermodel,
    is_complete,
    prove,
)

__version__ = "0.1.0"
