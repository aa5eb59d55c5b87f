"""Exception types shared across the package."""


class KGInvError(Exception):
    """Base class for all package errors."""


class ParseError(KGInvError):
    """Malformed formula text; carries the offending position."""

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class SchemaError(KGInvError):
    """A model file does not match the JSON schema; carries the field path."""

    def __init__(self, message, path):
        super().__init__(f"{path}: {message}")
        self.path = path


class ModelValidationError(KGInvError):
    """An F-model violates the legality conditions on its admissible-value sets."""

    def __init__(self, violations):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


class UnknownWorldError(KGInvError):
    """A world identifier is not part of the model."""


class BudgetExceededError(KGInvError):
    """The proof search exceeded its node or time budget (not a verdict)."""

    def __init__(self, message, applications):
        super().__init__(message)
        self.applications = applications


class InternalSoundnessError(KGInvError):
    """An extracted countermodel failed its own realisation check.

    This is never a property of the input; it indicates a bug in the engine
    and aborts the run instead of reporting a wrong verdict.
    """
