"""Exception hierarchy.

Each error carries a stable ``code`` string that the CLI and JSON reports use,
so callers can match on codes instead of Python classes.
"""

from __future__ import annotations


class GleasonCsmError(Exception):
    """Base class for all library errors."""

    code = "ERROR"


class DegenerateInput(GleasonCsmError):
    """Input vectors are rank deficient."""

    code = "DEGENERATE_INPUT"


class DimensionMismatch(GleasonCsmError):
    code = "DIMENSION_MISMATCH"


class EvaluationRange(GleasonCsmError):
    """A frame-function evaluation fell outside [0, 1] beyond tolerance."""

    code = "EVALUATION_RANGE"


class InsufficientSamples(GleasonCsmError):
    code = "INSUFFICIENT_SAMPLES"


class InvalidParams(GleasonCsmError):
    code = "INVALID_PARAMS"


class NoStoredDirection(GleasonCsmError):
    """A tabulated frame function was evaluated too far from every entry."""

    code = "NO_STORED_DIRECTION"


class AtPole(GleasonCsmError):
    code = "AT_POLE"


class AtEquator(GleasonCsmError):
    code = "AT_EQUATOR"


class NotOnDescent(GleasonCsmError):
    code = "NOT_ON_DESCENT"


class ChainTooLong(GleasonCsmError):
    """Raised when a descent chain needs more steps than the caller allowed."""

    code = "CHAIN_TOO_LONG"

    def __init__(self, message: str, required_steps: int | None = None):
        super().__init__(message)
        self.required_steps = required_steps


class MonotonicityViolation(GleasonCsmError):
    """A frame function increased along a descent chain."""

    code = "MONOTONICITY_VIOLATION"

    def __init__(self, message: str, step: int, values: list[float] | None = None):
        super().__init__(message)
        self.step = step
        self.values = values or []


class OffGrid(GleasonCsmError):
    code = "OFF_GRID"


class HypothesesNotMet(GleasonCsmError):
    code = "HYPOTHESES_NOT_MET"

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class PreconditionUnmet(GleasonCsmError):
    code = "PRECONDITION_UNMET"


class ZeroProbabilitySector(GleasonCsmError):
    code = "ZERO_PROBABILITY_SECTOR"


class NotUnitary(GleasonCsmError):
    code = "NOT_UNITARY"
