"""Errors raised by grrshrink."""


class GRRError(Exception):
    """Base class for every grrshrink failure."""

    status = "error"


class DataError(GRRError):
    """Raised when a dataset cannot be read or is malformed."""

    status = "bad_data"


class DesignError(GRRError):
    """Raised when a design cannot be standardized or decomposed."""

    status = "bad_design"


class ShrinkageError(GRRError):
    """Raised for invalid shrinkage factors, extents or k values."""

    status = "bad_shrinkage"


class NoSignalError(ShrinkageError):
    """R-squared is zero: the shrinkage terminus is optimal."""

    status = "terminus_optimal"


class PerfectFitError(ShrinkageError):
    """R-squared is one: no error variance is left to estimate."""

    status = "perfect_fit"


class RiskUnavailableError(GRRError):
    """Unbiased relative risk estimates need p <= n - 4."""

    status = "risk_unavailable"


class TraceError(GRRError):
    """Raised when a trace cannot be rendered or written."""

    status = "bad_trace"


class SimulationError(GRRError):
    """Raised when a Monte-Carlo replicate fails."""

    status = "simulation_failed"

    def __init__(self, replicate_index: int, message: str) -> None:
        super().__init__(f"replicate {replicate_index}: {message}")
        self.replicate_index = replicate_index
