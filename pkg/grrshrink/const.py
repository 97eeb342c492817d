"""Constants for the grrshrink package."""

try:
    from enum import StrEnum
except ImportError:  # Python < 3.11
    from enum import Enum

    class StrEnum(str, Enum):
        """Backport of enum.StrEnum (Python 3.11)."""

        __str__ = str.__str__
        __format__ = str.__format__

        @staticmethod
        def _generate_next_value_(name, start, count, last_values):
            return name.lower()

DOMAIN = "grrshrink"

DEFAULT_QMIN = -5.0
DEFAULT_QMAX = 5.0
DEFAULT_QSTEP = 0.5
DEFAULT_STEPS_PER_UNIT = 20

# Smallest singular value relative to the largest.
RANK_TOLERANCE = 1e-10

INFERIOR_TOLERANCE = 1e-10

# R-squared this close to one counts as a perfect fit.
PERFECT_FIT_TOLERANCE = 1e-12

CSV_SIGNIFICANT_DIGITS = 12

CHISQ_REFERENCE_LEVEL = 0.99

HALDPORT_RESPONSE = "heat"


class PathKind(StrEnum):
    """Shrinkage path families, keyed by their command-line token."""

    EFFICIENT = "eff"
    QM = "qm"
    HOERL_KENNARD = "hk"
    UNIFORM = "uniform"


class TraceKind(StrEnum):
    """Trace diagnostics that can be plotted."""

    COEF = "coef"
    RMSE = "rmse"
    SPAT = "spat"
    EXEV = "exev"
    INFD = "infd"


TRACE_LABELS = {
    TraceKind.COEF: "Shrunken coefficients",
    TraceKind.RMSE: "Relative MSE",
    TraceKind.SPAT: "Shrinkage factors",
    TraceKind.EXEV: "Excess eigenvalues",
    TraceKind.INFD: "Inferior direction",
}

# Fixed q-Shape for the named two-parameter paths.
FIXED_Q_SHAPES = {
    PathKind.HOERL_KENNARD: 0.0,
    PathKind.UNIFORM: 1.0,
}

RISK_OK = "ok"
RISK_UNAVAILABLE = "risk_unavailable"
