"""Maximum likelihood generalized ridge shrinkage."""

from .design import RawDataset, analyze, load_csv
from .exceptions import GRRError
from .shrinkage import PathSpec, ml_components, qm_search
from .trace import build_trace

__version__ = "1.0.0"

__all__ = [
    "GRRError",
    "PathSpec",
    "RawDataset",
    "analyze",
    "build_trace",
    "load_csv",
    "ml_components",
    "qm_search",
]
