"""Multi-objective evolutionary optimization with Wasserstein-driven parent selection."""

from .errors import ConfigError, DataError, MoeaWstError, ParseError
from .ot import Euclidean, Histogram, emd_lp, wasserstein, wasserstein_1d

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DataError",
    "Euclidean",
    "Histogram",
    "MoeaWstError",
    "ParseError",
    "emd_lp",
    "wasserstein",
    "wasserstein_1d",
]
