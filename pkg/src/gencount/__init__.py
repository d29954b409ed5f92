"""Generalized counting processes, Skellam variants and time-changed versions.

Exact distributions, moment formulas and governing-equation residuals for
the multi-amplitude counting process, its fractional (inverse-stable clock)
variant, the two-sided Skellam versions, and the subordinator time changes,
all cross-checked against independent Monte Carlo and brute-force oracles.
"""

from ._backend import BACKEND as kernel_backend
from .errors import (
    BudgetExceeded,
    DegenerateColumn,
    DomainError,
    NonConvergence,
    RejectionBudgetExceeded,
    StabilityError,
    TruncationWarning,
    Unsupported,
)
from .gcp import RateVector, SamplePath, rates_order_k, rates_polya_aeppli
from .skellam import SkellamRates
from .specfun import SeriesPolicy
from .stats import FitResult, PmfTable, SampleEnsemble
from .subordinators import (
    FirstPassageConfig,
    Gamma,
    InverseGaussian,
    Stable,
    SubordinatorSpec,
    TemperedStable,
)
from .timechange import DerivedConstants, Direction, TimeChangedSpec

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded",
    "DegenerateColumn",
    "DerivedConstants",
    "Direction",
    "DomainError",
    "FirstPassageConfig",
    "FitResult",
    "Gamma",
    "InverseGaussian",
    "NonConvergence",
    "PmfTable",
    "RateVector",
    "RejectionBudgetExceeded",
    "SamplePath",
    "SampleEnsemble",
    "SeriesPolicy",
    "SkellamRates",
    "Stable",
    "StabilityError",
    "SubordinatorSpec",
    "TemperedStable",
    "TimeChangedSpec",
    "TruncationWarning",
    "Unsupported",
    "kernel_backend",
    "rates_order_k",
    "rates_polya_aeppli",
]
