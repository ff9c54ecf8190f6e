"""Decompositions of a group gap into direct and indirect (mediated) parts.

Oaxaca-Blinder and inverse-probability-weighted mediation decompositions,
with bootstrap inference, plus mean-difference, OLS and double-lasso
estimators for randomized interventions.
"""
__version__ = "0.1.0"

from .data import Dataset, RoleMap, complete_cases, load_csv, load_roles  # noqa: E402
from .errors import (EmptySampleError, GapDecompError, NonConvergenceError,  # noqa: E402
                     SeparationError, SingularMatrixError)
from .ipw import TrimmingPolicy, ipw_mediation  # noqa: E402
from .oaxaca import DecompositionResult, oaxaca_decompose  # noqa: E402

__all__ = [
    "Dataset", "RoleMap", "complete_cases", "load_csv", "load_roles",
    "GapDecompError", "EmptySampleError", "NonConvergenceError",
    "SeparationError", "SingularMatrixError",
    "TrimmingPolicy", "ipw_mediation", "DecompositionResult", "oaxaca_decompose",
]
