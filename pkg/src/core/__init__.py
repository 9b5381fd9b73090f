"""
Core abstractions, types and errors for spcimpute
"""

from .base_imputer import BaseColumnImputer, ColumnImputation
from .errors import SpcError, SpcRuntimeError, SpcValidationError
from .types import OUT_OF_SAMPLE, CovariateMethod, Estimand, IteInterval, RhoScale

__all__ = [
    "BaseColumnImputer",
    "ColumnImputation",
    "SpcError",
    "SpcRuntimeError",
    "SpcValidationError",
    "OUT_OF_SAMPLE",
    "CovariateMethod",
    "Estimand",
    "IteInterval",
    "RhoScale",
]
