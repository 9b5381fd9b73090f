"""
Bayesian normal regression and the chained-equation covariate imputer
"""

from .fcs import CovariateFcs, fcs_impute_column
from .imputers import NormalLinearImputer, SampleImputer, get_imputer_for_method
from .linear import (
    OlsFit,
    PosteriorDraw,
    add_intercept,
    draw_arm_posteriors,
    draw_posterior,
    fit_ols,
)

__all__ = [
    "CovariateFcs",
    "fcs_impute_column",
    "NormalLinearImputer",
    "SampleImputer",
    "get_imputer_for_method",
    "OlsFit",
    "PosteriorDraw",
    "add_intercept",
    "draw_arm_posteriors",
    "draw_posterior",
    "fit_ols",
]
