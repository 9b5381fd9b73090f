"""
Type definitions and enums for spcimpute
"""

from enum import Enum
from typing import Dict, TypedDict

# Arm code carried by units that were never randomised (prediction targets)
OUT_OF_SAMPLE = -1

# Tokens read as a missing cell in input CSV files
MISSING_TOKENS = ("", "NA")


class CovariateMethod(str, Enum):
    """Univariate imputation method for an incomplete covariate"""

    NORMAL = "norm"  # Bayesian normal linear model
    SAMPLE = "sample"  # Random draw from the observed values


class RhoScale(str, Enum):
    """Scale on which the analyst states the cross-arm correlation"""

    PARTIAL = "partial"  # rho_{Y(a)Y(b)|X}, the canonical form
    MARGINAL = "marginal"  # rho_{Y(a)Y(b)}, converted before imputation


class IteInterval(str, Enum):
    """How the per-unit 95% interval is formed from m effect draws"""

    PREDICTIVE = "predictive"  # mean +/- t_{m-1} sd sqrt(1 + 1/m)
    EMPIRICAL = "empirical"  # central quantiles of the draws


class Estimand(str, Enum):
    """Completed-data statistics of the average-inference table"""

    MEAN_Y0 = "E(y0)"
    MEAN_Y1 = "E(y1)"
    VAR_Y0 = "Var(y0)"
    VAR_Y1 = "Var(y1)"
    COV_Y0_Y1 = "Cov(y0,y1)"
    COV_Y0_X = "Cov(y0,x)"
    COV_Y1_X = "Cov(y1,x)"


class ConfigDict(TypedDict, total=False):
    """Serialised SpcConfig"""

    m: int
    fcs_iterations: int
    seed: int
    rho: Dict[str, float]
    covariate_method: Dict[str, str]
