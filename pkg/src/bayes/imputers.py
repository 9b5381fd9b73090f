"""
Univariate covariate imputers used inside the FCS loop
"""

from typing import Any, Dict, Optional, Sequence

import numpy as np

from src.core.base_imputer import BaseColumnImputer
from src.core.errors import AllMissing
from src.core.types import CovariateMethod
from src.numerics.sampling import RngStream

from .linear import RANK_TOL, draw_posterior, fit_ols


class NormalLinearImputer(BaseColumnImputer):
    """
    Bayesian normal linear model: draw (beta*, sigma*^2), then predictive draws
    """

    @property
    def method(self) -> CovariateMethod:
        return CovariateMethod.NORMAL

    def _get_default_options(self) -> Dict[str, Any]:
        return {"rank_tol": RANK_TOL}

    def draw(
        self,
        y_observed: np.ndarray,
        x_observed: np.ndarray,
        x_missing: np.ndarray,
        rng: RngStream,
        names: Optional[Sequence[str]] = None,
    ) -> np.ndarray:
        fit = fit_ols(x_observed, y_observed, names, tol=self.options["rank_tol"])
        beta, sigma2 = draw_posterior(fit, rng)
        prediction = x_missing @ beta
        if sigma2 == 0.0:
            return prediction
        return prediction + np.sqrt(sigma2) * rng.standard_normal(len(prediction))


class SampleImputer(BaseColumnImputer):
    """
    Random draw from the column's observed values

    Also the starting fill of every incomplete column before the first cycle.
    """

    @property
    def method(self) -> CovariateMethod:
        return CovariateMethod.SAMPLE

    def _get_default_options(self) -> Dict[str, Any]:
        return {}

    def draw(
        self,
        y_observed: np.ndarray,
        x_observed: np.ndarray,
        x_missing: np.ndarray,
        rng: RngStream,
        names: Optional[Sequence[str]] = None,
    ) -> np.ndarray:
        if len(y_observed) == 0:
            raise AllMissing("No observed values to sample from")
        return rng.choice(np.asarray(y_observed, dtype=float), len(x_missing))


def get_imputer_for_method(
    method: CovariateMethod, options: Optional[Dict[str, Any]] = None
) -> BaseColumnImputer:
    """
    Factory function to get the imputer for a method tag

    Args:
        method: The covariate imputation method
        options: Optional settings for the imputer

    Returns:
        BaseColumnImputer instance for that method
    """
    imputer_map = {
        CovariateMethod.NORMAL: NormalLinearImputer,
        CovariateMethod.SAMPLE: SampleImputer,
    }

    imputer_class = imputer_map.get(CovariateMethod(method))
    if not imputer_class:
        raise ValueError(f"No imputer available for method: {method}")

    return imputer_class(options)
