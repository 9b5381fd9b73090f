"""
Completed-data moments of the potential outcomes and their normal-theory variances
"""

from typing import Dict, Tuple

import numpy as np

from src.core.errors import InvalidConfig
from src.core.types import Estimand
from src.engine.imputer import CompletedDataset, ImputationSet

from .pooling import PooledEstimate, rubin_pool

# (estimate, complete-data sampling variance)
Statistic = Tuple[float, float]


def _mean(values: np.ndarray) -> Statistic:
    n = len(values)
    return float(values.mean()), float(values.var(ddof=1) / n)


def _variance(values: np.ndarray) -> Statistic:
    n = len(values)
    s2 = float(values.var(ddof=1))
    return s2, 2.0 * s2**2 / (n - 1)


def _covariance(x: np.ndarray, y: np.ndarray) -> Statistic:
    n = len(x)
    cov = np.cov(x, y, ddof=1)
    sxx, syy, sxy = cov[0, 0], cov[1, 1], cov[0, 1]
    return float(sxy), float((sxx * syy + sxy**2) / (n - 1))


def completed_data_statistics(
    dataset: CompletedDataset, covariate: int = 0
) -> Dict[Estimand, Statistic]:
    """
    The seven statistics of the average-inference table on one completed dataset

    Computed over in-sample units, for arms 0 and 1 and one covariate column.
    """
    frame = dataset.frame
    if frame.k == 0:
        raise InvalidConfig("Covariate statistics need at least one covariate")
    rows = frame.in_sample
    if rows.sum() < 3:
        raise InvalidConfig("Completed-data statistics need at least 3 units")
    y0 = dataset.outcomes[rows, 0]
    y1 = dataset.outcomes[rows, 1]
    x = dataset.covariates[rows, covariate]
    return {
        Estimand.MEAN_Y0: _mean(y0),
        Estimand.MEAN_Y1: _mean(y1),
        Estimand.VAR_Y0: _variance(y0),
        Estimand.VAR_Y1: _variance(y1),
        Estimand.COV_Y0_Y1: _covariance(y0, y1),
        Estimand.COV_Y0_X: _covariance(y0, x),
        Estimand.COV_Y1_X: _covariance(y1, x),
    }


def pooled_statistics(
    imputations: ImputationSet, covariate: int = 0
) -> Dict[Estimand, PooledEstimate]:
    """completed_data_statistics on every dataset, combined by Rubin's rules"""
    per_dataset = [
        completed_data_statistics(d, covariate) for d in imputations.datasets
    ]
    n = int(imputations.frame.in_sample.sum())
    pooled = {}
    for estimand in Estimand:
        estimates = [s[estimand][0] for s in per_dataset]
        variances = [s[estimand][1] for s in per_dataset]
        pooled[estimand] = rubin_pool(estimates, variances, complete_df=n - 1)
    return pooled
