"""
Rubin's rules for combining m complete-data analyses
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence

import numpy as np
from scipy import stats

from src.core.errors import InvalidConfig, OutOfRange

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PooledEstimate:
    """
    Combined inference from m imputations

    Attributes:
        estimate: Q-bar, mean of the complete-data estimates
        within: U-bar, mean complete-data variance
        between: B, variance of the estimates across imputations
        total: T = U-bar + (1 + 1/m) B
        df: Degrees of freedom of the reference t distribution (inf for normal)
        lower, upper: Confidence interval bounds
    """

    estimate: float
    within: float
    between: float
    total: float
    df: float
    m: int
    lower: float
    upper: float
    level: float = 0.95

    @property
    def se(self) -> float:
        return float(np.sqrt(self.total))

    @property
    def missing_information(self) -> float:
        """Share of the total variance due to imputation, (1 + 1/m) B / T"""
        if self.total == 0:
            return 0.0
        return (1.0 + 1.0 / self.m) * self.between / self.total

    def covers(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    def to_dict(self) -> Dict[str, Any]:
        return {
            "estimate": self.estimate,
            "within": self.within,
            "between": self.between,
            "total": self.total,
            "df": self.df,
            "m": self.m,
            "lower": self.lower,
            "upper": self.upper,
        }


def barnard_rubin_df(
    m: int, within: float, between: float, complete_df: Optional[float] = None
) -> float:
    """
    Small-sample degrees of freedom

    Without complete_df this is the large-sample (m - 1) / lambda^2.
    """
    total = within + (1.0 + 1.0 / m) * between
    if total == 0:
        return float("inf")
    lam = (1.0 + 1.0 / m) * between / total
    old = float("inf") if lam == 0 else (m - 1) / lam**2
    if complete_df is None or not np.isfinite(complete_df):
        return old
    observed = (complete_df + 1.0) / (complete_df + 3.0) * complete_df * (1.0 - lam)
    if observed <= 0:
        return old
    return 1.0 / (1.0 / old + 1.0 / observed)


def rubin_pool(
    estimates: Sequence[float],
    variances: Sequence[float],
    complete_df: Optional[float] = None,
    level: float = 0.95,
) -> PooledEstimate:
    """
    Pool m point estimates and their complete-data variances

    Args:
        estimates: One estimate per imputation
        variances: The matching complete-data sampling variances
        complete_df: Degrees of freedom of the complete-data analysis, if known
        level: Confidence level of the interval

    Returns:
        PooledEstimate with a t-based interval

    Example:
        >>> rubin_pool([0.0, 2.0], [1.0, 1.0]).total
        4.0
    """
    q = np.asarray(estimates, dtype=float)
    u = np.asarray(variances, dtype=float)
    m = len(q)
    if m < 2:
        raise InvalidConfig(f"Pooling needs at least 2 imputations, got {m}")
    if len(u) != m:
        raise InvalidConfig(f"{m} estimates but {len(u)} variances")
    if (u < 0).any():
        raise OutOfRange("Complete-data variances must be non-negative")

    q_bar = float(q.mean())
    u_bar = float(u.mean())
    b = float(q.var(ddof=1))
    t = u_bar + (1.0 + 1.0 / m) * b
    df = barnard_rubin_df(m, u_bar, b, complete_df)

    if np.isfinite(df):
        crit = float(stats.t.ppf(0.5 + level / 2.0, df))
    else:
        crit = float(stats.norm.ppf(0.5 + level / 2.0))
    half = crit * np.sqrt(t)
    return PooledEstimate(
        estimate=q_bar,
        within=u_bar,
        between=b,
        total=t,
        df=df,
        m=m,
        lower=q_bar - half,
        upper=q_bar + half,
        level=level,
    )
