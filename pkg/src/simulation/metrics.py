"""
Accuracy of individual treatment-effect posteriors against known truth
"""

from dataclasses import dataclass
from typing import Dict

import numpy as np

from src.analysis.effects import ite_posterior
from src.core.errors import MisalignedUnits
from src.core.types import IteInterval
from src.engine.imputer import ImputationSet

from .generator import SimTruth


@dataclass(frozen=True)
class IteMetrics:
    """
    Attributes:
        mean_bias: Mean over units of (posterior-mean tau_i - tau_i)
        variance_of_bias: Variance of that bias over units
        coverage: Share of units whose 95% interval contains tau_i
        mean_distance: Mean over units of |bias_i|
    """

    mean_bias: float
    variance_of_bias: float
    coverage: float
    mean_distance: float
    n_units: int
    coverage_se: float = 0.0
    mean_distance_se: float = 0.0

    def to_dict(self) -> Dict[str, float]:
        return {
            "mean_bias": self.mean_bias,
            "variance_of_bias": self.variance_of_bias,
            "coverage": self.coverage,
            "mean_distance": self.mean_distance,
        }


def ite_metrics(
    imputations: ImputationSet,
    truth: SimTruth,
    interval: IteInterval = IteInterval.PREDICTIVE,
) -> IteMetrics:
    """
    Compare every unit's ITE posterior with its true effect

    Raises:
        MisalignedUnits: truth and imputations do not list the same units in order
    """
    ite = ite_posterior(imputations, interval=interval)
    if len(ite.unit_ids) != truth.n_units or (
        np.asarray(ite.unit_ids) != np.asarray(truth.unit_ids)
    ).any():
        raise MisalignedUnits("Truth and imputations cover different unit ids")

    bias = ite.mean - truth.tau
    covered = ite.covers(truth.tau)
    distance = np.abs(bias)
    n = len(bias)
    coverage = float(covered.mean())
    return IteMetrics(
        mean_bias=float(bias.mean()),
        variance_of_bias=float(bias.var(ddof=1)),
        coverage=coverage,
        mean_distance=float(distance.mean()),
        n_units=n,
        coverage_se=float(np.sqrt(coverage * (1.0 - coverage) / n)),
        mean_distance_se=float(distance.std(ddof=1) / np.sqrt(n)),
    )
