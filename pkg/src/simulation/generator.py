"""
Synthetic two-arm trial with known potential outcomes

(Y0, Y1, X) ~ N((0, 1, 2), [[1, .8, .5], [.8, 1, .5], [.5, .5, 1]])

The first half of the units is assigned to arm 0 and the second half to arm 1.
Draws are i.i.d., so the split is as good as random.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.core.errors import OutOfRange
from src.core.types import Estimand
from src.data.frame import TrialFrame
from src.engine.correlation import rho_partial_from_marginal
from src.numerics.sampling import RngStream, draw_mvn_rows

logger = logging.getLogger(__name__)

MEANS = np.array([0.0, 1.0, 2.0])
COVARIANCE = np.array(
    [
        [1.0, 0.8, 0.5],
        [0.8, 1.0, 0.5],
        [0.5, 0.5, 1.0],
    ]
)

# Partial correlation of the potential outcomes given X implied by COVARIANCE
TRUE_PARTIAL_RHO = rho_partial_from_marginal(0.8, 0.5, 0.5)

# Population values of the completed-data statistics
TRUE_STATISTICS = {
    Estimand.MEAN_Y0: 0.0,
    Estimand.MEAN_Y1: 1.0,
    Estimand.VAR_Y0: 1.0,
    Estimand.VAR_Y1: 1.0,
    Estimand.COV_Y0_Y1: 0.8,
    Estimand.COV_Y0_X: 0.5,
    Estimand.COV_Y1_X: 0.5,
}


@dataclass(frozen=True)
class SimTruth:
    """Full potential outcomes of a generated trial"""

    unit_ids: np.ndarray
    y0: np.ndarray
    y1: np.ndarray
    x: np.ndarray

    @property
    def tau(self) -> np.ndarray:
        return self.y1 - self.y0

    @property
    def n_units(self) -> int:
        return len(self.y0)


def generate_trial(n: int, rng: RngStream) -> Tuple[TrialFrame, SimTruth]:
    """
    Draw n units and mask each unit's unassigned outcome

    Args:
        n: Number of units, even
        rng: Stream the trial is drawn from

    Returns:
        (TrialFrame with one observed outcome per unit, SimTruth)
    """
    if n < 2 or n % 2:
        raise OutOfRange(f"n must be a positive even number, got {n}")
    draws = draw_mvn_rows(np.tile(MEANS, (n, 1)), COVARIANCE, rng)
    y0, y1, x = draws[:, 0], draws[:, 1], draws[:, 2]
    arm = np.repeat([0, 1], n // 2)
    unit_ids = np.array([str(i + 1) for i in range(n)], dtype=object)

    frame = TrialFrame(
        unit_ids=unit_ids,
        arm=arm,
        y_obs=np.where(arm == 0, y0, y1),
        covariates=x[:, None],
        covariate_names=("x",),
        arm_labels=("0", "1"),
        treatment_name="arm",
        outcome_name="y",
    )
    truth = SimTruth(unit_ids=frame.unit_ids, y0=y0, y1=y1, x=x)
    logger.debug(f"Generated trial of {n} units from stream {rng.key}")
    return frame, truth
