"""
Conversions between marginal and covariate-partial correlations of two outcomes

For one covariate x the partial correlation is

    rho_{01|x} = (rho_01 - rho_0x rho_1x) / sqrt((1 - rho_0x^2)(1 - rho_1x^2))
"""

import logging
from typing import List, Mapping, Sequence, Tuple, Union

import numpy as np

from src.core.errors import InvalidConfig, OutOfRange
from src.data.frame import TrialFrame
from src.data.rho import RhoSpec

logger = logging.getLogger(__name__)

Correlations = Union[float, Sequence[float]]


def _single_covariate(value: Correlations, name: str) -> float:
    array = np.atleast_1d(np.asarray(value, dtype=float))
    if array.shape != (1,):
        raise OutOfRange(
            f"{name} must hold exactly one covariate correlation, got {array.shape[0]}"
        )
    corr = float(array[0])
    if not -1.0 < corr < 1.0:
        raise OutOfRange(f"{name} must lie in (-1, 1), got {corr}")
    return corr


def _residual_scales(
    rho_y0x: Correlations, rho_y1x: Correlations
) -> Tuple[float, float, float]:
    r0 = _single_covariate(rho_y0x, "rho_y0x")
    r1 = _single_covariate(rho_y1x, "rho_y1x")
    return r0, r1, float(np.sqrt((1.0 - r0**2) * (1.0 - r1**2)))


def rho_partial_from_marginal(
    rho_marginal: float, rho_y0x: Correlations, rho_y1x: Correlations
) -> float:
    """
    Partial correlation of two outcomes given one covariate

    Args:
        rho_marginal: Corr(Y(a), Y(b))
        rho_y0x: Corr(Y(a), X), length-1 vector or scalar
        rho_y1x: Corr(Y(b), X), length-1 vector or scalar

    Raises:
        OutOfRange: an input is outside (-1, 1), or the three correlations are
            jointly inconsistent so the result leaves [-1, 1]
    """
    if not -1.0 < rho_marginal < 1.0:
        raise OutOfRange(f"rho_marginal must lie in (-1, 1), got {rho_marginal}")
    r0, r1, scale = _residual_scales(rho_y0x, rho_y1x)
    partial = (rho_marginal - r0 * r1) / scale
    if not -1.0 <= partial <= 1.0:
        raise OutOfRange(
            f"Correlations ({rho_marginal}, {r0}, {r1}) are inconsistent: "
            f"partial correlation {partial:.4f} is outside [-1, 1]"
        )
    return float(partial)


def rho_marginal_from_partial(
    rho_partial: float, rho_y0x: Correlations, rho_y1x: Correlations
) -> float:
    """Inverse of rho_partial_from_marginal"""
    if not -1.0 <= rho_partial <= 1.0:
        raise OutOfRange(f"rho_partial must lie in [-1, 1], got {rho_partial}")
    r0, r1, scale = _residual_scales(rho_y0x, rho_y1x)
    return float(rho_partial * scale + r0 * r1)


def rho_spec_from_marginal(
    marginal: Mapping[Tuple[int, int], float],
    rho_outcome_x: Sequence[float],
) -> RhoSpec:
    """
    Build a RhoSpec from marginal pairwise correlations

    Args:
        marginal: {(a, b): Corr(Y(a), Y(b))}; absent pairs convert from 0
        rho_outcome_x: Corr(Y(a), X) for every arm a, in arm order

    Returns:
        RhoSpec on the partial scale
    """
    n_arms = len(rho_outcome_x)
    pairs = {}
    for a in range(n_arms):
        for b in range(a + 1, n_arms):
            value = marginal.get((a, b), marginal.get((b, a), 0.0))
            pairs[(a, b)] = rho_partial_from_marginal(
                value, rho_outcome_x[a], rho_outcome_x[b]
            )
    logger.info(f"Converted marginal correlations to partial: {pairs}")
    return RhoSpec(n_arms, pairs)


def outcome_covariate_correlations(frame: TrialFrame) -> List[float]:
    """
    Corr(Y(a), X) per arm, estimated on arm a's units with X observed

    Only defined for a single covariate.
    """
    if frame.k != 1:
        raise InvalidConfig(
            "Marginal-scale rho needs exactly one covariate, "
            f"the frame has {frame.k}"
        )
    x = frame.covariates[:, 0]
    correlations = []
    for a in range(frame.n_arms):
        rows = (frame.arm == a) & ~np.isnan(x)
        if rows.sum() < 3:
            raise InvalidConfig(
                f"Arm '{frame.arm_labels[a]}' has too few complete rows to "
                "estimate Corr(Y, X)"
            )
        correlations.append(float(np.corrcoef(frame.y_obs[rows], x[rows])[0, 1]))
    return correlations


def rho_spec_to_partial(marginal: RhoSpec, frame: TrialFrame) -> RhoSpec:
    """Read a RhoSpec as marginal correlations and convert it using the frame"""
    return rho_spec_from_marginal(
        marginal.pairs, outcome_covariate_correlations(frame)
    )
