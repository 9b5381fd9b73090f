"""
Joint normal model of all potential outcomes of a unit

Given one posterior draw (beta*_a, sigma*_a^2) per arm and the analyst's
partial correlations, a unit with covariates x has

    (Y(0), ..., Y(w)) ~ N(M, Sigma)
    M = (beta*_0 x, ..., beta*_w x)
    Sigma[a, a] = sigma*_a^2,  Sigma[a, b] = rho_{ab|X} sigma*_a sigma*_b

Sigma does not depend on x, so it is built and checked once per draw.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.bayes.linear import PosteriorDraw
from src.config import config
from src.core.errors import InvalidConfig, SingularObservedBlock
from src.data.rho import RhoSpec
from src.numerics.linalg import (
    ConditionalParameters,
    SymMatrix,
    cholesky,
    conditional_from_sweep,
)
from src.numerics.sampling import RngStream, draw_mvn, draw_mvn_rows

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class JointOutcomeModel:
    """
    Mean vector(s) and shared covariance of the potential outcomes

    Attributes:
        arm_means: Shape (w+1,) for one unit or (n, w+1) for a block of units
        sigma: (w+1) x (w+1) covariance, PSD-checked
    """

    arm_means: np.ndarray
    sigma: SymMatrix

    @property
    def n_arms(self) -> int:
        return self.sigma.shape[0]

    def conditional(
        self, obs_arm: int, tol: Optional[float] = None
    ) -> ConditionalParameters:
        """
        Regression of the other arms on the observed arm, read off a sweep

        Raises:
            SingularObservedBlock: the observed arm's variance is (numerically) zero
        """
        tol = config.PSD_TOL if tol is None else tol
        if not 0 <= obs_arm < self.n_arms:
            raise InvalidConfig(
                f"Observed arm {obs_arm} outside 0..{self.n_arms - 1}"
            )
        variance = self.sigma[obs_arm, obs_arm]
        if variance <= tol * max(1.0, float(np.max(np.diag(self.sigma)))):
            raise SingularObservedBlock(
                f"Arm {obs_arm} has residual variance {variance:.3g}; "
                "cannot condition on it"
            )
        return conditional_from_sweep(self.sigma, [obs_arm], tol=tol)


def outcome_covariance(
    draw: PosteriorDraw, rho: RhoSpec, tol: Optional[float] = None
) -> SymMatrix:
    """
    Sigma = D R D with D = diag(sigma*) and R the partial-correlation matrix

    Raises:
        InvalidConfig: rho is sized for a different number of arms
        NotPSD: the pairwise correlations are jointly infeasible
    """
    if rho.n_arms != draw.n_arms:
        raise InvalidConfig(
            f"RhoSpec covers {rho.n_arms} arms but the data has {draw.n_arms}"
        )
    correlation = rho.correlation_matrix()
    # An infeasible rho fails here even when some sigma* is zero
    cholesky(correlation, tol=tol)
    scale = draw.sigma
    sigma = correlation * np.outer(scale, scale)
    cholesky(sigma, tol=tol)
    return (sigma + sigma.T) / 2.0


def build_joint_model(
    draw: PosteriorDraw,
    rho: RhoSpec,
    x: np.ndarray,
    sigma: Optional[SymMatrix] = None,
) -> JointOutcomeModel:
    """
    Assemble (M, Sigma) for one unit or a block of units

    Args:
        draw: Posterior draw of every arm's regression
        rho: Cross-arm partial correlations
        x: Completed covariate row (k,) or matrix (n, k)
        sigma: Precomputed outcome_covariance(draw, rho), reused across units

    Raises:
        NotPSD: rho is infeasible
    """
    if sigma is None:
        sigma = outcome_covariance(draw, rho)
    return JointOutcomeModel(arm_means=draw.arm_means(x), sigma=sigma)


def conditional_impute_unit(
    model: JointOutcomeModel, obs_arm: int, y_obs: float, rng: RngStream
) -> np.ndarray:
    """
    Draw the w missing potential outcomes of one unit given its observed one

    Returns:
        Imputed outcomes of the other arms, in arm order (observed arm skipped)

    Raises:
        SingularObservedBlock: sigma*_a^2 of the observed arm is zero
    """
    params = model.conditional(obs_arm)
    mean = params.mean(model.arm_means, np.array([y_obs]))
    return draw_mvn(mean, params.covariance, rng)


def conditional_impute_block(
    model: JointOutcomeModel,
    obs_arm: int,
    y_obs: np.ndarray,
    rng: RngStream,
) -> np.ndarray:
    """
    Batched conditional_impute_unit for units that share the observed arm

    Args:
        model: Joint model with arm_means of shape (n, w+1)
        obs_arm: The arm all n units were observed in
        y_obs: Observed outcomes, length n

    Returns:
        n x (w+1) matrix: observed column copied verbatim, other columns imputed
    """
    params = model.conditional(obs_arm)
    means = np.atleast_2d(model.arm_means)
    observed = np.asarray(y_obs, dtype=float)[:, None]
    completed = np.empty_like(means)
    completed[:, obs_arm] = observed[:, 0]
    if len(params.free):
        completed[:, params.free] = draw_mvn_rows(
            params.mean(means, observed), params.covariance, rng
        )
    return completed


def predict_out_of_sample(
    draw: PosteriorDraw,
    rho: RhoSpec,
    x_new: np.ndarray,
    rng: RngStream,
    sigma: Optional[SymMatrix] = None,
) -> np.ndarray:
    """
    Unconditional joint draw of every arm's outcome for units with no observed arm

    Args:
        x_new: Completed covariates, one row (k,) or a matrix (n, k)

    Returns:
        Shape (w+1,) for one row, (n, w+1) for a matrix
    """
    model = build_joint_model(draw, rho, x_new, sigma)
    if model.arm_means.ndim == 1:
        return draw_mvn(model.arm_means, model.sigma, rng)
    return draw_mvn_rows(model.arm_means, model.sigma, rng)
