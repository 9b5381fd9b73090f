"""
Bayesian normal linear regression under the Jeffreys prior

    sigma*^2 ~ RSS / chi2_{n-p}
    beta* | sigma*^2 ~ N(beta_hat, sigma*^2 (X'X)^-1)
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import solve_triangular

from src.core.errors import InsufficientArm, RankDeficient
from src.numerics.sampling import RngStream, draw_mvn, draw_scaled_inv_chisq

logger = logging.getLogger(__name__)

# Relative column-pivot size below which a design column counts as collinear
RANK_TOL = 1e-10

# RSS below this fraction of y'y is an exact fit: the posterior collapses onto beta_hat
RSS_EPS = 1e-20


def add_intercept(x: np.ndarray) -> np.ndarray:
    """Prepend a column of ones"""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    return np.column_stack([np.ones(x.shape[0]), x])


@dataclass(frozen=True)
class OlsFit:
    """Least-squares quantities the posterior draws are built from"""

    beta_hat: np.ndarray
    rss: float
    xtx_inv: np.ndarray
    df: int
    y_norm2: float = 0.0
    column_names: Tuple[str, ...] = ()

    @property
    def is_exact(self) -> bool:
        """Residuals vanish (to rounding): no residual variance to draw"""
        return self.rss <= RSS_EPS * max(1.0, self.y_norm2)


def fit_ols(
    x: np.ndarray,
    y: np.ndarray,
    column_names: Optional[Sequence[str]] = None,
    tol: float = RANK_TOL,
) -> OlsFit:
    """
    Ordinary least squares via a thin QR decomposition

    Args:
        x: n x p design matrix (intercept column included by the caller)
        y: Outcome vector of length n
        column_names: Names of the design columns, for error messages
        tol: Collinearity tolerance relative to each column's norm

    Raises:
        InsufficientArm: n < p + 2
        RankDeficient: a column is (numerically) a combination of earlier ones
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = x.shape
    names = tuple(column_names or ())
    if len(names) != p:
        names = tuple(f"x{j}" for j in range(p))
    if n < p + 2:
        raise InsufficientArm(
            f"{n} rows for {p} regression coefficients; need at least {p + 2}"
        )

    q, r = np.linalg.qr(x)
    pivots = np.abs(np.diag(r))
    norms = np.linalg.norm(x, axis=0)
    collinear = pivots <= tol * np.maximum(norms, 1e-300)
    if collinear.any():
        raise RankDeficient(names[int(np.flatnonzero(collinear)[0])])

    beta_hat = solve_triangular(r, q.T @ y)
    r_inv = solve_triangular(r, np.eye(p))
    xtx_inv = r_inv @ r_inv.T
    residuals = y - x @ beta_hat
    return OlsFit(
        beta_hat=beta_hat,
        rss=float(residuals @ residuals),
        xtx_inv=(xtx_inv + xtx_inv.T) / 2.0,
        df=n - p,
        y_norm2=float(y @ y),
        column_names=names,
    )


def draw_posterior(fit: OlsFit, rng: RngStream) -> Tuple[np.ndarray, float]:
    """
    One draw of (beta*, sigma*^2) from the Jeffreys-prior posterior

    An exact fit (rss -> 0) returns (beta_hat, 0) without consuming randomness.
    """
    if fit.is_exact:
        return fit.beta_hat.copy(), 0.0
    sigma2 = draw_scaled_inv_chisq(fit.df, fit.rss, rng)
    beta = draw_mvn(fit.beta_hat, sigma2 * fit.xtx_inv, rng)
    return beta, sigma2


@dataclass(frozen=True)
class PosteriorDraw:
    """
    One posterior draw of every arm's regression

    Attributes:
        betas: (w+1) x (k+1) coefficients, intercept first
        sigma2: Residual variances, one per arm
    """

    betas: np.ndarray
    sigma2: np.ndarray

    @property
    def n_arms(self) -> int:
        return len(self.sigma2)

    @property
    def sigma(self) -> np.ndarray:
        return np.sqrt(self.sigma2)

    def arm_means(self, x: np.ndarray) -> np.ndarray:
        """
        Linear predictors for every arm

        Args:
            x: Covariate row(s) without intercept, shape (k,) or (n, k)

        Returns:
            Shape (w+1,) for one row, (n, w+1) for a matrix
        """
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return self.betas @ np.concatenate([[1.0], x])
        return add_intercept(x) @ self.betas.T


def draw_arm_posteriors(
    covariates: np.ndarray,
    arm: np.ndarray,
    y_obs: np.ndarray,
    n_arms: int,
    rng: RngStream,
    covariate_names: Sequence[str] = (),
) -> Tuple[PosteriorDraw, List[OlsFit]]:
    """
    Fit and draw the marginal model of every arm from that arm's units

    Args:
        covariates: Completed covariate matrix (no missing cells), n x k
        arm: Arm index per unit (out-of-sample units are ignored)
        y_obs: Observed outcome per unit
        n_arms: Number of arms w+1
        rng: Random stream
        covariate_names: Covariate names for error messages

    Returns:
        (PosteriorDraw, per-arm OlsFit list)
    """
    names = ("(intercept)",) + tuple(covariate_names)
    fits: List[OlsFit] = []
    betas, sigma2 = [], []
    for a in range(n_arms):
        rows = arm == a
        fit = fit_ols(add_intercept(covariates[rows]), y_obs[rows], names)
        beta, s2 = draw_posterior(fit, rng)
        fits.append(fit)
        betas.append(beta)
        sigma2.append(s2)
    return PosteriorDraw(np.vstack(betas), np.array(sigma2)), fits
