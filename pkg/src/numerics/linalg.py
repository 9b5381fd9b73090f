"""
Dense symmetric-matrix kernels: PSD-tolerant Cholesky and the sweep operator

Sweep convention (Goodnight). Sweeping pivot k with d = A[k, k] > 0 maps

    A[k, k] -> -1 / d
    A[i, k] -> A[i, k] / d            (and symmetrically A[k, j])
    A[i, j] -> A[i, j] - A[i, k] A[k, j] / d

so that after sweeping an index set K of a covariance matrix S

    block K,K  = -(S_KK)^-1
    block R,K  = S_RK (S_KK)^-1       regression of R on K
    block R,R  = S_RR - S_RK (S_KK)^-1 S_KR   conditional covariance of R given K

and sweeping every index yields -S^-1. The pivot sign is the bookkeeping: a
negative pivot marks an index that was already swept, and sweeping it again
applies the reverse sweep (off-diagonal entries take -A[i, k] / d), so
sweep(sweep(S, K), K) == S.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from src.config import config
from src.core.errors import NotPSD, OutOfRange, SingularPivot

logger = logging.getLogger(__name__)

# Symmetric matrices are plain 2-D float arrays; ensure_symmetric guards entry points
SymMatrix = np.ndarray


def ensure_symmetric(matrix: np.ndarray, atol: float = 1e-12) -> SymMatrix:
    """
    Validate a square, symmetric matrix and return an exactly symmetric copy

    Args:
        matrix: Candidate matrix
        atol: Largest tolerated asymmetry, relative to the largest entry

    Returns:
        Float copy with entries(i, j) == entries(j, i) exactly
    """
    a = np.array(matrix, dtype=float, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise OutOfRange(f"Expected a non-empty square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(a - a.T)) > atol * scale:
        raise OutOfRange("Matrix is not symmetric")
    return (a + a.T) / 2.0


def _scale(a: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(np.diag(a)))))


def _raise_not_psd(a: np.ndarray, message: str) -> None:
    eigenvalues, eigenvectors = np.linalg.eigh(a)
    raise NotPSD(message, float(eigenvalues[0]), eigenvectors[:, 0])


def cholesky(s: np.ndarray, tol: Optional[float] = None) -> np.ndarray:
    """
    Lower-triangular factor L with L L' = S, accepting PSD-boundary matrices

    Pivots within tol of zero are clamped to zero (their column is zeroed)
    when the rest of their column is also zero to within tol, which is what
    lets a correlation of exactly +/-1 through. The factor always satisfies
    max |L L' - S| <= tol * dim * max(1, largest diagonal entry).

    Args:
        s: Symmetric matrix
        tol: Pivot tolerance, relative to max(1, largest diagonal entry)

    Returns:
        Lower-triangular matrix with non-negative diagonal

    Raises:
        NotPSD: a pivot is below -tol, or L L' misses S by more than tol * dim
    """
    tol = config.PSD_TOL if tol is None else tol
    a = ensure_symmetric(s)
    n = a.shape[0]
    scale = _scale(a)
    threshold = tol * scale
    reconstruction_limit = threshold * n

    factor = np.zeros_like(a)
    for j in range(n):
        row = factor[j, :j]
        pivot = a[j, j] - row @ row
        below = a[j + 1 :, j] - factor[j + 1 :, :j] @ row
        if pivot < -threshold:
            _raise_not_psd(a, f"Matrix is not positive semi-definite (pivot {j})")
        residue = float(np.max(np.abs(below))) if below.size else 0.0
        if pivot <= threshold and (pivot <= 0.0 or residue <= reconstruction_limit):
            if residue > reconstruction_limit:
                _raise_not_psd(
                    a, f"Matrix is not positive semi-definite (zero pivot {j})"
                )
            logger.debug(f"Cholesky pivot {j} clamped to zero ({pivot:.3g})")
            continue
        root = np.sqrt(pivot)
        factor[j, j] = root
        factor[j + 1 :, j] = below / root

    if np.max(np.abs(factor @ factor.T - a)) > reconstruction_limit:
        _raise_not_psd(a, "Matrix is not positive semi-definite")
    return factor


def sweep(
    s: np.ndarray, indices: Iterable[int], tol: Optional[float] = None
) -> SymMatrix:
    """
    Sweep a symmetric matrix on a set of pivot positions

    Args:
        s: Symmetric matrix (a covariance matrix, or a previously swept one)
        indices: Positions to sweep; order does not matter
        tol: Pivot tolerance, relative to max(1, largest diagonal entry)

    Returns:
        The swept matrix (see module docstring for the layout)

    Raises:
        SingularPivot: a pivot magnitude falls below tolerance
    """
    tol = config.PSD_TOL if tol is None else tol
    a = ensure_symmetric(s)
    n = a.shape[0]
    threshold = tol * _scale(a)

    for k in sorted(set(int(i) for i in indices)):
        if not 0 <= k < n:
            raise OutOfRange(f"Sweep index {k} outside 0..{n - 1}")
        d = a[k, k]
        if abs(d) < threshold:
            raise SingularPivot(f"Sweep pivot {k} is numerically zero ({d:.3g})")
        column = a[:, k].copy()
        a -= np.outer(column, column) / d
        # Positive pivot: forward sweep. Negative pivot: undo an earlier sweep.
        sign = 1.0 if d > 0 else -1.0
        a[:, k] = sign * column / d
        a[k, :] = sign * column / d
        a[k, k] = -1.0 / d

    return (a + a.T) / 2.0


@dataclass(frozen=True)
class ConditionalParameters:
    """Regression of the free positions on the conditioned positions"""

    conditioned: np.ndarray  # K
    free: np.ndarray  # R, ascending
    coefficients: np.ndarray  # |R| x |K|, S_RK S_KK^-1
    covariance: SymMatrix  # |R| x |R|, S_RR - S_RK S_KK^-1 S_KR

    def mean(self, mean: np.ndarray, observed: np.ndarray) -> np.ndarray:
        """
        Conditional mean of the free positions

        Args:
            mean: Full mean vector(s), shape (d,) or (n, d)
            observed: Values at the conditioned positions, shape (|K|,) or (n, |K|)
        """
        mean = np.asarray(mean, dtype=float)
        observed = np.asarray(observed, dtype=float)
        residual = observed - mean[..., self.conditioned]
        return mean[..., self.free] + residual @ self.coefficients.T


def conditional_from_sweep(
    s: np.ndarray, conditioned: Iterable[int], tol: Optional[float] = None
) -> ConditionalParameters:
    """
    Conditional-normal parameters of the remaining positions given `conditioned`

    Args:
        s: Covariance matrix
        conditioned: Positions whose values are known

    Returns:
        ConditionalParameters read off the swept matrix
    """
    n = np.asarray(s).shape[0]
    k_idx = np.array(sorted(set(int(i) for i in conditioned)), dtype=int)
    r_idx = np.array([i for i in range(n) if i not in set(k_idx.tolist())], dtype=int)
    swept = sweep(s, k_idx, tol=tol)
    covariance = swept[np.ix_(r_idx, r_idx)]
    # Conditional covariance may dip a hair below zero at the PSD boundary
    if covariance.size:
        diag = np.diag(covariance).copy()
        np.fill_diagonal(covariance, np.where(np.abs(diag) < 1e-12, 0.0, diag))
    return ConditionalParameters(
        conditioned=k_idx,
        free=r_idx,
        coefficients=swept[np.ix_(r_idx, k_idx)],
        covariance=covariance,
    )
