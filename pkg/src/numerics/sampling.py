"""
Reproducible random streams and the samplers the imputation model needs
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from src.core.errors import InvalidDf, OutOfRange

from .linalg import cholesky

# Chi-square draws sum squared normals up to this df and use the gamma sampler above
SMALL_DF = 30


@dataclass
class RngStream:
    """
    A numpy Generator keyed by (seed, stream id)

    Identical keys reproduce identical draw sequences. Child streams extend the
    key path, so replication r / imputation i always gets the same numbers no
    matter which thread runs it or in what order.
    """

    seed: int
    stream_id: int = 0
    parent_key: Tuple[int, ...] = ()
    generator: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.seed < 0:
            raise OutOfRange(f"Seed must be non-negative, got {self.seed}")
        sequence = np.random.SeedSequence(self.seed, spawn_key=self.key)
        self.generator = np.random.Generator(np.random.PCG64(sequence))

    @property
    def key(self) -> Tuple[int, ...]:
        """Full spawn-key path of this stream"""
        return self.parent_key + (self.stream_id,)

    def child(self, stream_id: int) -> "RngStream":
        """Independent stream nested under this one"""
        return RngStream(self.seed, stream_id, parent_key=self.key)

    def derive_seed(self) -> int:
        """A 63-bit integer seed derived from this stream's key"""
        words = np.random.SeedSequence(self.seed, spawn_key=self.key).generate_state(
            2, dtype=np.uint32
        )
        return int((int(words[0]) << 31) ^ int(words[1]))

    # Thin delegation to the generator

    def standard_normal(self, size=None) -> np.ndarray:
        return self.generator.standard_normal(size)

    def chisquare(self, df: float, size=None):
        return self.generator.chisquare(df, size)

    def choice(self, values: np.ndarray, size: int) -> np.ndarray:
        return self.generator.choice(values, size=size, replace=True)


def draw_mvn(
    mean: np.ndarray, cov: np.ndarray, rng: RngStream, tol: Optional[float] = None
) -> np.ndarray:
    """
    One draw from N(mean, cov)

    Args:
        mean: Mean vector of length d
        cov: d x d PSD covariance (boundary matrices allowed)
        rng: Random stream

    Returns:
        Vector of length d
    """
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    factor = cholesky(np.atleast_2d(cov), tol=tol)
    return mean + factor @ rng.standard_normal(mean.shape[0])


def draw_mvn_rows(
    means: np.ndarray, cov: np.ndarray, rng: RngStream, tol: Optional[float] = None
) -> np.ndarray:
    """
    One draw per row of `means`, all sharing the covariance `cov`

    Args:
        means: n x d matrix of mean vectors
        cov: d x d PSD covariance

    Returns:
        n x d matrix of draws
    """
    means = np.atleast_2d(np.asarray(means, dtype=float))
    factor = cholesky(np.atleast_2d(cov), tol=tol)
    noise = rng.standard_normal(means.shape)
    return means + noise @ factor.T


def draw_scaled_inv_chisq(df: int, scale_sum: float, rng: RngStream) -> float:
    """
    scale_sum / chi2_df

    With scale_sum the residual sum of squares and df the residual degrees of
    freedom, this is the Jeffreys-prior posterior draw of a regression variance.

    Raises:
        InvalidDf: df < 1
        OutOfRange: scale_sum <= 0
    """
    if df < 1:
        raise InvalidDf(f"Degrees of freedom must be >= 1, got {df}")
    if not scale_sum > 0:
        raise OutOfRange(f"Scale sum must be positive, got {scale_sum}")
    if df <= SMALL_DF:
        chi2 = float(np.sum(rng.standard_normal(int(df)) ** 2))
    else:
        chi2 = float(rng.chisquare(df))
    return scale_sum / chi2
