"""
Analyst-specified partial correlations between potential outcomes
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Mapping, Tuple

import numpy as np

from src.core.errors import InvalidConfig, OutOfRange

logger = logging.getLogger(__name__)

Pair = Tuple[int, int]


@dataclass(frozen=True)
class RhoSpec:
    """
    Pairwise partial correlations rho_{Y(a)Y(b)|X} for all a < b

    Pairs that are not given default to 0 (conditional independence). Whether
    the pairs are jointly feasible is checked when the joint model is built.
    """

    n_arms: int
    pairs: Dict[Pair, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.n_arms < 2:
            raise InvalidConfig(f"RhoSpec needs at least 2 arms, got {self.n_arms}")

        canonical: Dict[Pair, float] = {}
        for (a, b), value in self.pairs.items():
            a, b = int(a), int(b)
            if a == b:
                raise InvalidConfig(f"Pair ({a}, {b}) is a diagonal entry")
            if not (0 <= a < self.n_arms and 0 <= b < self.n_arms):
                raise InvalidConfig(
                    f"Pair ({a}, {b}) outside arms 0..{self.n_arms - 1}"
                )
            value = float(value)
            if not -1.0 <= value <= 1.0:
                raise OutOfRange(f"rho for pair ({a}, {b}) must be in [-1, 1]: {value}")
            canonical[(min(a, b), max(a, b))] = value

        for a in range(self.n_arms):
            for b in range(a + 1, self.n_arms):
                canonical.setdefault((a, b), 0.0)

        negative = {p: v for p, v in canonical.items() if v < 0}
        if negative:
            logger.warning(
                f"Negative partial correlations {negative}: imputations tend to be "
                "poor when potential outcomes are negatively correlated"
            )
        object.__setattr__(self, "pairs", dict(sorted(canonical.items())))

    @classmethod
    def from_scalar(cls, rho: float, n_arms: int = 2) -> "RhoSpec":
        """Broadcast one value to every pair"""
        return cls(
            n_arms,
            {(a, b): rho for a in range(n_arms) for b in range(a + 1, n_arms)},
        )

    @classmethod
    def from_pairs(cls, pairs: Mapping[Pair, float], n_arms: int) -> "RhoSpec":
        return cls(n_arms, dict(pairs))

    @classmethod
    def from_dict(cls, data: Mapping[str, float], n_arms: int) -> "RhoSpec":
        """Inverse of to_dict: keys are 'a,b' strings"""
        pairs = {}
        for key, value in data.items():
            try:
                a, b = (int(part) for part in str(key).split(","))
            except ValueError as e:
                raise InvalidConfig(f"Bad rho pair key {key!r}, expected 'a,b'") from e
            pairs[(a, b)] = value
        return cls(n_arms, pairs)

    def get(self, a: int, b: int) -> float:
        if a == b:
            return 1.0
        return self.pairs[(min(a, b), max(a, b))]

    def correlation_matrix(self) -> np.ndarray:
        """(w+1) x (w+1) matrix with unit diagonal"""
        matrix = np.eye(self.n_arms)
        for (a, b), value in self.pairs.items():
            matrix[a, b] = matrix[b, a] = value
        return matrix

    def to_dict(self) -> Dict[str, float]:
        return {f"{a},{b}": value for (a, b), value in self.pairs.items()}
