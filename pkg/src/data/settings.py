"""
Imputation run settings
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Mapping

from src.config import config
from src.core.errors import InvalidConfig
from src.core.types import ConfigDict, CovariateMethod

from .rho import RhoSpec


@dataclass(frozen=True)
class SpcConfig:
    """
    Settings for one multiple-imputation run

    Attributes:
        m: Number of imputations; Rubin's between-imputation variance needs m >= 2
        fcs_iterations: Chained-equation cycles per imputation
        seed: Root seed; imputation i draws from stream (seed, i)
        rho: Cross-arm partial correlations
        covariate_method: Per-column method tag; unlisted columns use the normal model
    """

    rho: RhoSpec
    m: int = config.DEFAULT_M
    fcs_iterations: int = config.FCS_ITERATIONS
    seed: int = 0
    covariate_method: Dict[str, CovariateMethod] = field(default_factory=dict)

    def __post_init__(self):
        if self.m < 2:
            raise InvalidConfig(f"m must be at least 2, got {self.m}")
        if self.fcs_iterations < 1:
            raise InvalidConfig(
                f"fcs_iterations must be at least 1, got {self.fcs_iterations}"
            )
        if self.seed < 0 or self.seed >= 2**64:
            raise InvalidConfig(
                f"seed must be a 64-bit non-negative integer, got {self.seed}"
            )
        try:
            methods = {
                name: CovariateMethod(method)
                for name, method in self.covariate_method.items()
            }
        except ValueError as e:
            raise InvalidConfig(str(e)) from e
        object.__setattr__(self, "covariate_method", methods)

    def method_for(self, column: str) -> CovariateMethod:
        return self.covariate_method.get(column, CovariateMethod.NORMAL)

    def to_dict(self) -> ConfigDict:
        return {
            "m": self.m,
            "fcs_iterations": self.fcs_iterations,
            "seed": self.seed,
            "rho": self.rho.to_dict(),
            "covariate_method": {k: v.value for k, v in self.covariate_method.items()},
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], n_arms: int) -> "SpcConfig":
        return cls(
            rho=RhoSpec.from_dict(data.get("rho", {}), n_arms),
            m=int(data.get("m", config.DEFAULT_M)),
            fcs_iterations=int(data.get("fcs_iterations", config.FCS_ITERATIONS)),
            seed=int(data.get("seed", 0)),
            covariate_method=dict(data.get("covariate_method", {})),
        )
