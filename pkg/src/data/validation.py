"""
Pre-imputation checks on a TrialFrame
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np

from src.core.errors import AllMissing, InsufficientArm

from .frame import TrialFrame

logger = logging.getLogger(__name__)

# The imputation model leans on these; they are stated, not tested
ASSUMPTIONS = (
    "Stable unit treatment value: a unit's outcomes do not depend on other "
    "units' assignments, and each arm is a single version of treatment.",
    "Ignorable assignment: treatment is independent of the potential outcomes "
    "given the observed covariates, so assignment need not be modelled.",
    "The partial correlation between potential outcomes given X is not "
    "identified by the data; it is an analyst input.",
)

# Residual df = N_w - (k + 1) must reach this for the variance posterior
MIN_DF = 2


@dataclass
class ValidationReport:
    """Per-arm counts, degrees of freedom and covariate missingness"""

    n_units: int
    n_in_sample: int
    n_out_of_sample: int
    arm_counts: Dict[str, int]
    df_per_arm: Dict[str, int]
    covariate_missing_rate: Dict[str, float]
    flagged_columns: List[str] = field(default_factory=list)
    assumptions: List[str] = field(default_factory=lambda: list(ASSUMPTIONS))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_units": self.n_units,
            "n_in_sample": self.n_in_sample,
            "n_out_of_sample": self.n_out_of_sample,
            "arm_counts": self.arm_counts,
            "df_per_arm": self.df_per_arm,
            "covariate_missing_rate": self.covariate_missing_rate,
            "flagged_columns": self.flagged_columns,
            "assumptions": self.assumptions,
        }

    def summary_lines(self) -> List[str]:
        lines = [
            f"Units: {self.n_in_sample} in-sample, "
            f"{self.n_out_of_sample} out-of-sample"
        ]
        for label, count in self.arm_counts.items():
            lines.append(f"Arm {label}: N={count}, df={self.df_per_arm[label]}")
        for column, rate in self.covariate_missing_rate.items():
            flag = " (imputed by FCS)" if column in self.flagged_columns else ""
            lines.append(f"Covariate {column}: {rate:.1%} missing{flag}")
        return lines


def validate(frame: TrialFrame) -> ValidationReport:
    """
    Check that every arm can support its posterior draws and summarise missingness

    Raises:
        InsufficientArm: an arm has N_w - (k + 1) < 2
        AllMissing: a covariate has no observed value at all
    """
    counts = frame.arm_counts
    labels = frame.arm_labels
    df = counts - (frame.k + 1)
    for label, count, arm_df in zip(labels, counts, df):
        if arm_df < MIN_DF:
            raise InsufficientArm(
                f"Arm '{label}' has {count} units for "
                f"{frame.k} covariate(s) plus intercept: df={arm_df} < {MIN_DF}"
            )

    missing = frame.covariate_missing
    rates = missing.mean(axis=0) if frame.n_units else np.zeros(frame.k)
    for name, rate in zip(frame.covariate_names, rates):
        if rate == 1.0:
            raise AllMissing(f"Covariate '{name}' has no observed values")
    flagged = [name for name, rate in zip(frame.covariate_names, rates) if rate > 0]
    if flagged:
        logger.warning(f"Covariates with missing cells, imputed by FCS: {flagged}")

    return ValidationReport(
        n_units=frame.n_units,
        n_in_sample=int(frame.in_sample.sum()),
        n_out_of_sample=int(frame.out_of_sample.sum()),
        arm_counts=dict(zip(labels, counts.tolist())),
        df_per_arm=dict(zip(labels, df.tolist())),
        covariate_missing_rate=dict(zip(frame.covariate_names, rates.tolist())),
        flagged_columns=flagged,
    )
