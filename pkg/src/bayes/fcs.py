"""
Fully conditional specification (chained equations) for incomplete covariates

In-sample cells of column j are imputed from every other covariate, the arm
indicators and the observed outcome (one column per arm). Out-of-sample units
have no outcome, so their cells use a covariates-only model fitted on the
in-sample rows; out-of-sample values never enter a fitted model.
"""

import logging
from typing import Dict, List, Optional

import numpy as np

from src.core.base_imputer import BaseColumnImputer, ColumnImputation
from src.core.errors import AllMissing
from src.core.types import CovariateMethod
from src.data.frame import TrialFrame
from src.data.settings import SpcConfig
from src.numerics.sampling import RngStream

from .imputers import SampleImputer, get_imputer_for_method
from .linear import add_intercept

logger = logging.getLogger(__name__)


class CovariateFcs:
    """
    Holds the current covariate fills of one imputation and updates them in place

    Example:
        >>> fcs = CovariateFcs(frame, spc)
        >>> fcs.initialize(rng)
        >>> for _ in range(10):
        ...     fcs.run_cycle(rng)
        >>> completed = fcs.fills
    """

    def __init__(
        self,
        frame: TrialFrame,
        spc: Optional[SpcConfig] = None,
    ):
        self.frame = frame
        self.missing = frame.covariate_missing
        self.fills = np.array(frame.covariates, dtype=float, copy=True)
        self.incomplete: List[int] = [
            j for j in range(frame.k) if self.missing[:, j].any()
        ]
        self.imputers: Dict[int, BaseColumnImputer] = {
            j: get_imputer_for_method(
                spc.method_for(frame.covariate_names[j])
                if spc is not None
                else CovariateMethod.NORMAL
            )
            for j in self.incomplete
        }
        self._outcome_block = self._outcome_predictors()

    def _outcome_predictors(self) -> np.ndarray:
        """Arm dummies (arms 1..w) and the observed outcome split by arm"""
        frame = self.frame
        rows = frame.in_sample
        arm = frame.arm[rows]
        y = frame.y_obs[rows]
        dummies = [(arm == a).astype(float) for a in range(1, frame.n_arms)]
        by_arm = [np.where(arm == a, y, 0.0) for a in range(frame.n_arms)]
        return np.column_stack(dummies + by_arm)

    def _outcome_names(self) -> List[str]:
        labels = self.frame.arm_labels
        outcome = self.frame.outcome_name
        return [f"arm={label}" for label in labels[1:]] + [
            f"{outcome}|arm={label}" for label in labels
        ]

    def initialize(self, rng: RngStream) -> None:
        """Start every incomplete column from random draws of its observed values"""
        sampler = SampleImputer()
        for j in self.incomplete:
            column = self.frame.covariate_names[j]
            observed = ~self.missing[:, j]
            if not observed[self.frame.in_sample].any():
                raise AllMissing(
                    f"Covariate '{column}' has no observed in-sample values"
                )
            n_missing = int(self.missing[:, j].sum())
            self.fills[self.missing[:, j], j] = sampler.draw(
                self.fills[observed, j], None, np.empty(n_missing), rng
            )

    def impute_column(self, j: int, rng: RngStream) -> ColumnImputation:
        """One FCS step for covariate j; observed cells are never overwritten"""
        frame = self.frame
        name = frame.covariate_names[j]
        imputer = self.imputers[j]
        others = [i for i in range(frame.k) if i != j]
        other_names = [frame.covariate_names[i] for i in others]
        in_rows = frame.in_sample
        out_rows = frame.out_of_sample

        in_sample_x = add_intercept(
            np.column_stack([self.fills[in_rows][:, others], self._outcome_block])
        )
        result = imputer.impute(
            name,
            self.fills[in_rows, j],
            self.missing[in_rows, j],
            in_sample_x,
            rng,
            ["(intercept)"] + other_names + self._outcome_names(),
        )
        self.fills[in_rows, j] = result.values

        out_missing = self.missing[out_rows, j]
        if out_missing.any():
            observed_in = ~self.missing[in_rows, j]
            x_fit = add_intercept(self.fills[in_rows][:, others])
            x_new = add_intercept(self.fills[out_rows][:, others])
            draws = imputer.draw(
                self.fills[in_rows, j][observed_in],
                x_fit[observed_in],
                x_new[out_missing],
                rng,
                ["(intercept)"] + other_names,
            )
            column = self.fills[out_rows, j]
            column[out_missing] = draws
            self.fills[out_rows, j] = column
            result.n_imputed += int(out_missing.sum())

        result.values = self.fills[:, j].copy()
        return result

    def run_cycle(self, rng: RngStream) -> None:
        """Visit every incomplete covariate once, in column order"""
        for j in self.incomplete:
            result = self.impute_column(j, rng)
            logger.debug(f"FCS filled {result.n_imputed} cell(s) of '{result.column}'")


def fcs_impute_column(j: int, fcs: CovariateFcs, rng: RngStream) -> np.ndarray:
    """
    Impute covariate j given the current fills of every other column

    Returns:
        The completed column (all units)

    Raises:
        AllMissing: column j has no observed values
    """
    if not (~fcs.missing[:, j]).any():
        raise AllMissing(
            f"Covariate '{fcs.frame.covariate_names[j]}' has no observed values"
        )
    if j not in fcs.imputers:
        return fcs.fills[:, j].copy()
    return fcs.impute_column(j, rng).values
