"""
Treatment-effect analyses over an ImputationSet

Individual effects use the m imputed values as m posterior draws per unit.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import stats

from src.bayes.linear import add_intercept, fit_ols
from src.core.errors import InvalidConfig, MisalignedUnits
from src.core.types import IteInterval
from src.engine.imputer import ImputationSet

from .pooling import PooledEstimate, rubin_pool

logger = logging.getLogger(__name__)

# Level of the per-unit ITE interval
ITE_LEVEL = 0.95


def _check_contrast(imputations: ImputationSet, treated: int, control: int) -> None:
    n_arms = imputations.frame.n_arms
    if treated == control:
        raise InvalidConfig("Treated and control arm must differ")
    for arm in (treated, control):
        if not 0 <= arm < n_arms:
            raise InvalidConfig(f"Arm {arm} outside 0..{n_arms - 1}")


@dataclass(frozen=True)
class ItePosterior:
    """
    Posterior draws of tau_i = Y_i(treated) - Y_i(control) for every unit

    Attributes:
        unit_ids: Unit identifiers, frame order
        draws: n x m matrix, one column per imputation
        in_sample: Whether each unit was randomised
        interval: PREDICTIVE treats the true effect as one more draw, EMPIRICAL
            takes central quantiles of the m draws
    """

    unit_ids: np.ndarray
    draws: np.ndarray
    in_sample: np.ndarray
    treated: int = 1
    control: int = 0
    interval: IteInterval = IteInterval.PREDICTIVE

    @property
    def mean(self) -> np.ndarray:
        return self.draws.mean(axis=1)

    @property
    def variance(self) -> np.ndarray:
        return self.draws.var(axis=1, ddof=1)

    def _half_width(self) -> np.ndarray:
        m = self.draws.shape[1]
        t = float(stats.t.ppf((1.0 + ITE_LEVEL) / 2.0, m - 1))
        return t * np.sqrt(self.variance * (1.0 + 1.0 / m))

    @property
    def lower(self) -> np.ndarray:
        if self.interval == IteInterval.EMPIRICAL:
            return np.quantile(self.draws, (1.0 - ITE_LEVEL) / 2.0, axis=1)
        return self.mean - self._half_width()

    @property
    def upper(self) -> np.ndarray:
        if self.interval == IteInterval.EMPIRICAL:
            return np.quantile(self.draws, (1.0 + ITE_LEVEL) / 2.0, axis=1)
        return self.mean + self._half_width()

    def covers(self, truth: np.ndarray) -> np.ndarray:
        truth = np.asarray(truth, dtype=float)
        return (self.lower <= truth) & (truth <= self.upper)

    def summary(self, threshold: float = 0.0, sort: bool = True) -> pd.DataFrame:
        """
        Per-unit table: unit_id, mean_tau, lower, upper, p_positive, in_sample

        Sorted by ascending mean effect unless sort is False.
        """
        table = pd.DataFrame(
            {
                "unit_id": self.unit_ids,
                "mean_tau": self.mean,
                "lower": self.lower,
                "upper": self.upper,
                "p_positive": positive_effect_probability(self, threshold),
                "in_sample": self.in_sample,
            }
        )
        if sort:
            table = table.sort_values(["mean_tau", "unit_id"], kind="mergesort")
        return table.reset_index(drop=True)


def ite_posterior(
    imputations: ImputationSet,
    treated: int = 1,
    control: int = 0,
    interval: IteInterval = IteInterval.PREDICTIVE,
) -> ItePosterior:
    """
    Per-unit ITE draws, in-sample and out-of-sample units alike

    For an in-sample unit the observed arm enters every draw verbatim.
    """
    _check_contrast(imputations, treated, control)
    draws = np.column_stack(
        [d.effects(treated, control) for d in imputations.datasets]
    )
    frame = imputations.frame
    return ItePosterior(
        unit_ids=frame.unit_ids,
        draws=draws,
        in_sample=frame.in_sample,
        treated=treated,
        control=control,
        interval=IteInterval(interval),
    )


def positive_effect_probability(
    ite: ItePosterior, threshold: float = 0.0
) -> np.ndarray:
    """Share of each unit's draws strictly above threshold"""
    if ite.draws.shape[1] < 2:
        raise InvalidConfig("Need at least 2 draws per unit")
    return (ite.draws > threshold).mean(axis=1)


def ate(
    imputations: ImputationSet, treated: int = 1, control: int = 0
) -> PooledEstimate:
    """
    Average treatment effect over in-sample units, pooled across imputations

    Each completed dataset contributes mean(Y(treated)) - mean(Y(control))
    with the two-sample variance s_t^2 / n + s_c^2 / n.
    """
    _check_contrast(imputations, treated, control)
    rows = imputations.frame.in_sample
    n = int(rows.sum())
    estimates, variances = [], []
    for dataset in imputations.datasets:
        y_t = dataset.outcomes[rows, treated]
        y_c = dataset.outcomes[rows, control]
        estimates.append(float(y_t.mean() - y_c.mean()))
        variances.append(float(y_t.var(ddof=1) / n + y_c.var(ddof=1) / n))
    pooled = rubin_pool(estimates, variances, complete_df=2 * n - 2)
    logger.info(
        f"ATE ({treated} vs {control}): {pooled.estimate:.4f} "
        f"[{pooled.lower:.4f}, {pooled.upper:.4f}]"
    )
    return pooled


@dataclass(frozen=True)
class VarianceDecomposition:
    """
    Var(tau) = Var(X'beta) + Var(eps), with
    Var(eps) = Var(eps(1)) + Var(eps(0)) - 2 Cov(eps(1), eps(0))

    Scalars are averages over imputations; per_imputation holds the rows.
    """

    systematic: float
    idiosyncratic: float
    residual_covariance: float
    per_imputation: pd.DataFrame

    @property
    def total(self) -> float:
        return self.systematic + self.idiosyncratic


def _residuals(design: np.ndarray, y: np.ndarray, names: Sequence[str]) -> np.ndarray:
    fit = fit_ols(design, y, names)
    return y - design @ fit.beta_hat


def variance_decomposition(
    imputations: ImputationSet,
    covariates: Optional[Sequence[str]] = None,
    treated: int = 1,
    control: int = 0,
) -> VarianceDecomposition:
    """
    Split the effect variance into covariate-explained and idiosyncratic parts

    Args:
        imputations: Completed datasets
        covariates: Covariate names to regress on; all of them by default

    Raises:
        RankDeficient: the covariates are collinear
    """
    _check_contrast(imputations, treated, control)
    frame = imputations.frame
    names = list(frame.covariate_names if covariates is None else covariates)
    unknown = [c for c in names if c not in frame.covariate_names]
    if unknown:
        raise InvalidConfig(f"Unknown covariate(s) {unknown}")
    columns = [frame.covariate_names.index(c) for c in names]
    rows = frame.in_sample
    design_names = ["(intercept)"] + names

    records = []
    for dataset in imputations.datasets:
        design = add_intercept(dataset.covariates[rows][:, columns])
        y_t = dataset.outcomes[rows, treated]
        y_c = dataset.outcomes[rows, control]
        tau = y_t - y_c
        eps = _residuals(design, tau, design_names)
        eps_t = _residuals(design, y_t, design_names)
        eps_c = _residuals(design, y_c, design_names)
        records.append(
            {
                "imputation": dataset.index,
                "var_tau": float(tau.var()),
                "systematic": float((tau - eps).var()),
                "idiosyncratic": float(eps.var()),
                "var_eps_treated": float(eps_t.var()),
                "var_eps_control": float(eps_c.var()),
                "residual_covariance": float(np.mean(eps_t * eps_c)),
            }
        )

    table = pd.DataFrame(records)
    return VarianceDecomposition(
        systematic=float(table["systematic"].mean()),
        idiosyncratic=float(table["idiosyncratic"].mean()),
        residual_covariance=float(table["residual_covariance"].mean()),
        per_imputation=table,
    )


def recommend_treatment(imputations: ImputationSet) -> pd.DataFrame:
    """
    Best arm per unit by posterior-mean outcome, with P(arm is best)

    Columns: unit_id, recommended, mean_<label> and p_best_<label> per arm.
    Higher outcomes are taken to be better.
    """
    frame = imputations.frame
    outcomes = imputations.stacked_outcomes()  # m x n x arms
    means = outcomes.mean(axis=0)
    best = outcomes.argmax(axis=2)
    data: Dict[str, object] = {"unit_id": frame.unit_ids}
    data["recommended"] = [frame.arm_labels[a] for a in means.argmax(axis=1)]
    for a, label in enumerate(frame.arm_labels):
        data[f"mean_{label}"] = means[:, a]
    for a, label in enumerate(frame.arm_labels):
        data[f"p_best_{label}"] = (best == a).mean(axis=0)
    return pd.DataFrame(data)


def imputation_fan(
    imputations: ImputationSet, unit_ids: Optional[Sequence[str]] = None
) -> pd.DataFrame:
    """
    Long table of every completed outcome of the selected units

    Columns: unit_id, arm, imputation, value, observed.
    """
    frame = imputations.frame
    ids = list(frame.unit_ids)
    if unit_ids is None:
        selected = list(range(frame.n_units))
    else:
        position = {u: i for i, u in enumerate(ids)}
        absent = [u for u in map(str, unit_ids) if u not in position]
        if absent:
            raise MisalignedUnits(f"Unknown unit id(s): {absent}")
        selected = [position[str(u)] for u in unit_ids]

    records = []
    for i in selected:
        for a, label in enumerate(frame.arm_labels):
            observed = bool(frame.arm[i] == a)
            for dataset in imputations.datasets:
                records.append(
                    {
                        "unit_id": ids[i],
                        "arm": label,
                        "imputation": dataset.index,
                        "value": float(dataset.outcomes[i, a]),
                        "observed": observed,
                    }
                )
    return pd.DataFrame(
        records, columns=["unit_id", "arm", "imputation", "value", "observed"]
    )
