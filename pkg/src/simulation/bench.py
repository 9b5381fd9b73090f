"""
Monte Carlo replication study and partial-correlation sensitivity sweep

Replication r draws its trial from stream (seed, r, 0). Every rho of that
replication imputes with the same seed, derived from stream (seed, r, 1), so
differences between rho values are not blurred by independent noise.
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.analysis.effects import ite_posterior
from src.analysis.statistics import pooled_statistics
from src.config import config
from src.core.errors import InvalidConfig, OutOfRange
from src.core.types import IteInterval
from src.data.rho import RhoSpec
from src.data.settings import SpcConfig
from src.engine.imputer import multiply_impute
from src.numerics.sampling import RngStream

from .generator import TRUE_STATISTICS, generate_trial
from .metrics import ite_metrics

logger = logging.getLogger(__name__)

TABLE1_COLUMNS = [
    "rho",
    "mean_bias",
    "variance_of_bias",
    "coverage",
    "mean_distance",
]
TABLE2_COLUMNS = ["rho", "parameter", "truth", "estimate", "coverage"]
SENSITIVITY_COLUMNS = [
    "rho",
    "coverage",
    "coverage_se",
    "mean_distance",
    "mean_distance_se",
]
DRAW_COLUMNS = ["rho", "unit_id", "imputation", "tau", "true_tau"]


@dataclass(frozen=True)
class BenchConfig:
    """
    Settings of a simulation study

    Attributes:
        n: Units per generated trial
        m: Imputations per trial and rho
        rho_list: Partial correlations to impute under
        replications: Number of generated trials
        seed: Root seed
        threads: Replications run concurrently when > 1
        keep_draws: Keep replication 0's per-unit ITE draws
        ite_interval: How per-unit ITE intervals are formed
    """

    n: int = 5000
    m: int = config.DEFAULT_M
    rho_list: Tuple[float, ...] = (0.0, 0.73, 0.99)
    replications: int = config.REPLICATIONS
    seed: int = 0
    threads: int = 1
    fcs_iterations: int = config.FCS_ITERATIONS
    keep_draws: bool = False
    ite_interval: IteInterval = IteInterval.PREDICTIVE

    def __post_init__(self):
        if self.replications < 1:
            raise InvalidConfig(
                f"replications must be >= 1, got {self.replications}"
            )
        if not self.rho_list:
            raise InvalidConfig("rho_list is empty")
        if self.n < 2 or self.n % 2:
            raise InvalidConfig(f"n must be a positive even number, got {self.n}")
        for rho in self.rho_list:
            if not -1.0 <= rho <= 1.0:
                raise OutOfRange(f"rho must lie in [-1, 1], got {rho}")
        object.__setattr__(self, "rho_list", tuple(float(r) for r in self.rho_list))
        object.__setattr__(self, "ite_interval", IteInterval(self.ite_interval))

    def spc_config(self, rho: float, seed: int) -> SpcConfig:
        return SpcConfig(
            rho=RhoSpec.from_scalar(rho, 2),
            m=self.m,
            fcs_iterations=self.fcs_iterations,
            seed=seed,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "m": self.m,
            "rho_list": list(self.rho_list),
            "replications": self.replications,
            "seed": self.seed,
            "ite_interval": self.ite_interval.value,
        }


@dataclass
class MetricReport:
    """
    Per-(rho, replication) results of a study

    Attributes:
        parameters: One row per rho, replication and estimand (pooled estimate, CI)
        ite: One row per rho and replication (ITE accuracy)
        draws: Replication 0's per-unit ITE draws when requested
    """

    bench: BenchConfig
    parameters: pd.DataFrame
    ite: pd.DataFrame
    draws: pd.DataFrame = field(
        default_factory=lambda: pd.DataFrame(columns=DRAW_COLUMNS)
    )

    def table1(self) -> pd.DataFrame:
        """ITE accuracy averaged over replications, one row per rho"""
        grouped = self.ite.groupby("rho", sort=True)
        return grouped[TABLE1_COLUMNS[1:]].mean().reset_index()[TABLE1_COLUMNS]

    def table2(self) -> pd.DataFrame:
        """Mean pooled estimate and CI coverage rate per rho and estimand"""
        grouped = self.parameters.groupby(["rho", "order", "parameter"], sort=True)
        table = grouped.agg(
            truth=("truth", "first"),
            estimate=("estimate", "mean"),
            coverage=("covered", "mean"),
        ).reset_index()
        return table[TABLE2_COLUMNS]

    def sensitivity(self) -> pd.DataFrame:
        """ITE coverage and mean distance per rho with Monte Carlo standard errors"""
        rows = []
        for rho, group in self.ite.groupby("rho", sort=True):
            r = len(group)
            if r > 1:
                coverage_se = group["coverage"].std(ddof=1) / np.sqrt(r)
                distance_se = group["mean_distance"].std(ddof=1) / np.sqrt(r)
            else:
                coverage_se = group["coverage_se"].iloc[0]
                distance_se = group["mean_distance_se"].iloc[0]
            rows.append(
                {
                    "rho": rho,
                    "coverage": group["coverage"].mean(),
                    "coverage_se": float(coverage_se),
                    "mean_distance": group["mean_distance"].mean(),
                    "mean_distance_se": float(distance_se),
                }
            )
        return pd.DataFrame(rows, columns=SENSITIVITY_COLUMNS)


def _run_replication(
    r: int, bench: BenchConfig
) -> Tuple[List[Dict[str, Any]], List[Dict[str, Any]], Optional[pd.DataFrame]]:
    stream = RngStream(bench.seed, r)
    frame, truth = generate_trial(bench.n, stream.child(0))
    impute_seed = stream.child(1).derive_seed()

    parameter_rows: List[Dict[str, Any]] = []
    ite_rows: List[Dict[str, Any]] = []
    draw_tables: List[pd.DataFrame] = []
    for rho in bench.rho_list:
        imputations = multiply_impute(frame, bench.spc_config(rho, impute_seed), 1)

        pooled = pooled_statistics(imputations)
        for order, (estimand, estimate) in enumerate(pooled.items()):
            truth_value = TRUE_STATISTICS[estimand]
            parameter_rows.append(
                {
                    "rho": rho,
                    "replication": r,
                    "order": order,
                    "parameter": estimand.value,
                    "truth": truth_value,
                    "estimate": estimate.estimate,
                    "lower": estimate.lower,
                    "upper": estimate.upper,
                    "covered": estimate.covers(truth_value),
                }
            )

        metrics = ite_metrics(imputations, truth, bench.ite_interval)
        ite_rows.append(
            {
                "rho": rho,
                "replication": r,
                **metrics.to_dict(),
                "coverage_se": metrics.coverage_se,
                "mean_distance_se": metrics.mean_distance_se,
            }
        )

        if bench.keep_draws and r == 0:
            ite = ite_posterior(imputations)
            n, m = ite.draws.shape
            draw_tables.append(
                pd.DataFrame(
                    {
                        "rho": rho,
                        "unit_id": np.repeat(ite.unit_ids, m),
                        "imputation": np.tile(np.arange(m), n),
                        "tau": ite.draws.ravel(),
                        "true_tau": np.repeat(truth.tau, m),
                    }
                )
            )

    draws = pd.concat(draw_tables, ignore_index=True) if draw_tables else None
    logger.debug(f"Replication {r} finished")
    return parameter_rows, ite_rows, draws


def replication_study(bench: BenchConfig) -> MetricReport:
    """
    Generate bench.replications trials and impute each under every rho

    Output rows are ordered by (rho, replication) whatever the thread count.
    """
    results: Dict[int, Any] = {}
    if bench.threads > 1:
        with ThreadPoolExecutor(max_workers=bench.threads) as executor:
            futures = {
                executor.submit(_run_replication, r, bench): r
                for r in range(bench.replications)
            }
            for future in as_completed(futures):
                results[futures[future]] = future.result()
    else:
        for r in range(bench.replications):
            results[r] = _run_replication(r, bench)

    parameter_rows: List[Dict[str, Any]] = []
    ite_rows: List[Dict[str, Any]] = []
    draws = None
    for r in range(bench.replications):
        params, ites, replication_draws = results[r]
        parameter_rows.extend(params)
        ite_rows.extend(ites)
        if replication_draws is not None:
            draws = replication_draws

    parameters = pd.DataFrame(parameter_rows).sort_values(
        ["rho", "replication", "order"], kind="mergesort"
    )
    ite = pd.DataFrame(ite_rows).sort_values(["rho", "replication"], kind="mergesort")
    report = MetricReport(
        bench=bench,
        parameters=parameters.reset_index(drop=True),
        ite=ite.reset_index(drop=True),
    )
    if draws is not None:
        report.draws = draws
    logger.info(
        f"Replication study finished: {bench.replications} replication(s), "
        f"rho {list(bench.rho_list)}, n={bench.n}, m={bench.m}"
    )
    return report


def sensitivity_sweep(
    rho_grid: Sequence[float], bench: Optional[BenchConfig] = None
) -> pd.DataFrame:
    """
    ITE coverage and mean distance as functions of the assumed rho

    Args:
        rho_grid: Partial correlations to evaluate, each in [0, 1]
        bench: Study settings; its rho_list is replaced by rho_grid

    Returns:
        Tidy table with columns rho, coverage, coverage_se, mean_distance,
        mean_distance_se
    """
    grid = tuple(float(r) for r in rho_grid)
    if not grid:
        raise InvalidConfig("rho grid is empty")
    for rho in grid:
        if not 0.0 <= rho <= 1.0:
            raise OutOfRange(f"Grid values must lie in [0, 1], got {rho}")
    base = bench or BenchConfig()
    swept = replace(base, rho_list=grid)
    return replication_study(swept).sensitivity()
