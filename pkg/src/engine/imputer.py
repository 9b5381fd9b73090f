"""
SPC multiple imputation: covariate FCS wrapped around the potential-outcome block

One imputation runs `fcs_iterations` cycles of
    1. one chained-equation pass over the incomplete covariates
    2. a posterior draw of every arm's regression on the current fills
    3. a joint-normal draw of every missing potential outcome, conditional on
       the observed one (in-sample) or unconditional (out-of-sample)
and keeps the final cycle's state.
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.bayes.fcs import CovariateFcs
from src.bayes.linear import PosteriorDraw, draw_arm_posteriors
from src.config import config as settings
from src.core.errors import InvalidConfig
from src.data.frame import TrialFrame
from src.data.settings import SpcConfig
from src.data.validation import validate
from src.numerics.sampling import RngStream

from .joint_model import (
    build_joint_model,
    conditional_impute_block,
    outcome_covariance,
    predict_out_of_sample,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CompletedDataset:
    """
    One completed copy of the trial

    Attributes:
        frame: The input frame (observed data)
        covariates: n x k covariates with missing cells filled
        outcomes: n x (w+1) potential outcomes; observed cells are the inputs
        index: Imputation number 0..m-1
        draw: The posterior draw the outcomes were imputed under
    """

    frame: TrialFrame
    covariates: np.ndarray
    outcomes: np.ndarray
    index: int
    draw: PosteriorDraw

    def effects(self, treated: int = 1, control: int = 0) -> np.ndarray:
        """Per-unit Y(treated) - Y(control)"""
        return self.outcomes[:, treated] - self.outcomes[:, control]


@dataclass(frozen=True)
class ImputationSet:
    """m completed datasets of the same frame, plus what is needed to replay them"""

    datasets: Tuple[CompletedDataset, ...]
    config: SpcConfig
    seed: int

    def __post_init__(self):
        if len(self.datasets) < 2:
            raise InvalidConfig(
                f"Need at least 2 completed datasets, got {len(self.datasets)}"
            )

    @property
    def m(self) -> int:
        return len(self.datasets)

    @property
    def frame(self) -> TrialFrame:
        return self.datasets[0].frame

    def stacked_outcomes(self) -> np.ndarray:
        """m x n x (w+1) array of completed potential outcomes"""
        return np.stack([d.outcomes for d in self.datasets])

    def stacked_covariates(self) -> np.ndarray:
        """m x n x k array of completed covariates"""
        return np.stack([d.covariates for d in self.datasets])


def _impute_outcomes(
    frame: TrialFrame,
    covariates: np.ndarray,
    draw: PosteriorDraw,
    spc: SpcConfig,
    rng: RngStream,
) -> np.ndarray:
    sigma = outcome_covariance(draw, spc.rho)
    outcomes = np.full((frame.n_units, frame.n_arms), np.nan)
    for a in range(frame.n_arms):
        rows = frame.arm == a
        model = build_joint_model(draw, spc.rho, covariates[rows], sigma)
        outcomes[rows] = conditional_impute_block(model, a, frame.y_obs[rows], rng)

    targets = frame.out_of_sample
    if targets.any():
        outcomes[targets] = predict_out_of_sample(
            draw, spc.rho, covariates[targets], rng, sigma
        )
    return outcomes


def _impute(
    frame: TrialFrame, spc: SpcConfig, rng: RngStream, index: int
) -> CompletedDataset:
    fcs = CovariateFcs(frame, spc)
    # With complete covariates FCS is a no-op and one cycle suffices
    cycles = spc.fcs_iterations if fcs.incomplete else 1
    if fcs.incomplete:
        fcs.initialize(rng)

    rows = frame.in_sample
    for cycle in range(cycles):
        if fcs.incomplete:
            fcs.run_cycle(rng)
        draw, _ = draw_arm_posteriors(
            fcs.fills[rows],
            frame.arm[rows],
            frame.y_obs[rows],
            frame.n_arms,
            rng,
            frame.covariate_names,
        )
        outcomes = _impute_outcomes(frame, fcs.fills, draw, spc, rng)
        logger.debug(f"Imputation {index}: cycle {cycle + 1}/{cycles} done")

    return CompletedDataset(
        frame=frame,
        covariates=fcs.fills.copy(),
        outcomes=outcomes,
        index=index,
        draw=draw,
    )


def impute_once(
    frame: TrialFrame, spc: SpcConfig, rng: RngStream, index: int = 0
) -> CompletedDataset:
    """
    Produce one completed dataset

    Args:
        frame: Trial data
        spc: Run settings (rho, FCS cycles, covariate methods)
        rng: Stream for this imputation
        index: Imputation number recorded on the result

    Raises:
        InsufficientArm: an arm is too small for its posterior draw
        NotPSD: the partial correlations are jointly infeasible
    """
    validate(frame)
    return _impute(frame, spc, rng, index)


def multiply_impute(
    frame: TrialFrame, spc: SpcConfig, threads: Optional[int] = None
) -> ImputationSet:
    """
    Produce spc.m completed datasets; imputation i draws from stream (seed, i)

    Results do not depend on the number of threads.

    Example:
        >>> spc = SpcConfig(rho=RhoSpec.from_scalar(0.7), m=20, seed=42)
        >>> imputations = multiply_impute(frame, spc, threads=4)
        >>> len(imputations.datasets)
        20
    """
    threads = settings.THREADS if threads is None else threads
    report = validate(frame)
    for line in report.summary_lines():
        logger.debug(line)

    streams = [RngStream(spc.seed, i) for i in range(spc.m)]
    results: Dict[int, CompletedDataset] = {}
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            futures = {
                executor.submit(_impute, frame, spc, stream, i): i
                for i, stream in enumerate(streams)
            }
            for future in as_completed(futures):
                results[futures[future]] = future.result()
    else:
        for i, stream in enumerate(streams):
            results[i] = _impute(frame, spc, stream, i)

    datasets: List[CompletedDataset] = [results[i] for i in range(spc.m)]
    logger.info(
        f"Finished {spc.m} imputations of {frame.n_units} units "
        f"(seed {spc.seed}, rho {spc.rho.to_dict()})"
    )
    return ImputationSet(datasets=tuple(datasets), config=spc, seed=spc.seed)
