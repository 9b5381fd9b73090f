"""
CSV and JSON output of imputation runs and simulation studies
"""

import logging
from pathlib import Path
from typing import List, Union

import numpy as np
import pandas as pd

from src.analysis.effects import ite_posterior
from src.engine.imputer import CompletedDataset, ImputationSet
from src.simulation.bench import MetricReport

from .options import Manifest

logger = logging.getLogger(__name__)

# Enough digits to round-trip a double
FLOAT_FORMAT = "%.17g"


def _write(table: pd.DataFrame, path: Path) -> Path:
    table.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="NA")
    return path


def completed_table(dataset: CompletedDataset) -> pd.DataFrame:
    """
    One completed dataset in wide form

    Columns: unit id, treatment, completed covariates, then one
    '<outcome>_<arm label>' column per arm.
    """
    frame = dataset.frame
    data = {
        frame.unit_id_name: frame.unit_ids,
        frame.treatment_name: [frame.arm_label(a) for a in frame.arm],
    }
    for j, name in enumerate(frame.covariate_names):
        data[name] = dataset.covariates[:, j]
    for a, label in enumerate(frame.arm_labels):
        data[f"{frame.outcome_name}_{label}"] = dataset.outcomes[:, a]
    return pd.DataFrame(data)


def write_imputation_set(
    imputations: ImputationSet,
    directory: Union[str, Path],
    manifest: Manifest,
) -> List[Path]:
    """
    Write imputation_001.csv .. imputation_<m>.csv, ite_summary.csv and manifest.json

    ite_summary.csv lists units in input order; sort on mean_tau for a ranked view.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for dataset in imputations.datasets:
        path = directory / f"imputation_{dataset.index + 1:03d}.csv"
        paths.append(_write(completed_table(dataset), path))

    summary = ite_posterior(imputations).summary(sort=False)
    summary = summary[["unit_id", "mean_tau", "lower", "upper", "p_positive"]]
    paths.append(_write(summary, directory / "ite_summary.csv"))

    manifest_path = directory / "manifest.json"
    manifest_path.write_text(manifest.to_json(), encoding="utf-8")
    paths.append(manifest_path)
    logger.info(f"Wrote {len(paths)} file(s) to {directory}")
    return paths


def write_predictions(
    imputations: ImputationSet,
    directory: Union[str, Path],
    manifest: Manifest,
) -> List[Path]:
    """
    predictions.csv: one row per out-of-sample unit and imputation with every
    arm's drawn outcome, plus manifest.json
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    frame = imputations.frame
    targets = frame.out_of_sample
    m = imputations.m
    ids = frame.unit_ids[targets]
    outcomes = imputations.stacked_outcomes()[:, targets, :]
    predictions = pd.DataFrame(
        {
            "unit_id": np.repeat(ids, m),
            "imputation": np.tile(np.arange(1, m + 1), len(ids)),
        }
    )
    for a, label in enumerate(frame.arm_labels):
        predictions[f"{frame.outcome_name}_{label}"] = outcomes[:, :, a].T.ravel()
    paths = [_write(predictions, directory / "predictions.csv")]
    manifest_path = directory / "manifest.json"
    manifest_path.write_text(manifest.to_json(), encoding="utf-8")
    paths.append(manifest_path)
    return paths


def write_tables(report: MetricReport, directory: Union[str, Path]) -> List[Path]:
    """table1.csv, table2.csv and, when draws were kept, ite_draws.csv"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = [
        _write(report.table1(), directory / "table1.csv"),
        _write(report.table2(), directory / "table2.csv"),
    ]
    if len(report.draws):
        paths.append(_write(report.draws, directory / "ite_draws.csv"))
    logger.info(f"Wrote {len(paths)} table(s) to {directory}")
    return paths


def write_sensitivity(table: pd.DataFrame, directory: Union[str, Path]) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    return _write(table, directory / "sensitivity.csv")
