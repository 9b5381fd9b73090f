"""
Long-format trial data: ingest, in-memory frame, and CSV output
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.core.errors import (
    EmptyArm,
    MissingOutcome,
    MissingTreatment,
    NonNumeric,
    SchemaMismatch,
)
from src.core.types import MISSING_TOKENS, OUT_OF_SAMPLE

from .schema import TrialSchema

logger = logging.getLogger(__name__)

DEFAULT_OUT_OF_SAMPLE_LABEL = "OOS"


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class TrialFrame:
    """
    One row per unit: arm, observed outcome (own arm only) and covariates

    Attributes:
        unit_ids: Unit identifiers (strings)
        arm: Arm index 0..w, or OUT_OF_SAMPLE
        y_obs: Observed outcome; NaN for out-of-sample units
        covariates: n x k matrix, NaN where a cell is missing
        covariate_names: Column names of the covariates
        arm_labels: Original treatment code of each arm index
    """

    unit_ids: np.ndarray
    arm: np.ndarray
    y_obs: np.ndarray
    covariates: np.ndarray
    covariate_names: Tuple[str, ...]
    arm_labels: Tuple[str, ...]
    treatment_name: str = "arm"
    outcome_name: str = "y"
    unit_id_name: str = "unit_id"
    out_of_sample_label: str = DEFAULT_OUT_OF_SAMPLE_LABEL

    def __post_init__(self):
        n = len(self.arm)
        covariates = np.asarray(self.covariates, dtype=float)
        if covariates.ndim != 2:
            covariates = covariates.reshape(n, -1)
        if len(self.unit_ids) != n or len(self.y_obs) != n:
            raise SchemaMismatch("unit_ids, arm and y_obs must have equal length")
        if covariates.shape[1] != len(self.covariate_names):
            raise SchemaMismatch("covariate matrix width differs from its names")
        if len(set(map(str, self.unit_ids))) != n:
            raise SchemaMismatch("unit ids are not unique")
        unit_ids = np.asarray(self.unit_ids, dtype=object).astype(str)
        object.__setattr__(self, "unit_ids", _frozen(unit_ids))
        object.__setattr__(self, "arm", _frozen(np.asarray(self.arm, dtype=int)))
        y_obs = np.asarray(self.y_obs, dtype=float)
        object.__setattr__(self, "y_obs", _frozen(y_obs))
        object.__setattr__(self, "covariates", _frozen(covariates))
        object.__setattr__(self, "covariate_names", tuple(self.covariate_names))
        labels = tuple(str(a) for a in self.arm_labels)
        object.__setattr__(self, "arm_labels", labels)

    @property
    def n_units(self) -> int:
        return len(self.arm)

    @property
    def n_arms(self) -> int:
        return len(self.arm_labels)

    @property
    def k(self) -> int:
        return len(self.covariate_names)

    @property
    def in_sample(self) -> np.ndarray:
        return self.arm != OUT_OF_SAMPLE

    @property
    def out_of_sample(self) -> np.ndarray:
        return self.arm == OUT_OF_SAMPLE

    @property
    def arm_counts(self) -> np.ndarray:
        """N_w for w = 0..n_arms-1"""
        return np.bincount(self.arm[self.in_sample], minlength=self.n_arms)

    @property
    def covariate_missing(self) -> np.ndarray:
        return np.isnan(self.covariates)

    @property
    def has_missing_covariates(self) -> bool:
        return bool(self.covariate_missing.any())

    def potential_outcomes(self) -> np.ndarray:
        """Wide n x (w+1) view: observed outcome in its own arm, NaN elsewhere"""
        wide = np.full((self.n_units, self.n_arms), np.nan)
        rows = np.flatnonzero(self.in_sample)
        wide[rows, self.arm[rows]] = self.y_obs[rows]
        return wide

    def arm_label(self, arm: int) -> str:
        if arm == OUT_OF_SAMPLE:
            return self.out_of_sample_label
        return self.arm_labels[arm]

    def to_dataframe(self) -> pd.DataFrame:
        """Long-format table with the original column names"""
        data = {
            self.unit_id_name: self.unit_ids,
            self.treatment_name: [self.arm_label(a) for a in self.arm],
            self.outcome_name: self.y_obs,
        }
        for j, name in enumerate(self.covariate_names):
            data[name] = self.covariates[:, j]
        return pd.DataFrame(data)


def parse_numeric(values: pd.Series, column: str, first_row: int) -> np.ndarray:
    """Parse strings to floats; missing tokens become NaN, anything else must parse"""
    stripped = values.str.strip()
    missing = stripped.isin(MISSING_TOKENS)
    parsed = pd.to_numeric(stripped.where(~missing), errors="coerce")
    bad = ~missing & ~np.isfinite(parsed.to_numpy(dtype=float, na_value=np.nan))
    if bad.any():
        position = int(np.flatnonzero(bad.to_numpy())[0])
        raise NonNumeric(column, first_row + position, str(values.iloc[position]))
    return parsed.to_numpy(dtype=float, na_value=np.nan)


def _parse_covariates(table: pd.DataFrame, names: Sequence[str]) -> np.ndarray:
    if not names:
        return np.empty((len(table), 0))
    return np.column_stack([parse_numeric(table[c], c, 2) for c in names])


def read_table(path: Union[str, Path], required: Sequence[str]) -> pd.DataFrame:
    """
    Read a CSV as strings and check that the required columns are present

    Raises:
        SchemaMismatch: the file is empty, malformed, not UTF-8 or lacks a column
    """
    try:
        table = pd.read_csv(
            path, dtype=str, keep_default_na=False, na_filter=False, encoding="utf-8"
        )
    except pd.errors.EmptyDataError as e:
        raise SchemaMismatch(f"{path}: file is empty") from e
    except pd.errors.ParserError as e:
        raise SchemaMismatch(f"{path}: malformed CSV ({e})") from e
    except UnicodeDecodeError as e:
        raise SchemaMismatch(
            f"{path}: not UTF-8 text (byte {e.start}: {e.reason})"
        ) from e
    table.columns = [str(c).strip() for c in table.columns]
    absent = [c for c in required if c not in table.columns]
    if absent:
        raise SchemaMismatch(f"{path}: missing column(s) {', '.join(absent)}")
    return table


def _code_arms(
    codes: pd.Series, schema: TrialSchema, out_of_sample: np.ndarray
) -> Tuple[np.ndarray, List[str]]:
    """Map treatment codes to 0..w (first appearance unless the schema pins them)"""
    in_sample_codes = codes[~out_of_sample]
    if schema.arm_codes is not None:
        labels = list(schema.arm_codes)
        unknown = sorted(set(in_sample_codes) - set(labels))
        if unknown:
            raise SchemaMismatch(
                f"Treatment code(s) {unknown} are not among the pinned codes {labels}"
            )
    else:
        labels = list(dict.fromkeys(in_sample_codes))

    lookup = {label: i for i, label in enumerate(labels)}
    arm = np.full(len(codes), OUT_OF_SAMPLE, dtype=int)
    arm[~out_of_sample] = [lookup[c] for c in in_sample_codes]

    counts = np.bincount(arm[~out_of_sample], minlength=len(labels))
    for label, count in zip(labels, counts):
        if count == 0:
            raise EmptyArm(f"Arm '{label}' has no units")
    if len(labels) < 2:
        raise EmptyArm(
            f"Need at least two treatment arms, found {len(labels)} ({labels})"
        )
    return arm, labels


def load_trial_csv(
    path: Union[str, Path],
    schema: TrialSchema,
    out_of_sample_path: Optional[Union[str, Path]] = None,
) -> TrialFrame:
    """
    Read a long-format trial CSV into a TrialFrame

    Empty cells and the token NA are missing. Out-of-sample units are the rows
    whose treatment equals schema.out_of_sample_code, plus every row of
    out_of_sample_path when given (that file needs only the covariate columns).

    Raises:
        SchemaMismatch: a schema column is absent, or an unknown pinned code
        NonNumeric: an outcome or covariate cell does not parse
        MissingTreatment: an in-file row has no treatment code
        MissingOutcome: an in-sample row has no outcome
        EmptyArm: an arm has no units
    """
    required = [schema.treatment, schema.outcome] + list(schema.covariates)
    if schema.unit_id:
        required.append(schema.unit_id)
    table = read_table(path, required)

    codes = table[schema.treatment].str.strip()
    missing_code = codes.isin(MISSING_TOKENS).to_numpy()
    if missing_code.any():
        row = int(np.flatnonzero(missing_code)[0]) + 2
        raise MissingTreatment(f"{path}: row {row} has no treatment code")

    out_of_sample = np.zeros(len(table), dtype=bool)
    if schema.out_of_sample_code is not None:
        out_of_sample = (codes == schema.out_of_sample_code).to_numpy()

    arm, labels = _code_arms(codes, schema, out_of_sample)
    y_obs = parse_numeric(table[schema.outcome], schema.outcome, 2)
    covariates = _parse_covariates(table, schema.covariates)

    no_outcome = np.isnan(y_obs) & ~out_of_sample
    if no_outcome.any():
        row = int(np.flatnonzero(no_outcome)[0]) + 2
        raise MissingOutcome(
            f"{path}: row {row} is in-sample but has no observed outcome"
        )

    if schema.unit_id:
        unit_ids = table[schema.unit_id].str.strip().to_numpy()
    else:
        unit_ids = np.array([str(i + 1) for i in range(len(table))], dtype=object)

    if out_of_sample_path is not None:
        extra = read_table(out_of_sample_path, list(schema.covariates))
        extra_cov = _parse_covariates(extra, schema.covariates)
        if schema.unit_id and schema.unit_id in extra.columns:
            extra_ids = extra[schema.unit_id].str.strip().to_numpy()
        else:
            start = len(table)
            extra_ids = np.array(
                [str(start + i + 1) for i in range(len(extra))], dtype=object
            )
        unit_ids = np.concatenate([unit_ids, extra_ids])
        arm = np.concatenate([arm, np.full(len(extra), OUT_OF_SAMPLE)])
        y_obs = np.concatenate([y_obs, np.full(len(extra), np.nan)])
        covariates = np.vstack([covariates, extra_cov])
        out_of_sample = np.concatenate(
            [out_of_sample, np.ones(len(extra), dtype=bool)]
        )

    dropped = int((out_of_sample & ~np.isnan(y_obs)).sum())
    if dropped:
        logger.warning(
            f"Ignoring the outcome of {dropped} out-of-sample unit(s); "
            "they are prediction targets"
        )
        y_obs = np.where(out_of_sample, np.nan, y_obs)

    frame = TrialFrame(
        unit_ids=unit_ids,
        arm=arm,
        y_obs=y_obs,
        covariates=covariates,
        covariate_names=tuple(schema.covariates),
        arm_labels=tuple(labels),
        treatment_name=schema.treatment,
        outcome_name=schema.outcome,
        unit_id_name=schema.unit_id or "unit_id",
        out_of_sample_label=schema.out_of_sample_code or DEFAULT_OUT_OF_SAMPLE_LABEL,
    )
    counts: Dict[str, int] = dict(zip(labels, frame.arm_counts.tolist()))
    logger.info(
        f"Loaded {frame.n_units} units from {path}: arms {counts}, "
        f"{int(frame.out_of_sample.sum())} out-of-sample"
    )
    return frame


def write_csv(frame: TrialFrame, path: Union[str, Path]) -> Path:
    """Write a frame back out in the long format load_trial_csv reads"""
    path = Path(path)
    frame.to_dataframe().to_csv(path, index=False, na_rep="NA")
    return path
