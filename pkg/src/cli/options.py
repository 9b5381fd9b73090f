"""
Option parsing and precedence for the command line

A setting comes from the first source that has it:
command-line flag, then the --config file, then SPC_* environment variables,
then the built-in default.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from src.config import config
from src.core.errors import InvalidConfig
from src.core.types import CovariateMethod, RhoScale
from src.data.frame import TrialFrame
from src.data.rho import RhoSpec
from src.data.schema import TrialSchema, load_config_file, schema_from_mapping
from src.data.settings import SpcConfig
from src.engine.correlation import rho_spec_to_partial

logger = logging.getLogger(__name__)

RhoValue = Union[float, Dict[str, float]]


class RunConfigFile(BaseModel):
    """Keys accepted in a --config file (JSON or YAML)"""

    model_config = ConfigDict(extra="forbid")

    treatment: Optional[str] = None
    outcome: Optional[str] = None
    covariates: Optional[List[str]] = None
    out_of_sample_code: Optional[str] = None
    unit_id: Optional[str] = None
    arm_codes: Optional[List[str]] = None
    rho: Optional[RhoValue] = None
    rho_scale: Optional[RhoScale] = None
    m: Optional[int] = Field(default=None, ge=2)
    fcs_iterations: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = Field(default=None, ge=0)
    threads: Optional[int] = Field(default=None, ge=1)
    output_dir: Optional[str] = None
    covariate_method: Dict[str, CovariateMethod] = Field(default_factory=dict)


class Manifest(BaseModel):
    """Everything needed to replay an imputation run exactly"""

    model_config = ConfigDict(populate_by_name=True)

    spec_version: int = config.SPEC_VERSION
    command: str = "impute"
    input: str
    out_of_sample: Optional[str] = None
    trial_schema: TrialSchema = Field(alias="schema")
    settings: Dict[str, Any]
    rho_scale: RhoScale = RhoScale.PARTIAL
    n_units: int
    arm_labels: List[str]

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, indent=2) + "\n"


def load_run_config(path: Optional[Union[str, Path]]) -> RunConfigFile:
    """Parse and validate a --config file; no path gives an empty config"""
    if path is None:
        return RunConfigFile()
    try:
        return RunConfigFile(**load_config_file(path))
    except ValidationError as e:
        raise InvalidConfig(f"Invalid config file {path}: {e}") from e


def load_manifest(path: Union[str, Path]) -> Manifest:
    try:
        return Manifest(**load_config_file(path))
    except ValidationError as e:
        raise InvalidConfig(f"Invalid manifest {path}: {e}") from e


def first_set(*values: Any) -> Any:
    """The first value that is not None"""
    for value in values:
        if value is not None:
            return value
    return None


def draw_seed() -> int:
    """A fresh 63-bit seed from OS entropy"""
    return int(np.random.SeedSequence().entropy % (2**63))


def parse_rho(values: Sequence[str], n_arms: int) -> RhoSpec:
    """
    Parse --rho flags

    A single bare number broadcasts to every pair; otherwise each flag is
    'a,b=value' with arm indices a and b.

    Example:
        >>> parse_rho(["0.7"], 2).get(0, 1)
        0.7
        >>> parse_rho(["0,1=0.5", "1,2=0.3"], 3).get(0, 2)
        0.0
    """
    if len(values) == 1 and "=" not in values[0]:
        try:
            return RhoSpec.from_scalar(float(values[0]), n_arms)
        except ValueError as e:
            raise InvalidConfig(f"--rho expects a number, got {values[0]!r}") from e

    pairs: Dict[Tuple[int, int], float] = {}
    for value in values:
        try:
            key, number = value.split("=", 1)
            a, b = (int(part) for part in key.split(","))
            pairs[(a, b)] = float(number)
        except ValueError as e:
            raise InvalidConfig(
                f"--rho expects 'a,b=value' when given per pair, got {value!r}"
            ) from e
    return RhoSpec.from_pairs(pairs, n_arms)


def rho_from_sources(
    flags: Sequence[str], file_value: Optional[RhoValue], n_arms: int
) -> RhoSpec:
    if flags:
        return parse_rho(flags, n_arms)
    if isinstance(file_value, dict):
        return RhoSpec.from_dict(file_value, n_arms)
    if file_value is not None:
        return RhoSpec.from_scalar(float(file_value), n_arms)
    logger.warning("No rho given: imputing under conditional independence (rho = 0)")
    return RhoSpec.from_scalar(0.0, n_arms)


def parse_methods(values: Sequence[str]) -> Dict[str, CovariateMethod]:
    """--method column=norm|sample"""
    methods = {}
    for value in values:
        column, _, method = value.partition("=")
        try:
            methods[column.strip()] = CovariateMethod(method.strip())
        except ValueError as e:
            raise InvalidConfig(
                f"--method expects column=norm|sample, got {value!r}"
            ) from e
    return methods


def parse_grid(text: str) -> List[float]:
    """Comma-separated floats"""
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise InvalidConfig(f"Cannot parse grid {text!r}") from e


@dataclass
class CliConfig:
    """Resolved settings of one imputation or prediction run"""

    command: str
    input: Path
    schema: TrialSchema
    spc: SpcConfig
    output_dir: Path
    threads: int = 1
    rho_scale: RhoScale = RhoScale.PARTIAL
    out_of_sample: Optional[Path] = None
    extra: Dict[str, Any] = field(default_factory=dict)

    def manifest(self, frame: TrialFrame) -> Manifest:
        return Manifest(
            command=self.command,
            input=str(self.input),
            out_of_sample=(
                None if self.out_of_sample is None else str(self.out_of_sample)
            ),
            schema=self.schema,
            settings=self.spc.to_dict(),
            rho_scale=self.rho_scale,
            n_units=frame.n_units,
            arm_labels=list(frame.arm_labels),
        )


def resolve_schema(flags: Dict[str, Any], file_config: RunConfigFile) -> TrialSchema:
    """Column roles from flags, falling back to the config file"""
    covariates = flags.get("covariates") or file_config.covariates or []
    data = {
        "treatment": first_set(flags.get("treatment"), file_config.treatment),
        "outcome": first_set(flags.get("outcome"), file_config.outcome),
        "covariates": list(covariates),
        "out_of_sample_code": first_set(
            flags.get("out_of_sample_code"), file_config.out_of_sample_code
        ),
        "unit_id": first_set(flags.get("unit_id"), file_config.unit_id),
        "arm_codes": first_set(flags.get("arm_codes"), file_config.arm_codes),
    }
    missing = [role for role in ("treatment", "outcome") if not data[role]]
    if missing:
        raise InvalidConfig(
            f"Missing column role(s) {missing}: pass --{missing[0]} or set it "
            "in the --config file"
        )
    return schema_from_mapping(data)


def resolve_spc(
    flags: Dict[str, Any],
    file_config: RunConfigFile,
    frame: TrialFrame,
    seed: int,
) -> Tuple[SpcConfig, RhoScale]:
    """Imputation settings for a loaded frame"""
    rho = rho_from_sources(flags.get("rho") or (), file_config.rho, frame.n_arms)
    scale = RhoScale(
        first_set(flags.get("rho_scale"), file_config.rho_scale, RhoScale.PARTIAL)
    )
    if scale == RhoScale.MARGINAL:
        rho = rho_spec_to_partial(rho, frame)
        logger.info(f"Partial-scale rho after conversion: {rho.to_dict()}")
    methods = dict(file_config.covariate_method)
    methods.update(flags.get("methods") or {})
    spc = SpcConfig(
        rho=rho,
        m=int(first_set(flags.get("m"), file_config.m, config.DEFAULT_M)),
        fcs_iterations=int(
            first_set(
                flags.get("iterations"),
                file_config.fcs_iterations,
                config.FCS_ITERATIONS,
            )
        ),
        seed=seed,
        covariate_method=methods,
    )
    return spc, scale
