"""
Column-role mapping for trial CSV files
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator

from src.core.errors import InvalidConfig


class TrialSchema(BaseModel):
    """Which CSV column plays which role"""

    treatment: str
    outcome: str
    covariates: List[str] = Field(default_factory=list)
    out_of_sample_code: Optional[str] = None
    unit_id: Optional[str] = None
    arm_codes: Optional[List[str]] = None

    @field_validator("covariates")
    @classmethod
    def _unique_covariates(cls, value: List[str]) -> List[str]:
        if len(set(value)) != len(value):
            raise ValueError("covariate columns must be unique")
        return value

    @field_validator("arm_codes")
    @classmethod
    def _unique_codes(cls, value: Optional[List[str]]) -> Optional[List[str]]:
        if value is not None and len(set(value)) != len(value):
            raise ValueError("arm codes must be unique")
        return value


def load_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Read a JSON or YAML config file into a dictionary

    yaml.safe_load parses JSON documents too, so one reader covers both.
    """
    try:
        with open(path, encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except (OSError, yaml.YAMLError) as e:
        raise InvalidConfig(f"Cannot read config file {path}: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise InvalidConfig(f"Config file {path} must hold a mapping at top level")
    return data


def schema_from_mapping(data: Dict[str, Any]) -> TrialSchema:
    """Build a TrialSchema, turning pydantic errors into InvalidConfig"""
    try:
        return TrialSchema(**data)
    except ValidationError as e:
        raise InvalidConfig(f"Invalid schema: {e}") from e
