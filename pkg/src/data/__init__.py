"""
Trial data model: frames, schemas, correlation specs and run settings
"""

from .frame import TrialFrame, load_trial_csv, write_csv
from .rho import RhoSpec
from .schema import TrialSchema, load_config_file, schema_from_mapping
from .settings import SpcConfig
from .validation import ValidationReport, validate

__all__ = [
    "TrialFrame",
    "load_trial_csv",
    "write_csv",
    "RhoSpec",
    "TrialSchema",
    "load_config_file",
    "schema_from_mapping",
    "SpcConfig",
    "ValidationReport",
    "validate",
]
