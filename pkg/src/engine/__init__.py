"""
SPC imputation engine: correlation conversions, the joint outcome model and
the multiple-imputation driver
"""

from .correlation import (
    outcome_covariate_correlations,
    rho_marginal_from_partial,
    rho_partial_from_marginal,
    rho_spec_from_marginal,
    rho_spec_to_partial,
)
from .imputer import CompletedDataset, ImputationSet, impute_once, multiply_impute
from .joint_model import (
    JointOutcomeModel,
    build_joint_model,
    conditional_impute_block,
    conditional_impute_unit,
    outcome_covariance,
    predict_out_of_sample,
)

__all__ = [
    "outcome_covariate_correlations",
    "rho_spec_to_partial",
    "rho_marginal_from_partial",
    "rho_partial_from_marginal",
    "rho_spec_from_marginal",
    "CompletedDataset",
    "ImputationSet",
    "impute_once",
    "multiply_impute",
    "JointOutcomeModel",
    "build_joint_model",
    "conditional_impute_block",
    "conditional_impute_unit",
    "outcome_covariance",
    "predict_out_of_sample",
]
