"""
Complete-data analyses over imputation sets: pooling, effects, diagnostics
"""

from .effects import (
    ItePosterior,
    VarianceDecomposition,
    ate,
    imputation_fan,
    ite_posterior,
    positive_effect_probability,
    recommend_treatment,
    variance_decomposition,
)
from .pooling import PooledEstimate, barnard_rubin_df, rubin_pool
from .statistics import completed_data_statistics, pooled_statistics

__all__ = [
    "ItePosterior",
    "VarianceDecomposition",
    "ate",
    "imputation_fan",
    "ite_posterior",
    "positive_effect_probability",
    "recommend_treatment",
    "variance_decomposition",
    "PooledEstimate",
    "barnard_rubin_df",
    "rubin_pool",
    "completed_data_statistics",
    "pooled_statistics",
]
