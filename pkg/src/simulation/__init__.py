"""
Simulation bench: synthetic trials with known effects, metrics and studies
"""

from .bench import (
    SENSITIVITY_COLUMNS,
    TABLE1_COLUMNS,
    TABLE2_COLUMNS,
    BenchConfig,
    MetricReport,
    replication_study,
    sensitivity_sweep,
)
from .generator import (
    COVARIANCE,
    MEANS,
    TRUE_PARTIAL_RHO,
    TRUE_STATISTICS,
    SimTruth,
    generate_trial,
)
from .metrics import IteMetrics, ite_metrics

__all__ = [
    "SENSITIVITY_COLUMNS",
    "TABLE1_COLUMNS",
    "TABLE2_COLUMNS",
    "BenchConfig",
    "MetricReport",
    "replication_study",
    "sensitivity_sweep",
    "COVARIANCE",
    "MEANS",
    "TRUE_PARTIAL_RHO",
    "TRUE_STATISTICS",
    "SimTruth",
    "generate_trial",
    "IteMetrics",
    "ite_metrics",
]
