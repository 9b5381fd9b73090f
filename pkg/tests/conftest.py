"""
Test suite for spcimpute
"""

import sys
from pathlib import Path

# Add parent directory to path
if str(Path(__file__).parent.parent) not in sys.path:
    sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np
import pytest
from src.data.frame import TrialFrame
from src.data.rho import RhoSpec
from src.data.settings import SpcConfig
from src.numerics.sampling import RngStream
from src.simulation.generator import generate_trial


@pytest.fixture
def rng():
    """Fixed random stream"""
    return RngStream(12345)


@pytest.fixture
def trial():
    """Synthetic two-arm trial of 60 units with its true potential outcomes"""
    return generate_trial(60, RngStream(7))


@pytest.fixture
def small_frame(trial):
    """TrialFrame of the synthetic trial"""
    return trial[0]


@pytest.fixture
def incomplete_frame(small_frame):
    """The synthetic trial with a second covariate that has missing cells"""
    generator = np.random.default_rng(3)
    n = small_frame.n_units
    z = small_frame.covariates[:, 0] + generator.normal(0.0, 0.5, n)
    z[::7] = np.nan
    x = small_frame.covariates[:, 0].copy()
    x[3::11] = np.nan
    return TrialFrame(
        unit_ids=small_frame.unit_ids,
        arm=small_frame.arm,
        y_obs=small_frame.y_obs,
        covariates=np.column_stack([x, z]),
        covariate_names=("x", "z"),
        arm_labels=small_frame.arm_labels,
    )


@pytest.fixture
def spc_config():
    """Two-arm settings with a moderate partial correlation"""
    return SpcConfig(rho=RhoSpec.from_scalar(0.73, 2), m=4, seed=42)


@pytest.fixture
def trial_csv(tmp_path):
    """Small long-format CSV with string treatment codes and a unit id column"""
    generator = np.random.default_rng(11)
    rows = ["id,arm,days,cd4"]
    for i in range(24):
        arm = "placebo" if i % 2 == 0 else "drug"
        cd4 = generator.normal(350.0, 50.0)
        days = 100.0 + 0.2 * cd4 + (30.0 if arm == "drug" else 0.0)
        days += generator.normal(0.0, 10.0)
        rows.append(f"u{i:02d},{arm},{days:.3f},{cd4:.3f}")
    path = tmp_path / "trial.csv"
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return path
