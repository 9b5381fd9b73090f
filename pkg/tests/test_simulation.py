"""
Tests for the synthetic trial generator, ITE metrics and the replication bench
"""

from dataclasses import replace

import numpy as np
import pandas as pd
import pytest
from src.bayes.linear import PosteriorDraw
from src.core.errors import InvalidConfig, MisalignedUnits, OutOfRange
from src.core.types import Estimand, IteInterval
from src.data.rho import RhoSpec
from src.data.settings import SpcConfig
from src.engine.imputer import CompletedDataset, ImputationSet
from src.numerics.sampling import RngStream
from src.simulation import (
    SENSITIVITY_COLUMNS,
    TABLE1_COLUMNS,
    TABLE2_COLUMNS,
    TRUE_STATISTICS,
    BenchConfig,
    generate_trial,
    ite_metrics,
    replication_study,
    sensitivity_sweep,
)


def _perfect_imputations(frame, truth) -> ImputationSet:
    """Every completed dataset equals the true potential outcomes"""
    outcomes = np.column_stack([truth.y0, truth.y1])
    draw = PosteriorDraw(np.zeros((2, 2)), np.ones(2))
    datasets = tuple(
        CompletedDataset(frame, frame.covariates, outcomes, i, draw) for i in range(2)
    )
    spc = SpcConfig(rho=RhoSpec.from_scalar(0.0))
    return ImputationSet(datasets=datasets, config=spc, seed=0)


class TestGenerateTrial:
    """Tests for the synthetic two-arm trial"""

    def test_masking(self):
        """Test the half/half split and which outcome is observed"""
        frame, truth = generate_trial(10, RngStream(1))

        assert frame.arm_counts.tolist() == [5, 5]
        assert frame.arm[:5].tolist() == [0] * 5
        np.testing.assert_array_equal(frame.y_obs[:5], truth.y0[:5])
        np.testing.assert_array_equal(frame.y_obs[5:], truth.y1[5:])
        np.testing.assert_array_equal(frame.covariates[:, 0], truth.x)
        np.testing.assert_allclose(truth.tau, truth.y1 - truth.y0)
        assert frame.unit_ids.tolist() == [str(i) for i in range(1, 11)]

    def test_reproducible(self):
        """Test that the same stream generates the same trial"""
        first, _ = generate_trial(20, RngStream(4, 0))
        second, _ = generate_trial(20, RngStream(4, 0))
        np.testing.assert_array_equal(first.y_obs, second.y_obs)

    def test_odd_n(self):
        """Test that an odd unit count is rejected"""
        with pytest.raises(OutOfRange):
            generate_trial(11, RngStream(1))

    def test_population_correlations(self):
        """Test Corr(Y0, Y1) = 0.8 and the partial correlation given X"""
        _, truth = generate_trial(100_000, RngStream(2))
        assert np.corrcoef(truth.y0, truth.y1)[0, 1] == pytest.approx(0.8, abs=0.01)

        design = np.column_stack([np.ones(truth.n_units), truth.x])
        residuals = [
            y - design @ np.linalg.lstsq(design, y, rcond=None)[0]
            for y in (truth.y0, truth.y1)
        ]
        partial = np.corrcoef(residuals[0], residuals[1])[0, 1]
        assert partial == pytest.approx(0.733, abs=0.01)


class TestIteMetrics:
    """Tests for ITE accuracy against known effects"""

    def test_perfect_imputations(self):
        """Test zero bias and full coverage when imputations equal the truth"""
        frame, truth = generate_trial(20, RngStream(1))
        metrics = ite_metrics(_perfect_imputations(frame, truth), truth)

        assert metrics.mean_bias == 0.0
        assert metrics.variance_of_bias == 0.0
        assert metrics.mean_distance == 0.0
        assert metrics.coverage == 1.0
        assert metrics.n_units == 20
        assert set(metrics.to_dict()) == set(TABLE1_COLUMNS[1:])

    def test_misaligned_truth(self):
        """Test that truth for other units is rejected"""
        frame, truth = generate_trial(20, RngStream(1))
        _, other = generate_trial(22, RngStream(1))
        with pytest.raises(MisalignedUnits):
            ite_metrics(_perfect_imputations(frame, truth), other)


class TestBenchConfig:
    """Tests for simulation settings"""

    def test_defaults(self):
        """Test the study defaults"""
        bench = BenchConfig()
        assert bench.n == 5000
        assert bench.rho_list == (0.0, 0.73, 0.99)
        assert bench.ite_interval == IteInterval.PREDICTIVE
        assert bench.to_dict()["rho_list"] == [0.0, 0.73, 0.99]

    def test_invalid(self):
        """Test rejected settings"""
        with pytest.raises(InvalidConfig):
            BenchConfig(n=11)
        with pytest.raises(InvalidConfig):
            BenchConfig(replications=0)
        with pytest.raises(InvalidConfig):
            BenchConfig(rho_list=())
        with pytest.raises(OutOfRange):
            BenchConfig(rho_list=(1.5,))

    def test_spc_config(self):
        """Test the per-rho imputation settings"""
        spc = BenchConfig(m=7).spc_config(0.5, seed=11)
        assert spc.m == 7
        assert spc.seed == 11
        assert spc.rho.get(0, 1) == 0.5


class TestReplicationStudy:
    """Tests for the Monte Carlo replication loop"""

    @pytest.fixture
    def bench(self):
        return BenchConfig(
            n=40, m=2, rho_list=(0.0, 0.73), replications=2, seed=3, keep_draws=True
        )

    def test_tables(self, bench):
        """Test the shape and content of both tables"""
        report = replication_study(bench)
        table1 = report.table1()
        table2 = report.table2()

        assert list(table1.columns) == TABLE1_COLUMNS
        assert table1["rho"].tolist() == [0.0, 0.73]
        assert table1["coverage"].between(0.0, 1.0).all()
        assert list(table2.columns) == TABLE2_COLUMNS
        assert len(table2) == 2 * len(Estimand)
        assert table2["parameter"].tolist()[:7] == [e.value for e in Estimand]
        truths = dict(zip(table2["parameter"], table2["truth"]))
        assert truths["Cov(y0,y1)"] == TRUE_STATISTICS[Estimand.COV_Y0_Y1]
        assert len(report.parameters) == 2 * 2 * len(Estimand)

    def test_draws(self, bench):
        """Test that replication 0's ITE draws are kept on request"""
        draws = replication_study(bench).draws
        assert len(draws) == 2 * 40 * 2
        assert set(draws["rho"]) == {0.0, 0.73}

    def test_thread_count_does_not_matter(self, bench):
        """Test that threaded and sequential studies agree"""
        sequential = replication_study(bench)
        threaded = replication_study(replace(bench, threads=2))
        pd.testing.assert_frame_equal(sequential.parameters, threaded.parameters)
        pd.testing.assert_frame_equal(sequential.ite, threaded.ite)

    def test_same_seed_same_tables(self, bench):
        """Test that a fixed seed, grid and replication count reproduce both CSVs"""
        first = replication_study(bench)
        second = replication_study(bench)
        assert first.table1().to_csv(index=False) == second.table1().to_csv(index=False)
        assert first.table2().to_csv(index=False) == second.table2().to_csv(index=False)

    def test_sensitivity_sweep(self):
        """Test one row per grid value"""
        bench = BenchConfig(n=40, m=2, replications=1, seed=5)
        table = sensitivity_sweep([0.0, 0.5, 1.0], bench)
        assert list(table.columns) == SENSITIVITY_COLUMNS
        assert table["rho"].tolist() == [0.0, 0.5, 1.0]
        assert (table["coverage_se"] >= 0).all()

    def test_sweep_grid_range(self):
        """Test that grid values outside [0, 1] are rejected"""
        with pytest.raises(OutOfRange):
            sensitivity_sweep([-0.2, 0.5])
        with pytest.raises(InvalidConfig):
            sensitivity_sweep([])


@pytest.mark.slow
class TestAcceptance:
    """Monte Carlo checks of the large-sample simulation results"""

    def test_average_inference_table(self):
        """Test pooled estimates and CI coverage over 200 replications"""
        bench = BenchConfig(n=5000, m=5, replications=200, seed=2024, threads=4)
        table = replication_study(bench).table2()

        marginal = [e.value for e in Estimand if e != Estimand.COV_Y0_Y1]
        for _, row in table[table["parameter"].isin(marginal)].iterrows():
            assert row["estimate"] == pytest.approx(row["truth"], abs=0.02)
            assert 0.91 <= row["coverage"] <= 0.98

        cross = table[table["parameter"] == Estimand.COV_Y0_Y1.value].set_index("rho")
        assert cross.loc[0.0, "estimate"] == pytest.approx(0.25, abs=0.02)
        assert cross.loc[0.73, "estimate"] == pytest.approx(0.80, abs=0.02)
        assert cross.loc[0.99, "estimate"] == pytest.approx(0.99, abs=0.01)
        assert cross.loc[0.0, "coverage"] == 0.0
        assert cross.loc[0.99, "coverage"] == 0.0
        assert cross.loc[0.73, "coverage"] >= 0.90

    def test_individual_effect_table(self):
        """Test variance of ITE bias for one trial of 5000 units and m = 20"""
        bench = BenchConfig(n=5000, m=20, replications=1, seed=7)
        table = replication_study(bench).table1().set_index("rho")

        expected = {0.0: (0.791, 0.05), 0.73: (0.363, 0.04), 0.99: (0.398, 0.04)}
        for rho, (value, tolerance) in expected.items():
            assert table.loc[rho, "variance_of_bias"] == pytest.approx(
                value, abs=tolerance
            )
            assert abs(table.loc[rho, "mean_bias"]) < 0.05

    def test_sensitivity_shape(self):
        """Test that accuracy peaks near the true rho and rho = 0.99 under-covers"""
        grid = [0.0, 0.2, 0.4, 0.6, 0.73, 0.9, 0.99]
        bench = BenchConfig(n=5000, m=20, replications=1, seed=11)
        table = sensitivity_sweep(grid, bench).set_index("rho")

        assert table["mean_distance"].idxmin() == 0.73
        assert table.loc[0.73, "coverage"] > 0.90
        assert table.loc[0.99, "coverage"] < 0.5
        gap = table.loc[0.73, "coverage"] - table.loc[0.99, "coverage"]
        spread = table.loc[0.73, "coverage_se"] + table.loc[0.99, "coverage_se"]
        assert gap > 3 * spread

        distance = table["mean_distance"]
        distance_se = table["mean_distance_se"]
        for rho in (0.0, 0.99):
            distance_gap = distance.loc[rho] - distance.loc[0.73]
            assert distance_gap > 3 * (distance_se.loc[rho] + distance_se.loc[0.73])
