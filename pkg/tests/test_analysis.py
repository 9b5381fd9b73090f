"""
Tests for Rubin pooling, completed-data statistics and effect analyses
"""

import math

import numpy as np
import pytest
from src.analysis import (
    ItePosterior,
    ate,
    barnard_rubin_df,
    completed_data_statistics,
    imputation_fan,
    ite_posterior,
    pooled_statistics,
    positive_effect_probability,
    recommend_treatment,
    rubin_pool,
    variance_decomposition,
)
from src.bayes.linear import PosteriorDraw
from src.core.errors import InvalidConfig, MisalignedUnits, OutOfRange
from src.core.types import Estimand
from src.data.frame import TrialFrame
from src.data.rho import RhoSpec
from src.data.settings import SpcConfig
from src.engine.imputer import CompletedDataset, ImputationSet, multiply_impute


def _frame(n: int = 4, x=None) -> TrialFrame:
    x = np.arange(float(n)) if x is None else np.asarray(x, dtype=float)
    return TrialFrame(
        unit_ids=[f"u{i}" for i in range(n)],
        arm=np.arange(n) % 2,
        y_obs=np.zeros(n),
        covariates=x[:, None],
        covariate_names=("x",),
        arm_labels=("ctl", "trt"),
    )


def _imputation_set(frame: TrialFrame, outcome_list, covariates=None) -> ImputationSet:
    covariates = frame.covariates if covariates is None else covariates
    draw = PosteriorDraw(np.zeros((frame.n_arms, frame.k + 1)), np.ones(frame.n_arms))
    datasets = tuple(
        CompletedDataset(frame, covariates, np.asarray(o, dtype=float), i, draw)
        for i, o in enumerate(outcome_list)
    )
    spc = SpcConfig(rho=RhoSpec.from_scalar(0.0, frame.n_arms))
    return ImputationSet(datasets=datasets, config=spc, seed=0)


class TestRubinPool:
    """Tests for Rubin's combining rules"""

    def test_no_between_variance(self):
        """Test identical estimates: Q-bar = q, B = 0, T = u"""
        pooled = rubin_pool([1.5, 1.5, 1.5], [0.2, 0.2, 0.2])
        assert pooled.estimate == pytest.approx(1.5)
        assert pooled.between == 0.0
        assert pooled.total == pytest.approx(0.2)
        assert math.isinf(pooled.df)
        assert pooled.upper - pooled.estimate == pytest.approx(1.959964 * 0.2**0.5)
        assert pooled.missing_information == 0.0

    def test_hand_computed(self):
        """Test estimates (0, 2) with variances (1, 1)"""
        pooled = rubin_pool([0.0, 2.0], [1.0, 1.0])
        assert pooled.estimate == pytest.approx(1.0)
        assert pooled.within == pytest.approx(1.0)
        assert pooled.between == pytest.approx(2.0)
        assert pooled.total == pytest.approx(4.0)
        assert pooled.se == pytest.approx(2.0)
        assert pooled.df == pytest.approx(1.0 / 0.75**2)
        assert pooled.missing_information == pytest.approx(0.75)
        assert pooled.covers(1.0)
        assert pooled.estimate - pooled.lower == pytest.approx(
            pooled.upper - pooled.estimate
        )

    def test_small_sample_df(self):
        """Test that a finite complete-data df shrinks the reference df"""
        large_sample = barnard_rubin_df(5, 1.0, 0.5)
        adjusted = barnard_rubin_df(5, 1.0, 0.5, complete_df=20)
        assert adjusted < large_sample
        assert adjusted < 20

    def test_level(self):
        """Test that a lower level narrows the interval"""
        wide = rubin_pool([0.0, 1.0, 2.0], [1.0, 1.0, 1.0], level=0.95)
        narrow = rubin_pool([0.0, 1.0, 2.0], [1.0, 1.0, 1.0], level=0.80)
        assert narrow.upper - narrow.lower < wide.upper - wide.lower
        assert set(wide.to_dict()) >= {"estimate", "within", "between", "df"}

    def test_errors(self):
        """Test rejected inputs"""
        with pytest.raises(InvalidConfig):
            rubin_pool([1.0], [1.0])
        with pytest.raises(InvalidConfig):
            rubin_pool([1.0, 2.0], [1.0])
        with pytest.raises(OutOfRange):
            rubin_pool([1.0, 2.0], [1.0, -1.0])


class TestCompletedDataStatistics:
    """Tests for the average-inference statistics"""

    def test_values(self):
        """Test estimates and normal-theory variances on a small dataset"""
        frame = _frame(4)
        outcomes = np.column_stack([[1.0, 2.0, 3.0, 4.0], [2.0, 4.0, 6.0, 8.0]])
        imputations = _imputation_set(frame, [outcomes, outcomes])
        stats = completed_data_statistics(imputations.datasets[0])

        s2 = 5.0 / 3.0
        assert stats[Estimand.MEAN_Y0] == pytest.approx((2.5, s2 / 4))
        assert stats[Estimand.VAR_Y0] == pytest.approx((s2, 2 * s2**2 / 3))
        assert stats[Estimand.COV_Y0_Y1] == pytest.approx(
            (2 * s2, (s2 * 4 * s2 + (2 * s2) ** 2) / 3)
        )
        assert stats[Estimand.COV_Y0_X][0] == pytest.approx(s2)
        assert stats[Estimand.COV_Y1_X][0] == pytest.approx(2 * s2)

    def test_pooled(self, small_frame, spc_config):
        """Test that every estimand is pooled over the imputations"""
        pooled = pooled_statistics(multiply_impute(small_frame, spc_config))
        assert list(pooled) == list(Estimand)
        for estimate in pooled.values():
            assert estimate.m == spc_config.m
            assert estimate.lower <= estimate.estimate <= estimate.upper


class TestIte:
    """Tests for individual treatment-effect posteriors"""

    def test_draws_and_summary(self):
        """Test per-unit draws, interval and summary ordering"""
        frame = _frame(4)
        first = np.column_stack([np.zeros(4), [3.0, 1.0, 2.0, 0.0]])
        second = np.column_stack([np.zeros(4), [5.0, 1.0, 4.0, 2.0]])
        ite = ite_posterior(_imputation_set(frame, [first, second]))

        np.testing.assert_allclose(ite.mean, [4.0, 1.0, 3.0, 1.0])
        assert ite.draws.shape == (4, 2)
        assert (ite.lower <= ite.mean).all() and (ite.mean <= ite.upper).all()
        summary = ite.summary()
        assert summary["unit_id"].tolist() == ["u1", "u3", "u2", "u0"]
        assert list(summary.columns) == [
            "unit_id",
            "mean_tau",
            "lower",
            "upper",
            "p_positive",
            "in_sample",
        ]
        assert ite.summary(sort=False)["unit_id"].tolist() == ["u0", "u1", "u2", "u3"]

    def test_covers(self):
        """Test interval coverage of known effects"""
        ite = ItePosterior(
            unit_ids=np.array(["a", "b"]),
            draws=np.array([[0.0, 1.0, 2.0], [5.0, 6.0, 7.0]]),
            in_sample=np.array([True, True]),
        )
        assert ite.covers(np.array([1.0, 1.0])).tolist() == [True, False]

    def test_relabeling_arms_negates_effects(self):
        """Test that swapping which arm is treated flips the sign of each tau"""
        generator = np.random.default_rng(14)
        n = 200
        x = generator.normal(size=n)
        arm = np.arange(n) % 2
        y = np.where(arm == 1, 2.0 * x, -x) + generator.normal(0.0, 0.1, n)
        spc = SpcConfig(rho=RhoSpec.from_scalar(0.5), m=20, seed=15)

        def posterior(coded_arm, labels):
            frame = TrialFrame(
                unit_ids=[f"u{i}" for i in range(n)],
                arm=coded_arm,
                y_obs=y,
                covariates=x[:, None],
                covariate_names=("x",),
                arm_labels=labels,
            )
            return ite_posterior(multiply_impute(frame, spc))

        original = posterior(arm, ("ctl", "trt"))
        relabeled = posterior(1 - arm, ("trt", "ctl"))
        np.testing.assert_allclose(original.mean, 3.0 * x, atol=0.4)
        np.testing.assert_allclose(original.mean + relabeled.mean, 0.0, atol=0.15)

    def test_bad_contrast(self):
        """Test that equal or unknown arms are rejected"""
        frame = _frame(4)
        imputations = _imputation_set(frame, [np.zeros((4, 2))] * 2)
        with pytest.raises(InvalidConfig):
            ite_posterior(imputations, treated=0, control=0)
        with pytest.raises(InvalidConfig):
            ite_posterior(imputations, treated=2)


class TestPositiveEffectProbability:
    """Tests for P(tau_i > threshold)"""

    def test_all_above(self):
        """Test draws entirely above the threshold"""
        ite = ItePosterior(
            unit_ids=np.array(["a"]),
            draws=np.array([[0.5, 1.0, 2.0, 3.0]]),
            in_sample=np.array([True]),
        )
        assert positive_effect_probability(ite).tolist() == [1.0]
        assert positive_effect_probability(ite, threshold=1.5).tolist() == [0.5]

    def test_symmetric_draws(self):
        """Test draws symmetric around the threshold"""
        draws = np.random.default_rng(0).normal(2.0, 1.0, size=(1, 10000))
        ite = ItePosterior(
            unit_ids=np.array(["a"]), draws=draws, in_sample=np.array([True])
        )
        assert positive_effect_probability(ite, 2.0)[0] == pytest.approx(0.5, abs=0.02)


class TestAte:
    """Tests for the pooled average treatment effect"""

    def test_constant_shift(self):
        """Test Y(1) = Y(0) + c gives ATE = c"""
        frame = _frame(6)
        generator = np.random.default_rng(2)
        outcome_list = []
        for _ in range(3):
            y0 = generator.normal(size=6)
            outcome_list.append(np.column_stack([y0, y0 + 2.5]))
        pooled = ate(_imputation_set(frame, outcome_list))
        assert pooled.estimate == pytest.approx(2.5)
        assert pooled.covers(2.5)

    def test_synthetic_trial(self, small_frame, spc_config):
        """Test the ATE of the synthetic trial is near its true value 1"""
        pooled = ate(multiply_impute(small_frame, spc_config))
        assert abs(pooled.estimate - 1.0) < 1.0
        assert pooled.lower < pooled.estimate < pooled.upper


class TestVarianceDecomposition:
    """Tests for the systematic / idiosyncratic split of Var(tau)"""

    def test_identity(self, small_frame, spc_config):
        """Test Var(tau) = systematic + idiosyncratic in every imputation"""
        result = variance_decomposition(multiply_impute(small_frame, spc_config))
        table = result.per_imputation

        np.testing.assert_allclose(
            table["systematic"] + table["idiosyncratic"], table["var_tau"]
        )
        np.testing.assert_allclose(
            table["idiosyncratic"],
            table["var_eps_treated"]
            + table["var_eps_control"]
            - 2 * table["residual_covariance"],
            atol=1e-10,
        )
        assert result.total == pytest.approx(table["var_tau"].mean())

    def test_homogeneous_effects(self):
        """Test that effects linear in x leave no idiosyncratic variance"""
        x = np.linspace(0.0, 1.0, 10)
        frame = _frame(10, x)
        generator = np.random.default_rng(4)
        outcome_list = []
        for _ in range(2):
            y0 = generator.normal(size=10)
            outcome_list.append(np.column_stack([y0, y0 + 1.0 + 2.0 * x]))
        result = variance_decomposition(_imputation_set(frame, outcome_list))

        assert result.idiosyncratic == pytest.approx(0.0, abs=1e-20)
        assert result.systematic == pytest.approx(np.var(2.0 * x))

    def test_unknown_covariate(self, small_frame, spc_config):
        """Test that an unknown covariate name is rejected"""
        with pytest.raises(InvalidConfig):
            variance_decomposition(multiply_impute(small_frame, spc_config), ["w"])


class TestRecommendations:
    """Tests for treatment recommendation and imputation fans"""

    def test_recommend(self):
        """Test the best arm per unit and P(arm is best)"""
        frame = _frame(4)
        first = np.array([[0.0, 1.0], [2.0, 0.0], [0.0, 1.0], [0.0, 1.0]])
        second = np.array([[0.0, 2.0], [3.0, 0.0], [2.0, 1.5], [0.0, 1.0]])
        table = recommend_treatment(_imputation_set(frame, [first, second]))

        assert table["recommended"].tolist() == ["trt", "ctl", "trt", "trt"]
        assert table["p_best_trt"].tolist() == [1.0, 0.0, 0.5, 1.0]
        assert table["mean_ctl"].tolist() == [0.0, 2.5, 1.0, 0.0]

    def test_fan(self):
        """Test the long table of completed outcomes"""
        frame = _frame(4)
        imputations = _imputation_set(frame, [np.ones((4, 2)), np.zeros((4, 2))])
        fan = imputation_fan(imputations, ["u1", "u2"])

        assert len(fan) == 2 * 2 * 2
        columns = ["unit_id", "arm", "imputation", "value", "observed"]
        assert list(fan.columns) == columns
        u1 = fan[fan["unit_id"] == "u1"]
        assert u1[u1["arm"] == "trt"]["observed"].all()
        assert not u1[u1["arm"] == "ctl"]["observed"].any()
        assert len(imputation_fan(imputations)) == 4 * 2 * 2

    def test_fan_unknown_unit(self):
        """Test that an unknown unit id raises MisalignedUnits"""
        frame = _frame(4)
        imputations = _imputation_set(frame, [np.ones((4, 2))] * 2)
        with pytest.raises(MisalignedUnits):
            imputation_fan(imputations, ["u9"])
