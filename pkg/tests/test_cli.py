"""
Tests for the spcimpute command line
"""

import json

import pandas as pd
import pytest
from click.testing import CliRunner
from src.cli.main import cli, main, run_cli


def _impute_args(trial_csv, out, *extra):
    return [
        "impute",
        "--in",
        str(trial_csv),
        "--treatment",
        "arm",
        "--outcome",
        "days",
        "-x",
        "cd4",
        "--unit-id",
        "id",
        "--arm-code",
        "placebo",
        "--arm-code",
        "drug",
        "--m",
        "2",
        "--iterations",
        "2",
        "--out",
        str(out),
        *extra,
    ]


@pytest.fixture
def runner():
    return CliRunner()


class TestPool:
    """Tests for the pool command"""

    def test_pool(self, runner, tmp_path):
        """Test pooling two estimates with unit variance"""
        table = tmp_path / "estimates.csv"
        table.write_text("estimate,variance\n0,1\n2,1\n", encoding="utf-8")
        output = tmp_path / "pooled.json"

        result = runner.invoke(cli, ["pool", str(table), "-o", str(output)])

        assert result.exit_code == 0, result.output
        pooled = json.loads(output.read_text(encoding="utf-8"))
        assert pooled["estimate"] == pytest.approx(1.0)
        assert pooled["within"] == pytest.approx(1.0)
        assert pooled["between"] == pytest.approx(2.0)
        assert pooled["total"] == pytest.approx(4.0)
        assert pooled["m"] == 2

    def test_missing_column(self, tmp_path):
        """Test that a table without a variance column exits with code 2"""
        table = tmp_path / "estimates.csv"
        table.write_text("estimate\n0\n2\n", encoding="utf-8")
        assert main(["pool", str(table)]) == 2

    def test_non_numeric_cell(self, tmp_path):
        """Test that a cell that is not a number exits with code 2"""
        table = tmp_path / "estimates.csv"
        table.write_text("estimate,variance\nabc,1\n2,1\n", encoding="utf-8")
        assert main(["pool", str(table)]) == 2

    def test_blank_cell(self, tmp_path):
        """Test that a missing variance exits with code 2"""
        table = tmp_path / "estimates.csv"
        table.write_text("estimate,variance\n0,NA\n2,1\n", encoding="utf-8")
        assert main(["pool", str(table)]) == 2

    def test_empty_file(self, tmp_path):
        """Test that an empty file exits with code 2"""
        table = tmp_path / "estimates.csv"
        table.write_text("", encoding="utf-8")
        assert main(["pool", str(table)]) == 2

    def test_header_only(self, tmp_path):
        """Test that a table with no estimates exits with code 2"""
        table = tmp_path / "estimates.csv"
        table.write_text("estimate,variance\n", encoding="utf-8")
        assert main(["pool", str(table)]) == 2


class TestImpute:
    """Tests for the impute command"""

    def test_writes_completed_datasets(self, runner, trial_csv, tmp_path):
        """Test the output files and that observed outcomes pass through"""
        out = tmp_path / "run"
        args = _impute_args(trial_csv, out, "--rho", "0.5", "--seed", "5")
        result = runner.invoke(cli, args)

        assert result.exit_code == 0, result.output
        assert "Seed: 5" in result.output
        names = sorted(p.name for p in out.iterdir())
        assert names == [
            "imputation_001.csv",
            "imputation_002.csv",
            "ite_summary.csv",
            "manifest.json",
        ]

        source = pd.read_csv(trial_csv)
        completed = pd.read_csv(out / "imputation_001.csv")
        columns = ["id", "arm", "cd4", "days_placebo", "days_drug"]
        assert list(completed.columns) == columns
        placebo = (source["arm"] == "placebo").to_numpy()
        assert completed["days_placebo"].to_numpy()[placebo].tolist() == pytest.approx(
            source["days"].to_numpy()[placebo].tolist()
        )
        assert not completed.isna().any().any()

        summary = pd.read_csv(out / "ite_summary.csv")
        columns = ["unit_id", "mean_tau", "lower", "upper", "p_positive"]
        assert list(summary.columns) == columns
        assert summary["unit_id"].tolist() == source["id"].tolist()

        manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["settings"]["seed"] == 5
        assert manifest["settings"]["rho"] == {"0,1": 0.5}
        assert manifest["arm_labels"] == ["placebo", "drug"]

    def test_manifest_replay(self, runner, trial_csv, tmp_path):
        """Test that replaying a manifest reproduces every file byte for byte"""
        first = tmp_path / "first"
        second = tmp_path / "second"
        args = _impute_args(trial_csv, first, "--rho", "0.7", "--seed", "9")
        result = runner.invoke(cli, args)
        assert result.exit_code == 0, result.output

        result = runner.invoke(
            cli,
            [
                "--threads",
                "2",
                "impute",
                "--manifest",
                str(first / "manifest.json"),
                "--out",
                str(second),
            ],
        )
        assert result.exit_code == 0, result.output
        for path in first.iterdir():
            assert (second / path.name).read_bytes() == path.read_bytes()

    def test_config_file(self, runner, trial_csv, tmp_path):
        """Test that flags override the config file"""
        config_file = tmp_path / "run.yaml"
        config_file.write_text(
            "treatment: arm\noutcome: days\ncovariates: [cd4]\nrho: 0.4\nm: 4\n",
            encoding="utf-8",
        )
        out = tmp_path / "run"
        result = runner.invoke(
            cli,
            [
                "--config",
                str(config_file),
                "impute",
                "--in",
                str(trial_csv),
                "--m",
                "3",
                "--seed",
                "1",
                "--out",
                str(out),
            ],
        )

        assert result.exit_code == 0, result.output
        assert len(list(out.glob("imputation_*.csv"))) == 3
        manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["settings"]["rho"] == {"0,1": 0.4}

    def test_marginal_scale(self, runner, trial_csv, tmp_path):
        """Test that a marginal-scale rho is recorded on the partial scale"""
        out = tmp_path / "run"
        result = runner.invoke(
            cli,
            _impute_args(
                trial_csv, out, "--rho", "0.8", "--rho-scale", "marginal", "--seed", "2"
            ),
        )

        assert result.exit_code == 0, result.output
        manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["rho_scale"] == "marginal"
        assert -1.0 <= manifest["settings"]["rho"]["0,1"] <= 1.0

    def test_invalid_rho(self, trial_csv, tmp_path):
        """Test that rho outside [-1, 1] exits with code 2"""
        args = _impute_args(trial_csv, tmp_path / "run", "--rho", "1.5", "--seed", "1")
        assert main(args) == 2

    def test_unknown_column(self, trial_csv, tmp_path):
        """Test that a missing covariate column exits with code 2"""
        args = _impute_args(trial_csv, tmp_path / "run", "-x", "weight", "--seed", "1")
        assert main(args) == 2

    def test_unknown_config_key(self, trial_csv, tmp_path):
        """Test that a config file with an unknown key exits with code 2"""
        config_file = tmp_path / "run.json"
        config_file.write_text('{"rhoo": 0.5}', encoding="utf-8")
        args = ["--config", str(config_file)] + _impute_args(trial_csv, tmp_path / "r")
        assert main(args) == 2

    def test_ragged_row(self, tmp_path):
        """Test that a row with too many fields exits with code 2"""
        path = tmp_path / "trial.csv"
        path.write_text(
            "id,arm,days,cd4\nu1,placebo,1.0,2.0\nu2,drug,1.0,2.0,3.0,4.0\n",
            encoding="utf-8",
        )
        assert main(_impute_args(path, tmp_path / "run", "--seed", "1")) == 2

    def test_not_utf8(self, trial_csv, tmp_path):
        """Test that a Latin-1 encoded file exits with code 2"""
        path = tmp_path / "latin1.csv"
        text = trial_csv.read_text(encoding="utf-8").replace("placebo", "plac\u00e9bo")
        path.write_bytes(text.encode("latin-1"))
        assert main(_impute_args(path, tmp_path / "run", "--seed", "1")) == 2

    def test_missing_input(self, tmp_path):
        """Test that impute without --in is a usage error"""
        assert run_cli(["impute", "--treatment", "arm", "--outcome", "days"]) == 2


class TestPredict:
    """Tests for the predict command"""

    def test_predictions(self, runner, trial_csv, tmp_path):
        """Test one row per out-of-sample unit and imputation"""
        targets = tmp_path / "new.csv"
        targets.write_text("cd4\n300\n420\n", encoding="utf-8")
        args = _impute_args(trial_csv, tmp_path / "run", "--rho", "0.5", "--seed", "3")
        args[0] = "predict"
        args[1:1] = ["--out-of-sample", str(targets)]

        result = runner.invoke(cli, args)

        assert result.exit_code == 0, result.output
        predictions = pd.read_csv(tmp_path / "run" / "predictions.csv")
        assert list(predictions.columns) == [
            "unit_id",
            "imputation",
            "days_placebo",
            "days_drug",
        ]
        assert len(predictions) == 2 * 2
        assert predictions["imputation"].tolist() == [1, 2, 1, 2]
        assert not predictions.isna().any().any()

    def test_no_targets(self, trial_csv, tmp_path):
        """Test that predict without out-of-sample units is a usage error"""
        args = _impute_args(trial_csv, tmp_path / "run", "--seed", "3")
        args[0] = "predict"
        assert main(args) == 2


class TestSimulation:
    """Tests for the simulate and sensitivity commands"""

    def test_simulate(self, runner, tmp_path):
        """Test a small replication study end to end"""
        out = tmp_path / "sim"
        result = runner.invoke(
            cli,
            [
                "simulate",
                "--n",
                "40",
                "--m",
                "2",
                "--rho",
                "0,0.73",
                "--reps",
                "2",
                "--seed",
                "1",
                "--keep-draws",
                "--out",
                str(out),
            ],
        )

        assert result.exit_code == 0, result.output
        assert "Seed: 1" in result.output
        assert len(pd.read_csv(out / "table1.csv")) == 2
        assert len(pd.read_csv(out / "table2.csv")) == 14
        assert len(pd.read_csv(out / "ite_draws.csv")) == 2 * 40 * 2

    def test_sensitivity(self, runner, tmp_path):
        """Test a two-point sweep with the empirical interval"""
        out = tmp_path / "sweep"
        result = runner.invoke(
            cli,
            [
                "sensitivity",
                "--grid",
                "0,0.5",
                "--n",
                "40",
                "--m",
                "2",
                "--seed",
                "4",
                "--ite-interval",
                "empirical",
                "--out",
                str(out),
            ],
        )

        assert result.exit_code == 0, result.output
        table = pd.read_csv(out / "sensitivity.csv")
        assert table["rho"].tolist() == [0.0, 0.5]

    def test_zero_replications(self, tmp_path):
        """Test that --reps 0 is rejected rather than replaced by the default"""
        args = ["simulate", "--n", "40", "--m", "2", "--reps", "0", "--seed", "1"]
        assert main(args + ["--out", str(tmp_path)]) == 2

    def test_grid_out_of_range(self, tmp_path):
        """Test that a grid value above 1 exits with code 2"""
        args = ["sensitivity", "--grid", "0,1.5", "--n", "40", "--m", "2"]
        assert main(args + ["--seed", "1", "--out", str(tmp_path)]) == 2
