"""Tests for cli module."""

import json

import pytest
from click.testing import CliRunner

from src.cli import EXIT_CONVERGENCE, EXIT_USAGE, EXIT_VERIFY_FAILED, THREADS_ENVVAR, main, run
from src.errors import ConvergenceError
from src.mc import McConfig
from src.params import EvalConfig, ModelParams
from src.verify import CheckResult, VerifyReport

pytestmark = pytest.mark.cli


@pytest.fixture
def runner():
    return CliRunner()


class TestGridCommands:
    """Tests for commands that evaluate on a grid."""

    def test_mineig_cdf_csv(self, runner):
        """Test annotated CSV with one row per grid point."""
        result = runner.invoke(
            main,
            ["mineig-cdf", "--n", "2", "--m", "2", "--mu", "0", "--x-min", "0.5", "--x-max", "1.5", "--points", "3",
             "--format", "csv"],
        )
        assert result.exit_code == 0, result.output
        lines = result.output.splitlines()
        assert lines[0].startswith("# n=2 m=2")
        assert lines[1] == "x,value"
        assert len(lines) == 5
        x, value = lines[3].split(",")
        assert float(x) == 1.0
        assert float(value) == pytest.approx(1.0 - 2.718281828459045**-2.0, rel=1e-10)

    def test_demmel_cdf_json(self, runner):
        """Test the JSON curve for the square central case."""
        result = runner.invoke(
            main, ["demmel-cdf", "--n", "2", "--m", "2", "--x-min", "3", "--x-max", "5", "--points", "2"]
        )
        assert result.exit_code == 0, result.output
        data = json.loads(result.output)
        assert data["grid"] == [3.0, 5.0]
        assert data["values"][0] == pytest.approx((1 / 3) ** 3, rel=1e-10)
        assert data["meta"] == {"quantity": "demmel_cdf"}

    def test_threads_do_not_change_output(self, runner):
        """Test the worker count leaves values unchanged."""
        args = ["demmel-pdf", "--n", "2", "--m", "3", "--mu", "1", "--x-min", "2.5", "--x-max", "8", "--points", "6"]
        one = runner.invoke(main, ["--threads", "1"] + args)
        four = runner.invoke(main, args, env={THREADS_ENVVAR: "4"})
        assert one.exit_code == four.exit_code == 0
        assert json.loads(one.output)["values"] == json.loads(four.output)["values"]

    def test_invalid_threads_envvar(self, runner):
        result = runner.invoke(main, ["fixed-trace-cdf", "--n", "2", "--m", "2", "--x-min", "0.1", "--x-max", "0.4"],
                               env={THREADS_ENVVAR: "0"})
        assert result.exit_code == EXIT_USAGE

    def test_output_file(self, runner, temp_dir):
        """Test --output writes the file and reports it."""
        path = temp_dir / "out" / "curve.csv"
        result = runner.invoke(
            main,
            ["fixed-trace-cdf", "--n", "2", "--m", "2", "--x-min", "0.1", "--x-max", "0.4", "--points", "4",
             "--format", "csv", "--output", str(path)],
        )
        assert result.exit_code == 0, result.output
        assert "Saved to" in result.output
        assert path.read_text(encoding="utf-8").splitlines()[1] == "x,value"


class TestConfigFile:
    """Tests for --config."""

    def test_file_supplies_model(self, runner, config_file):
        """Test n, m and mu come from the file when flags are absent."""
        result = runner.invoke(main, ["--config", str(config_file), "charpoly-avg", "--z", "1"])
        assert result.exit_code == 0, result.output
        data = json.loads(result.output)
        assert data["params"] == {"n": 2, "m": 3, "alpha": 1, "mu": 0.5}
        assert data["config"]["rel_tol"] == 1e-10
        assert data["value"] > 0

    def test_flag_overrides_file(self, runner, config_file):
        result = runner.invoke(main, ["--config", str(config_file), "charpoly-avg", "--z", "1", "--mu", "2"])
        assert result.exit_code == 0, result.output
        assert json.loads(result.output)["params"]["mu"] == 2.0

    def test_missing_config_file(self, runner, temp_dir):
        result = runner.invoke(main, ["--config", str(temp_dir / "nope.conf"), "charpoly-avg", "--z", "1"])
        assert result.exit_code == EXIT_USAGE

    def test_unknown_key(self, runner, temp_dir):
        path = temp_dir / "bad.conf"
        path.write_text("colour = red\n", encoding="utf-8")
        result = runner.invoke(main, ["--config", str(path), "charpoly-avg", "--n", "2", "--m", "2", "--z", "1"])
        assert result.exit_code == EXIT_USAGE
        assert "unknown key" in result.output


class TestErrors:
    """Tests for exit codes."""

    def test_invalid_parameters(self, runner):
        """Test m < n maps to the usage exit code."""
        result = runner.invoke(main, ["charpoly-avg", "--n", "3", "--m", "2", "--z", "1"])
        assert result.exit_code == EXIT_USAGE
        assert "Invalid input" in result.output

    def test_missing_dimension(self, runner):
        result = runner.invoke(main, ["charpoly-avg", "--m", "2", "--z", "1"])
        assert result.exit_code == EXIT_USAGE
        assert "--n is required" in result.output

    def test_missing_seed(self, runner):
        """Test Monte Carlo commands require an explicit seed."""
        result = runner.invoke(main, ["sample", "--n", "2", "--m", "2"])
        assert result.exit_code == EXIT_USAGE

    def test_convergence_error(self, runner, mocker):
        mocker.patch("src.cli.recip_charpoly_avg", side_effect=ConvergenceError("series did not converge"))
        result = runner.invoke(main, ["charpoly-avg", "--n", "2", "--m", "2", "--z", "1"])
        assert result.exit_code == EXIT_CONVERGENCE
        assert "non-convergence" in result.output


class TestSpecfun:
    """Tests for the specfun command."""

    def test_tricomi_psi(self, runner):
        result = runner.invoke(main, ["specfun", "tricomi_psi", "1", "1", "1"])
        assert result.exit_code == 0, result.output
        data = json.loads(result.output)
        assert data["value"] == pytest.approx(0.596347362323194, rel=1e-9)
        assert data["inputs"] == {"a": 1.0, "c": 1.0, "z": 1.0}
        assert data["params"] is None

    def test_pochhammer_csv(self, runner):
        result = runner.invoke(main, ["specfun", "pochhammer", "2", "3", "--format", "csv"])
        assert result.exit_code == 0, result.output
        assert result.output.splitlines()[-1] == "pochhammer,24"

    def test_wrong_argument_count(self, runner):
        result = runner.invoke(main, ["specfun", "hyp1f1", "1", "2"])
        assert result.exit_code == EXIT_USAGE

    def test_unknown_function(self, runner):
        result = runner.invoke(main, ["specfun", "gamma", "1"])
        assert result.exit_code == EXIT_USAGE


class TestSample:
    """Tests for the sample command."""

    def test_csv(self, runner):
        result = runner.invoke(main, ["sample", "--n", "2", "--m", "3", "--mu", "1", "--samples", "5", "--seed", "1"])
        assert result.exit_code == 0, result.output
        lines = result.output.splitlines()
        assert "seed=1" in lines[0]
        assert lines[1] == "draw,lambda_1,lambda_2"
        assert len(lines) == 7

    def test_json_reproducible(self, runner):
        args = ["sample", "--n", "2", "--m", "2", "--samples", "4", "--seed", "9", "--format", "json"]
        first = json.loads(runner.invoke(main, args).output)
        second = json.loads(runner.invoke(main, args).output)
        assert first == second
        assert len(first["eig_rows"]) == 4


class TestVerify:
    """Tests for the verify command."""

    def test_passing_suite(self, runner, temp_dir):
        """Test JSON and HTML reports for a small trace run."""
        out = temp_dir / "report.json"
        page = temp_dir / "report.html"
        result = runner.invoke(
            main,
            ["verify", "--suite", "trace", "--n", "2", "--m", "4", "--mu", "1.5", "--samples", "2000", "--seed", "42",
             "--output", str(out), "--html", str(page)],
        )
        assert result.exit_code == 0, result.output
        assert "Suite trace passed" in result.output
        assert json.loads(out.read_text(encoding="utf-8"))["passed"] is True
        assert "badge-pass" in page.read_text(encoding="utf-8")

    def test_failing_suite_exit_code(self, runner, mocker):
        """Test a failed check warns and exits with the verification code."""
        report = VerifyReport(
            "trace", ModelParams(2, 2, 0.0), McConfig(10, seed=1), EvalConfig(), (CheckResult("trace_z", 9.0, 4.0),)
        )
        mocker.patch("src.cli.run_suite", return_value=report)
        result = runner.invoke(main, ["verify", "--suite", "trace", "--n", "2", "--m", "2", "--seed", "1"])
        assert result.exit_code == EXIT_VERIFY_FAILED
        assert "Warning: trace_z = 9 exceeds threshold 4" in result.output


class TestRun:
    """Tests for the programmatic entry point."""

    def test_success(self, capsys):
        assert run(["specfun", "pochhammer", "1", "3"]) == 0
        assert json.loads(capsys.readouterr().out)["value"] == 6.0

    def test_usage_error(self, capsys):
        assert run(["mineig-cdf", "--n", "2"]) == EXIT_USAGE

    def test_library_error(self, capsys):
        assert run(["charpoly-avg", "--n", "2", "--m", "2", "--z", "-1"]) == EXIT_USAGE

    def test_help(self, capsys):
        assert run(["--help"]) == 0
        assert "mineig-cdf" in capsys.readouterr().out
