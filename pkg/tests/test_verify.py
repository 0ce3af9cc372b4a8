"""Tests for verify module."""

import math

import numpy as np
import pytest

from src.errors import ParameterError
from src.mc import McConfig
from src.params import EvalConfig, ModelParams
from src.verify import DEFAULT_THRESHOLDS, SUITES, CheckResult, quantile_grid, run_suite


class TestCheckResult:
    """Tests for pass/fail decisions."""

    def test_below_threshold_passes(self):
        assert CheckResult("x", 0.1, 0.2).passed

    @pytest.mark.parametrize("statistic", [0.2, 0.3, math.nan, math.inf])
    def test_fails(self, statistic):
        """Test reaching the threshold or a non-finite statistic fails."""
        assert not CheckResult("x", statistic, 0.2).passed


def test_quantile_grid_distinct_and_sorted():
    """Test repeated sample values collapse to one grid point."""
    grid = quantile_grid(np.array([1.0, 1.0, 1.0, 2.0, 3.0, math.inf]), points=5)
    assert grid[0] == 1.0
    assert grid[-1] == 3.0
    assert np.all(np.diff(grid) > 0)


def test_quantile_grid_needs_finite_values():
    with pytest.raises(ParameterError):
        quantile_grid(np.array([math.nan]))


def test_every_suite_has_a_threshold():
    assert set(SUITES) == set(DEFAULT_THRESHOLDS)


class TestRunSuite:
    """Tests for suite dispatch."""

    def test_unknown_suite(self, rect_params, small_mc):
        with pytest.raises(ParameterError, match="unknown suite"):
            run_suite("spectrum", rect_params, small_mc)

    @pytest.mark.parametrize("suite", ["demmel", "mgf"])
    def test_demmel_suites_need_two_eigenvalues(self, suite, small_mc):
        """Test V is undefined for n = 1."""
        with pytest.raises(ParameterError, match="n >= 2"):
            run_suite(suite, ModelParams(1, 3, 1.0), small_mc)

    def test_trace_suite(self, rect_params, small_mc):
        """Test the trace moment on a small sample."""
        report = run_suite("trace", rect_params, small_mc)
        assert report.passed
        data = report.to_dict()
        assert data["suite"] == "trace"
        assert data["mc"]["seed"] == 42
        assert data["checks"][0]["name"] == "trace_z"
        assert data["checks"][0]["details"]["analytic"] == pytest.approx(9.5)

    def test_threshold_override(self, rect_params, small_mc):
        """Test a zero threshold can never pass."""
        report = run_suite("trace", rect_params, small_mc, threshold=0.0)
        assert not report.passed
        assert report.checks[0].threshold == 0.0

    @pytest.mark.mc
    def test_charpoly_suite(self, rect_params):
        report = run_suite("charpoly", rect_params, McConfig(20_000, seed=3), z=1.0, threshold=5.0)
        assert report.passed

    @pytest.mark.mc
    def test_mgf_suite(self, rect_params):
        report = run_suite("mgf", rect_params, McConfig(20_000, seed=4), s=0.5, threshold=5.0)
        assert report.passed

    @pytest.mark.mc
    @pytest.mark.slow
    def test_demmel_suite(self, rect_params):
        """Test the Demmel c.d.f. against sampled V."""
        report = run_suite("demmel", rect_params, McConfig(100_000, seed=5, streams=4), threads=2)
        assert report.checks[0].name == "ks_demmel"
        assert report.passed

    @pytest.mark.mc
    @pytest.mark.slow
    def test_mineig_suite(self, rect_params):
        """Test the minimum eigenvalue c.d.f. against sampled l_min."""
        report = run_suite(
            "mineig", rect_params, McConfig(200_000, seed=6, streams=4), EvalConfig(), threads=2
        )
        assert report.checks[0].name == "ks_mineig"
        assert report.passed


@pytest.mark.mc
@pytest.mark.slow
class TestAcceptanceRuns:
    """Full-size Monte Carlo runs at the default thresholds."""

    @pytest.mark.parametrize("n, m, mu", [(2, 2, 1.0), (2, 4, 1.5), (3, 3, 2.0), (3, 5, 0.0)])
    def test_mineig_million_draws(self, n, m, mu):
        """Test KS distance below 0.005 for l_min at 10^6 draws."""
        report = run_suite("mineig", ModelParams(n, m, mu), McConfig(1_000_000, seed=101, streams=8), threads=4)
        assert report.checks[0].threshold == 0.005
        assert report.passed, report.checks[0].statistic

    @pytest.mark.parametrize("n, m, mu", [(2, 2, 1.0), (2, 3, 1.0), (3, 3, 0.5)])
    def test_demmel_hundred_thousand_draws(self, n, m, mu):
        """Test KS distance below 0.01 for V at 10^5 draws."""
        report = run_suite("demmel", ModelParams(n, m, mu), McConfig(100_000, seed=202, streams=4), threads=4)
        assert report.checks[0].threshold == 0.01
        assert report.passed, report.checks[0].statistic
