"""Tests for demmel module."""

import math

import numpy as np
import pytest

from src.demmel import (
    DemmelQuery,
    InversionTermSet,
    demmel_cdf,
    demmel_cdf_grid,
    demmel_mgf,
    demmel_pdf,
    demmel_pdf_alpha0,
    demmel_pdf_central,
    demmel_pdf_talbot,
    demmel_tail,
    fixed_trace_mineig_cdf,
    fixed_trace_mineig_pdf,
    inversion_terms,
    laguerre_minors,
)
from src.errors import ParameterError, WishartLabError
from src.numerics import composite_legendre
from src.params import ModelParams


def _central_square_pdf(v):
    """n = 2, alpha = 0, mu = 0: 6 (v-2)^2 / v^4."""
    return 6.0 * (v - 2.0) ** 2 / v**4


def _central_square_cdf(v):
    """Same case: (1 - 2/v)^3."""
    return (1.0 - 2.0 / v) ** 3


class TestQuery:
    """Tests for DemmelQuery validation."""

    def test_n1_rejected(self):
        """Test V is degenerate for n = 1."""
        with pytest.raises(ParameterError):
            DemmelQuery(ModelParams(1, 3, 1.0), 2.0)

    def test_nan_rejected(self, rect_params):
        """Test NaN evaluation points."""
        with pytest.raises(ParameterError):
            DemmelQuery(rect_params, math.nan)

    def test_infinity_accepted(self, rect_params):
        """Test v = +inf is a valid c.d.f. point."""
        assert DemmelQuery(rect_params, math.inf).v == math.inf


class TestDensity:
    """Tests for the density of V."""

    @pytest.mark.parametrize("v", [2.5, 3.0, 5.0, 20.0])
    def test_central_square_closed_form(self, v):
        """Test 6 (v-2)^2 / v^4."""
        params = ModelParams(2, 2, 0.0)
        assert demmel_pdf(DemmelQuery(params, v)) == pytest.approx(_central_square_pdf(v), rel=1e-12)
        assert demmel_pdf_central(params, v) == pytest.approx(_central_square_pdf(v), rel=1e-12)
        assert demmel_pdf_alpha0(params, v) == pytest.approx(_central_square_pdf(v), rel=1e-12)

    def test_zero_below_support(self, rect_params):
        """Test f_V vanishes for v <= n and at infinity."""
        for v in (0.5, 1.0, 2.0, math.inf):
            assert demmel_pdf(DemmelQuery(rect_params, v)) == 0.0

    @pytest.mark.parametrize("mu", [0.5, 2.0, 5.0])
    def test_general_matches_alpha0_series(self, mu):
        """Test termwise inversion against the square-case series."""
        params = ModelParams(2, 2, mu)
        for v in (2.5, 4.0, 12.0):
            general = demmel_pdf(DemmelQuery(params, v))
            assert general == pytest.approx(demmel_pdf_alpha0(params, v), rel=1e-9)

    @pytest.mark.parametrize("n, m, mu", [(2, 3, 1.0), (2, 4, 1.5), (3, 4, 0.8)])
    def test_general_matches_talbot(self, n, m, mu):
        """Test termwise inversion against fixed-Talbot inversion."""
        params = ModelParams(n, m, mu)
        for v in (n + 0.7, 3.0 * n, 10.0 * n):
            q = DemmelQuery(params, v)
            assert demmel_pdf(q) == pytest.approx(demmel_pdf_talbot(q), rel=1e-6)

    def test_central_dispatch_matches_general(self):
        """Test the mu = 0 closed term set against the general path."""
        params = ModelParams(2, 4, 0.0)
        for v in (2.5, 6.0):
            q = DemmelQuery(params, v)
            assert demmel_pdf(q, use_special_cases=False) == pytest.approx(demmel_pdf(q), rel=1e-11)

    def test_nonnegative(self, rect_params):
        """Test the density is never negative."""
        assert all(demmel_pdf(DemmelQuery(rect_params, v)) >= 0.0 for v in np.linspace(2.01, 40.0, 25))

    @pytest.mark.parametrize("n, alpha", [(2, 0), (2, 1), (2, 3), (3, 0), (3, 2)])
    def test_general_is_continuous_at_zero_mu(self, n, alpha):
        """Test the general inversion at mu = 1e-8 against the central density."""
        central = ModelParams(n, n + alpha, 0.0)
        nearly_central = ModelParams(n, n + alpha, 1e-8)
        for v in (n + 0.3, 2.0 * n, 5.0 * n, 25.0 * n):
            general = demmel_pdf(DemmelQuery(nearly_central, v), use_special_cases=False)
            assert general == pytest.approx(demmel_pdf_central(central, v), rel=1e-6, abs=1e-14), v

    def test_negative_density_warns(self, rect_params, mocker):
        """Test a negative inverted value is logged and clipped to 0."""
        mocker.patch("src.demmel.InversionTermSet.invert", return_value=-1e12)
        log = mocker.patch("src.demmel.logger")
        assert demmel_pdf(DemmelQuery(rect_params, 5.0)) == 0.0
        log.warning.assert_called_once()
        assert "negative" in log.warning.call_args[0][0]

    def test_rounding_level_negative_is_silent(self, rect_params, mocker):
        """Test round-off below zero is clipped without a warning."""
        mocker.patch("src.demmel.InversionTermSet.invert", return_value=-1e-30)
        log = mocker.patch("src.demmel.logger")
        assert demmel_pdf(DemmelQuery(rect_params, 5.0)) == 0.0
        log.warning.assert_not_called()


class TestInversionTerms:
    """Tests for the Laurent term collection."""

    def test_powers_are_positive(self, rect_params):
        """Test every term inverts to a power of (v - n)."""
        terms = inversion_terms(rect_params, 5.0)
        assert terms.shift == 2.0
        assert all(power >= 1 for _coeff, power in terms.terms)

    def test_requires_v_above_n(self, rect_params):
        """Test v <= n is rejected."""
        with pytest.raises(ParameterError):
            inversion_terms(rect_params, 2.0)

    def test_invert_vanishes_before_shift(self):
        """Test the inverse is zero for t <= shift."""
        terms = InversionTermSet(((1.0, 2),), shift=3.0)
        assert terms.invert(2.0) == 0.0
        assert terms.invert(5.0) == pytest.approx(2.0)

    def test_rejects_constant_term(self):
        """Test power 0 is not invertible."""
        with pytest.raises(WishartLabError):
            InversionTermSet(((1.0, 0),), shift=2.0)

    def test_minors_square_case(self):
        """Test alpha = 0 leaves the empty minor 1."""
        assert laguerre_minors(3, 0)[0].coeffs == (1.0,)
        assert len(laguerre_minors(2, 2)) == 3


class TestCdf:
    """Tests for the c.d.f. of V."""

    @pytest.mark.parametrize("v", [2.5, 4.0, 10.0, 100.0])
    def test_central_square_closed_form(self, v):
        """Test (1 - 2/v)^3."""
        q = DemmelQuery(ModelParams(2, 2, 0.0), v)
        assert demmel_cdf(q) == pytest.approx(_central_square_cdf(v), rel=1e-12)

    @pytest.mark.parametrize("n, m, mu", [(2, 2, 1.0), (2, 3, 0.0), (2, 4, 1.5), (3, 3, 2.0)])
    def test_total_probability(self, n, m, mu):
        """Test Pr(V <= inf) = 1."""
        q = DemmelQuery(ModelParams(n, m, mu), math.inf)
        assert demmel_cdf(q) == pytest.approx(1.0, rel=1e-7)

    @pytest.mark.parametrize("n", [2, 3])
    @pytest.mark.parametrize("alpha", [0, 1, 2])
    @pytest.mark.parametrize("mu", [0.0, 1.0])
    def test_normalization_grid(self, n, alpha, mu):
        """Test the density integrates to one over (n, inf)."""
        q = DemmelQuery(ModelParams(n, n + alpha, mu), math.inf)
        assert demmel_cdf(q) == pytest.approx(1.0, abs=1e-6)

    def test_out_of_range_probability_warns(self, rect_params, mocker):
        """Test a quadrature result above 1 is logged and clipped."""
        mocker.patch("src.demmel.composite_legendre", return_value=1.01)
        log = mocker.patch("src.demmel.logger")
        assert demmel_cdf(DemmelQuery(rect_params, 7.0)) == 1.0
        log.warning.assert_called_once()

    def test_tail_complements_cdf(self, rect_params):
        """Test cdf + tail = 1."""
        q = DemmelQuery(rect_params, 7.0)
        assert demmel_cdf(q) + demmel_tail(q) == pytest.approx(1.0, rel=1e-8)

    def test_support_edges(self, rect_params):
        """Test values at and below n, and the tail at infinity."""
        assert demmel_cdf(DemmelQuery(rect_params, 2.0)) == 0.0
        assert demmel_tail(DemmelQuery(rect_params, 1.5)) == 1.0
        assert demmel_tail(DemmelQuery(rect_params, math.inf)) == 0.0

    def test_grid_matches_pointwise(self, rect_params):
        """Test the accumulated grid against independent evaluations."""
        points = [1.0, 2.0, 2.5, 4.0, 9.0, 30.0, math.inf]
        grid = demmel_cdf_grid(rect_params, points)
        for v, value in zip(points, grid):
            assert value == pytest.approx(demmel_cdf(DemmelQuery(rect_params, v)), rel=1e-8, abs=1e-12)

    def test_grid_needs_ascending_points(self, rect_params):
        """Test descending grids are rejected."""
        with pytest.raises(ParameterError):
            demmel_cdf_grid(rect_params, [5.0, 3.0])


class TestMgf:
    """Tests for the moment generating function."""

    @pytest.mark.parametrize("n, m, mu", [(2, 2, 0.0), (2, 3, 1.0), (3, 4, 0.5)])
    def test_total_probability(self, n, m, mu):
        """Test E[e^{0 V}] = 1."""
        assert demmel_mgf(ModelParams(n, m, mu), 0.0) == pytest.approx(1.0, rel=1e-8)

    def test_central_square_closed_form(self):
        """Test against integral_0^1 3 (1-u)^2 e^{-2s/u} du."""
        s = 0.3
        expected = composite_legendre(lambda u: 3.0 * (1.0 - u) ** 2 * math.exp(-2.0 * s / u), 0.0, 1.0)
        assert demmel_mgf(ModelParams(2, 2, 0.0), s) == pytest.approx(expected, rel=1e-8)

    def test_matches_density_transform(self):
        """Test E[e^{-sV}] against the Laplace transform of the density."""
        params = ModelParams(2, 3, 1.0)
        s = 0.5

        def integrand(u):
            v = 2.0 / u
            return math.exp(-s * v) * demmel_pdf(DemmelQuery(params, v)) * 2.0 / (u * u)

        expected = composite_legendre(integrand, 0.0, 1.0)
        assert demmel_mgf(params, s) == pytest.approx(expected, rel=1e-6)

    @pytest.mark.parametrize("n, m, mu", [(2, 3, 1.0), (2, 2, 0.5), (3, 4, 0.5)])
    @pytest.mark.parametrize("s", [0.1, 1.0])
    def test_matches_density_transform_grid(self, n, m, mu, s):
        """Test E[e^{-sV}] against the Laplace transform of the density in u = n/v."""
        params = ModelParams(n, m, mu)

        def integrand(u):
            v = n / u
            return math.exp(-s * v) * demmel_pdf(DemmelQuery(params, v)) * n / (u * u)

        expected = composite_legendre(integrand, 0.0, 1.0, panels=16, order=20)
        assert demmel_mgf(params, s) == pytest.approx(expected, abs=1e-5)

    def test_negative_s_rejected(self, rect_params):
        """Test s >= 0 is required."""
        with pytest.raises(ParameterError):
            demmel_mgf(rect_params, -0.1)


class TestFixedTrace:
    """Tests for the minimum eigenvalue of W / tr(W)."""

    def test_support(self, rect_params):
        """Test F = 1 from x = 1/n on and f = 0 there."""
        assert fixed_trace_mineig_cdf(rect_params, 0.5) == 1.0
        assert fixed_trace_mineig_pdf(rect_params, 0.6) == 0.0

    def test_central_square_closed_form(self):
        """Test Pr(1/V <= x) = 1 - (1 - 2x)^3."""
        params = ModelParams(2, 2, 0.0)
        for x in (0.05, 0.2, 0.4):
            assert fixed_trace_mineig_cdf(params, x) == pytest.approx(1.0 - (1.0 - 2.0 * x) ** 3, rel=1e-11)

    def test_density_is_transformed_demmel_density(self, rect_params):
        """Test f(x) = f_V(1/x) / x^2."""
        x = 0.2
        expected = demmel_pdf(DemmelQuery(rect_params, 1.0 / x)) / x**2
        assert fixed_trace_mineig_pdf(rect_params, x) == pytest.approx(expected, rel=1e-14)

    def test_nonpositive_x(self, rect_params):
        """Test x > 0 is required."""
        with pytest.raises(ParameterError):
            fixed_trace_mineig_cdf(rect_params, 0.0)
