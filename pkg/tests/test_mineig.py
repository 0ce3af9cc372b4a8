"""Tests for mineig module."""

import math

import numpy as np
import pytest

from src.eigdist import EigVector, joint_pdf
from src.errors import ParameterError
from src.mineig import (
    MinEigQuery,
    mineig_cdf,
    mineig_cdf_alpha0,
    mineig_cdf_central,
    mineig_survival,
    psi_i,
    psi_i_phi3,
)
from src.numerics import composite_legendre
from src.params import ModelParams


def test_query_rejects_nonpositive_threshold(rect_params):
    """Test x must be finite and positive."""
    for x in (0.0, -1.0, math.inf, math.nan):
        with pytest.raises(ParameterError):
            MinEigQuery(rect_params, x)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_central_square_is_exponential(n):
    """Test mu = 0, alpha = 0 gives 1 - e^{-nx}."""
    params = ModelParams(n, n, 0.0)
    for x in (0.1, 0.5, 1.0, 2.0):
        assert mineig_cdf(MinEigQuery(params, x)) == pytest.approx(-math.expm1(-n * x), rel=1e-12)


def test_scalar_case_matches_density_integral():
    """Test n = 1: F(x) equals the integral of the scalar density."""
    params = ModelParams(1, 3, 2.0)

    def density(t):
        return joint_pdf(params, EigVector((t,))) if t > 0 else 0.0

    for x in (0.5, 1.5, 4.0):
        expected = composite_legendre(density, 0.0, x, panels=8, order=20)
        assert mineig_cdf(MinEigQuery(params, x)) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("mu", [0.5, 2.0, 10.0])
def test_alpha0_general_matches_phi3(n, mu):
    """Test the general determinant against the square-case Phi3 form."""
    params = ModelParams(n, n, mu)
    for x in np.linspace(0.02, 4.0, 50):
        general = mineig_cdf(MinEigQuery(params, x), use_special_cases=False)
        assert general == pytest.approx(mineig_cdf_alpha0(params, x), rel=1e-8, abs=1e-13), x


@pytest.mark.parametrize("n, m", [(2, 3), (2, 5), (3, 4)])
def test_central_general_matches_closed_form(n, m):
    """Test the general determinant at mu = 0 against the central determinant."""
    params = ModelParams(n, m, 0.0)
    for x in (0.3, 1.2):
        general = mineig_cdf(MinEigQuery(params, x), use_special_cases=False)
        assert general == pytest.approx(mineig_cdf_central(params, x), rel=1e-10, abs=1e-13)


@pytest.mark.parametrize("i", [1, 2, 3])
def test_psi_kummer_and_phi3_forms_agree(rect_params, i):
    """Test the two series forms of psi_i."""
    for x in (0.1, 0.8, 2.5):
        assert psi_i(rect_params, i, x) == pytest.approx(psi_i_phi3(rect_params, i, x), rel=1e-10)


def test_psi_row_index_checked(rect_params):
    """Test i must be in [1, alpha + 1]."""
    with pytest.raises(ParameterError):
        psi_i(rect_params, 0, 1.0)
    with pytest.raises(ParameterError):
        psi_i(rect_params, 4, 1.0)


def test_cdf_is_monotone_and_bounded(rect_params):
    """Test F is nondecreasing in x and stays in [0, 1]."""
    values = [mineig_cdf(MinEigQuery(rect_params, x)) for x in (0.01, 0.1, 0.3, 0.6, 1.0, 2.0, 4.0)]
    assert all(0.0 <= v <= 1.0 for v in values)
    assert all(b >= a for a, b in zip(values, values[1:]))
    assert values[-1] > 0.999


@pytest.mark.parametrize("n", [1, 2, 4, 6])
@pytest.mark.parametrize("alpha", [0, 1, 2, 3])
def test_general_is_continuous_at_zero_mu(n, alpha):
    """Test the general determinant at mu = 1e-8 against the central closed form."""
    central = ModelParams(n, n + alpha, 0.0)
    nearly_central = ModelParams(n, n + alpha, 1e-8)
    for x in (0.05, 0.3, 1.0, 3.0):
        general = mineig_cdf(MinEigQuery(nearly_central, x), use_special_cases=False)
        assert general == pytest.approx(mineig_cdf_central(central, x), abs=1e-4), x


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
@pytest.mark.parametrize("alpha", [0, 1, 2, 3, 4])
def test_cdf_grid_is_monotone_and_bounded(n, alpha):
    """Test F stays in [0, 1] and is nondecreasing over a parameter grid."""
    for mu in (0.0, 0.5, 2.0, 10.0):
        params = ModelParams(n, n + alpha, mu)
        values = [mineig_cdf(MinEigQuery(params, x)) for x in (0.01, 0.05, 0.2, 0.5, 1.0, 2.0, 5.0)]
        assert all(0.0 <= v <= 1.0 for v in values), mu
        assert all(b >= a - 1e-10 for a, b in zip(values, values[1:])), (mu, values)


def test_survival_complements_cdf(rect_params):
    """Test survival + cdf = 1."""
    q = MinEigQuery(rect_params, 0.4)
    assert mineig_survival(q) + mineig_cdf(q) == pytest.approx(1.0, rel=1e-13)


def test_special_case_guards():
    """Test closed forms reject parameters they do not cover."""
    with pytest.raises(ParameterError):
        mineig_cdf_alpha0(ModelParams(2, 3, 1.0), 0.5)
    with pytest.raises(ParameterError):
        mineig_cdf_central(ModelParams(2, 3, 1.0), 0.5)
