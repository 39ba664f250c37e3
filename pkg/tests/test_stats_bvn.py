"""Bivariate normal CDF against closed forms and brute-force integration."""

import math

import numpy as np
import pytest
from scipy import integrate
from scipy.stats import norm as scipy_norm

from sourcescope.errors import DomainError
from sourcescope.stats import bivariate_normal_cdf, normal_cdf


def _bvn_quadrature(h, k, rho):
    """Brute-force oracle: 2-D quadrature of the bivariate normal density.

    Only reliable for moderate correlation; near |rho| = 1 the density
    collapses onto the diagonal and the 2-D integrator cannot resolve it.
    """
    s = math.sqrt(1.0 - rho * rho)

    def density(y, x):
        z = (x * x - 2.0 * rho * x * y + y * y) / (2.0 * s * s)
        return math.exp(-z) / (2.0 * math.pi * s)

    value, err = integrate.dblquad(density, -9.0, h, -9.0, k, epsabs=1e-12)
    assert err < 1e-7
    return value


def _bvn_conditional(h, k, rho):
    """Independent 1-D oracle: integrate phi(x) * Phi((k - rho x)/s) to h."""
    s = math.sqrt(1.0 - rho * rho)

    def integrand(x):
        return scipy_norm.pdf(x) * scipy_norm.cdf((k - rho * x) / s)

    points = None
    if rho != 0.0:
        switch = k / rho  # the inner CDF transitions sharply here as |rho| -> 1
        if -9.0 < switch < h:
            points = [max(switch - 10 * s, -9.0), switch, min(switch + 10 * s, h)]
    value, err = integrate.quad(integrand, -9.0, h, points=points, limit=300)
    assert err < 1e-7
    return value


class TestClosedForms:
    def test_independence_at_origin(self):
        assert bivariate_normal_cdf(0.0, 0.0, 0.0) == pytest.approx(0.25, abs=1e-12)

    def test_arcsine_identity_at_origin(self):
        # Phi2(0, 0, rho) = 1/4 + arcsin(rho)/(2 pi)
        assert abs(bivariate_normal_cdf(0.0, 0.0, 0.5) - 1.0 / 3.0) < 1e-7
        for rho in (-0.95, -0.4, 0.123, 0.8, 0.9999):
            expected = 0.25 + math.asin(rho) / (2.0 * math.pi)
            assert abs(bivariate_normal_cdf(0.0, 0.0, rho) - expected) < 1e-9

    def test_factorization_at_zero_correlation(self):
        rng = np.random.default_rng(1234)
        for _ in range(100):
            h, k = rng.uniform(-4, 4, size=2)
            expected = normal_cdf(h) * normal_cdf(k)
            assert abs(bivariate_normal_cdf(h, k, 0.0) - expected) < 1e-9


class TestAgainstQuadrature:
    @pytest.mark.parametrize("rho", [-0.93, -0.5, 0.3, 0.75, 0.9])
    def test_brute_force_2d(self, rho):
        for h, k in ((-2.0, 1.0), (0.5, 0.5), (1.5, -0.7), (0.0, 2.5)):
            oracle = _bvn_quadrature(h, k, rho)
            assert abs(bivariate_normal_cdf(h, k, rho) - oracle) < 1e-7

    @pytest.mark.parametrize("rho", [-0.9999, -0.99, -0.93, -0.5, 0.3,
                                     0.75, 0.925, 0.99, 0.9999])
    def test_conditional_reduction(self, rho):
        for h, k in ((-2.0, 1.0), (0.5, 0.5), (1.5, -0.7), (0.0, 2.5)):
            oracle = _bvn_conditional(h, k, rho)
            assert abs(bivariate_normal_cdf(h, k, rho) - oracle) < 1e-7


class TestStructure:
    def test_symmetry_in_arguments(self):
        for h, k, rho in ((-1.2, 0.4, 0.6), (2.0, -0.3, -0.8)):
            assert bivariate_normal_cdf(h, k, rho) == pytest.approx(
                bivariate_normal_cdf(k, h, rho), abs=1e-14)

    def test_monotone_in_rho(self):
        values = [bivariate_normal_cdf(0.3, -0.4, r)
                  for r in np.linspace(-0.999, 0.999, 25)]
        assert all(a <= b + 1e-12 for a, b in zip(values, values[1:]))

    def test_bounded_by_margins(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            h, k = rng.uniform(-3, 3, size=2)
            rho = rng.uniform(-0.9999, 0.9999)
            p = bivariate_normal_cdf(h, k, rho)
            assert 0.0 <= p <= min(normal_cdf(h), normal_cdf(k)) + 1e-12

    @pytest.mark.parametrize("rho", [-1.0, 1.0, -1.5, 2.0])
    def test_domain(self, rho):
        with pytest.raises(DomainError):
            bivariate_normal_cdf(0.0, 0.0, rho)
