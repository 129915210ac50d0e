"""ALD core: check loss, 밀도, 분위수, mixture 상수"""

import numpy as np
import pytest
from scipy.integrate import quad

from bqr.common.ald import (
    AldParams,
    QuantileLevel,
    ald_cdf,
    ald_log_density,
    ald_mean,
    ald_quantile,
    ald_variance,
    as_quantile,
    check_loss,
    mixture_constants,
    variance_curve,
    variance_factor,
)


class TestQuantileLevel:
    @pytest.mark.parametrize("tau", [0.0, 1.0, -0.1, 1.5, float("nan")])
    def test_rejects_out_of_range(self, tau):
        with pytest.raises(ValueError):
            QuantileLevel(tau)

    def test_as_quantile_passthrough(self):
        q = QuantileLevel(0.3)
        assert as_quantile(q) is q
        assert as_quantile(0.3) == q
        assert float(q) == 0.3

    def test_scale_must_be_positive(self):
        with pytest.raises(ValueError):
            AldParams(mu=0.0, sigma=0.0, tau=QuantileLevel(0.5))


class TestCheckLoss:
    def test_asymmetric_slopes(self):
        tau = QuantileLevel(0.25)
        assert check_loss(-2.0, tau) == pytest.approx(1.5)
        assert check_loss(2.0, tau) == pytest.approx(0.5)
        assert check_loss(0.0, tau) == 0.0

    def test_vectorized_nonnegative(self):
        u = np.linspace(-10, 10, 101)
        for t in (0.05, 0.5, 0.95):
            loss = check_loss(u, QuantileLevel(t))
            assert loss.shape == u.shape
            assert np.all(loss >= 0)

    def test_median_is_half_absolute(self):
        u = np.array([-3.0, -0.5, 0.0, 1.25])
        np.testing.assert_allclose(check_loss(u, QuantileLevel(0.5)), 0.5 * np.abs(u))


class TestDensity:
    @pytest.mark.parametrize("tau", [0.1, 0.5, 0.9])
    def test_integrates_to_one(self, tau):
        p = AldParams(mu=1.5, sigma=0.7, tau=QuantileLevel(tau))

        def density(y):
            return np.exp(ald_log_density(y, p))

        left, _ = quad(density, -np.inf, p.mu)
        right, _ = quad(density, p.mu, np.inf)
        assert abs(left + right - 1.0) < 1e-6

    @pytest.mark.parametrize("tau", [0.1, 0.3, 0.5, 0.9])
    def test_location_is_tau_quantile(self, tau):
        p = AldParams(mu=-2.0, sigma=3.0, tau=QuantileLevel(tau))
        assert ald_cdf(p.mu, p) == pytest.approx(tau)
        assert ald_quantile(tau, p) == pytest.approx(p.mu)

    def test_quantile_inverts_cdf(self):
        p = AldParams(mu=0.5, sigma=2.0, tau=QuantileLevel(0.2))
        probs = np.linspace(0.01, 0.99, 25)
        np.testing.assert_allclose(ald_cdf(ald_quantile(probs, p), p), probs, atol=1e-12)

    def test_cdf_matches_integrated_density(self):
        p = AldParams(mu=0.0, sigma=1.0, tau=QuantileLevel(0.7))
        def density(t):
            return np.exp(ald_log_density(t, p))

        for y in (-3.0, -0.4, 0.8, 5.0):
            mass, _ = quad(density, -np.inf, min(y, p.mu))
            if y > p.mu:
                mass += quad(density, p.mu, y)[0]
            assert ald_cdf(y, p) == pytest.approx(mass, abs=1e-8)


class TestMoments:
    def test_mixture_constants_at_median(self):
        c = mixture_constants(QuantileLevel(0.5))
        assert c.theta == pytest.approx(0.0)
        assert c.psi2 == pytest.approx(8.0)

    def test_mixture_constants_asymmetric(self):
        c = QuantileLevel(0.25).constants
        assert c.theta == pytest.approx(0.5 / 0.1875)
        assert c.psi2 == pytest.approx(2.0 / 0.1875)

    def test_variance_factor_minimum_at_median(self):
        assert variance_factor(QuantileLevel(0.5)) == pytest.approx(8.0)
        assert variance_factor(QuantileLevel(0.1)) == pytest.approx(0.82 / 0.0081)
        assert variance_factor(QuantileLevel(0.1)) == pytest.approx(
            variance_factor(QuantileLevel(0.9))
        )

    def test_mean_and_variance(self):
        p = AldParams(mu=1.0, sigma=2.0, tau=QuantileLevel(0.25))
        assert ald_mean(p) == pytest.approx(1.0 + 2.0 * p.tau.constants.theta)
        assert ald_variance(p) == pytest.approx(4.0 * variance_factor(p.tau))

    def test_variance_curve_table(self):
        curve = variance_curve([0.1, 0.5, 0.9])
        assert list(curve.columns) == ["tau", "variance_factor"]
        assert curve["variance_factor"].idxmin() == 1

    def test_variance_curve_rejects_invalid_tau(self):
        with pytest.raises(ValueError):
            variance_curve([0.5, 1.0])
