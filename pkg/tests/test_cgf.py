"""Tests for the CGF interface layer: domains, tilting, characteristic functions."""

import numpy as np
import pytest

from spinv.cgf import DomainInterval, char_fn, standardized_tilted_cf, tilt
from spinv.errors import DomainError
from spinv.saddlepoint import solve_saddlepoint
from spinv.models import (
    Gaussian,
    GaussianParams,
    MjdParams,
    MjdTransition,
    Nig,
    NigParams,
)


def _family_models():
    return [
        Gaussian(GaussianParams(mu=0.3, sigma=2.0)),
        Nig(NigParams(chi=3e-4, psi=1000.0, mu=-3e-4, gamma=2.0)),
        Nig(NigParams(chi=1.0, psi=1.0, mu=0.5, gamma=-0.7)),
        MjdTransition(
            MjdParams(r=0.05, sigma=0.2, lam=3.0, mu_j=-0.05, nu=0.1),
            x0=0.0,
            dt=1.0 / 252.0,
        ),
    ]


class TestDomainInterval:
    def test_must_contain_zero(self):
        with pytest.raises(DomainError):
            DomainInterval(0.5, 2.0)
        with pytest.raises(DomainError):
            DomainInterval(-3.0, 0.0)  # interval is open

    def test_contains(self):
        d = DomainInterval(-1.0, 2.0)
        assert d.contains(0.0) and d.contains(1.9999)
        assert not d.contains(-1.0) and not d.contains(2.0)

    def test_unbounded(self):
        d = DomainInterval(-np.inf, np.inf)
        assert d.contains(-1e300) and d.contains(1e300)


class TestCgfDerivatives:
    """k1 and k2 must be the actual derivatives of k on every family."""

    @pytest.mark.parametrize("model", _family_models())
    def test_finite_difference_consistency(self, model):
        dom = model.domain()
        lo = max(dom.lo, -20.0)
        hi = min(dom.hi, 20.0)
        rng = np.random.default_rng(7)
        ts = lo + (hi - lo) * rng.uniform(0.1, 0.9, size=25)
        h = 1e-6 * max(1.0, hi - lo if np.isfinite(hi - lo) else 1.0)
        h = min(h, 1e-5)
        for t in ts:
            d1 = (model.k(t + h) - model.k(t - h)) / (2 * h)
            d2 = (model.k(t + h) - 2 * model.k(t) + model.k(t - h)) / h**2
            np.testing.assert_allclose(model.k1(t), d1, rtol=1e-5, atol=1e-8)
            np.testing.assert_allclose(model.k2(t), d2, rtol=1e-3, atol=1e-6)

    @pytest.mark.parametrize("model", _family_models())
    def test_mean_variance_are_cumulants(self, model):
        np.testing.assert_allclose(model.mean(), model.k1(0.0), rtol=1e-14)
        np.testing.assert_allclose(model.variance(), model.k2(0.0), rtol=1e-14)
        assert model.variance() > 0

    @pytest.mark.parametrize("model", _family_models())
    def test_k_zero_is_zero(self, model):
        assert model.k(0.0) == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("model", _family_models())
    def test_k_complex_matches_k_on_real_axis(self, model):
        dom = model.domain()
        ts = np.linspace(max(dom.lo, -5.0), min(dom.hi, 5.0), 11)[1:-1]
        kc = model.k_complex(ts.astype(complex))
        np.testing.assert_allclose(kc.real, model.k(ts), rtol=1e-12)
        np.testing.assert_allclose(kc.imag, 0.0, atol=1e-12)


class TestTilting:
    def test_tilted_cgf_identity(self):
        # K_tilt(t) = K(t + tau) - K(tau), so K_tilt(0) = 0 and the
        # tilted mean is K'(tau)
        base = Nig(NigParams(chi=1.0, psi=4.0, mu=0.0, gamma=0.5))
        tau = 0.8
        tm = tilt(base, tau)
        assert tm.k(0.0) == pytest.approx(0.0, abs=1e-15)
        np.testing.assert_allclose(tm.mean(), base.k1(tau), rtol=1e-14)
        np.testing.assert_allclose(tm.variance(), base.k2(tau), rtol=1e-14)
        ts = np.linspace(-0.5, 0.5, 9)
        np.testing.assert_allclose(
            tm.k(ts), base.k(ts + tau) - base.k(tau), rtol=1e-13, atol=1e-15
        )

    def test_tilt_domain_shifts(self):
        base = Nig(NigParams(chi=1.0, psi=4.0, mu=0.0, gamma=0.0))
        d0 = base.domain()
        tm = tilt(base, 0.5)
        d1 = tm.domain()
        np.testing.assert_allclose(d1.lo, d0.lo - 0.5)
        np.testing.assert_allclose(d1.hi, d0.hi - 0.5)

    def test_tilt_outside_domain_raises(self):
        base = Nig(NigParams(chi=1.0, psi=4.0, mu=0.0, gamma=0.0))
        with pytest.raises(DomainError):
            tilt(base, base.domain().hi + 0.1)


class TestCharFn:
    def test_gaussian_closed_form(self):
        m = Gaussian(GaussianParams(mu=0.3, sigma=1.5))
        s = np.linspace(-4.0, 4.0, 41)
        expected = np.exp(1j * s * 0.3 - 0.5 * 1.5**2 * s**2)
        np.testing.assert_allclose(char_fn(m, s), expected, rtol=1e-13)

    def test_unit_modulus_bound(self):
        # |phi(s)| <= 1 with equality at s = 0
        for m in _family_models():
            s = np.linspace(-30.0, 30.0, 101)
            mod = np.abs(char_fn(m, s))
            assert np.all(mod <= 1.0 + 1e-12)
            np.testing.assert_allclose(np.abs(char_fn(m, 0.0)), 1.0, rtol=1e-14)


class TestStandardizedTiltedCf:
    def test_value_one_at_origin(self):
        for m in _family_models():
            x0 = m.mean() + 0.7 * np.sqrt(m.variance())
            sp = solve_saddlepoint(m, x0)
            v = standardized_tilted_cf(m, sp.tau_hat, x0, 0.0)
            np.testing.assert_allclose(v, 1.0 + 0.0j, atol=1e-10)

    def test_gaussian_is_standard_normal_cf(self):
        # Gaussian tilts are Gaussian, so the standardized tilted CF is
        # exactly exp(-s^2 / 2)
        m = Gaussian(GaussianParams(mu=-1.0, sigma=0.7))
        x0 = 1.3
        sp = solve_saddlepoint(m, x0)
        s = np.linspace(0.0, 8.0, 33)
        v = standardized_tilted_cf(m, sp.tau_hat, x0, s)
        np.testing.assert_allclose(v.real, np.exp(-0.5 * s**2), atol=1e-13)
        np.testing.assert_allclose(v.imag, 0.0, atol=1e-13)
