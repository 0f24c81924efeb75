import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vortexsoliton import (DomainError, Mesh, Params, RadialField, TentProfile, UnsupportedBasis,
                           action_I, action_I_kappa, default_basis, energy_E, energy_flux,
                           gamma_big, gamma_kappa, kappa_from_field, strong_residual, synthesize,
                           tent_integrals)
from vortexsoliton.model import LOG2_TERM, log_bracket, pohozaev_sides, tent_action, tent_gamma_inf

P = Params(0.1, 1, 8.0)
MESH = Mesh.uniform(8.0)
TENT = TentProfile(4.0, 1.0)


@pytest.fixture(scope="module")
def sine20():
    return default_basis("sine", 20, 8.0)


def random_field(basis, seed, scale=1.0):
    a = np.random.default_rng(seed).standard_normal(basis.N) * scale
    return synthesize(a, basis)


def trapezoid_tent(fn, b=1.0, m=400001):
    r = np.linspace(0.0, 8.0, m)
    u = TentProfile(4.0, b)(r)
    return np.trapezoid(fn(r, u), r) if hasattr(np, "trapezoid") else np.trapz(fn(r, u), r)


class TestParams:
    def test_valid(self):
        assert P.inv_alpha == pytest.approx(10.0)

    @pytest.mark.parametrize("kw", [dict(alpha=0.0, n=1, R=8), dict(alpha=0.1, n=0, R=8),
                                    dict(alpha=0.1, n=1, R=-1), dict(alpha=0.1, n=1.5, R=8)])
    def test_invalid(self, kw):
        with pytest.raises(DomainError):
            Params(**kw)


class TestFlux:
    def test_zero(self):
        assert energy_flux(RadialField.zero(MESH)) == 0.0

    def test_tent_prescribed_flux(self):
        u = TentProfile.for_flux(8.0, 40.0).field(MESH)
        assert energy_flux(u) == pytest.approx(40.0, rel=1e-12)

    def test_tent_unit_peak(self):
        assert energy_flux(TENT.field(MESH)) == pytest.approx(math.pi * 64 / 3, rel=1e-12)
        assert math.pi * 64 / 3 == pytest.approx(67.0206, abs=1e-4)


class TestAction:
    def test_zero(self):
        z = RadialField.zero(MESH)
        assert action_I(z, P).value == 0.0
        assert action_I_kappa(z, P, 3.0).value == 0.0

    def test_tent_matches_closed_form(self):
        u = TENT.field(MESH)
        assert abs(action_I(u, P).value - tent_action(TENT, P)) <= 1e-10

    def test_breakdown_recombines(self, sine20):
        v = action_I(random_field(sine20, 3), P)
        b = v.breakdown
        again = 0.5 * (b["kinetic"] + b["centrifugal"]) - 10 * b["flux"] + 100 * b["log"]
        assert v.value == pytest.approx(again, rel=1e-13, abs=1e-12)

    def test_kappa_shift(self, sine20):
        u = random_field(sine20, 4)
        for kappa in (0.0, 1.0, -0.7):
            d = action_I_kappa(u, P, kappa).value - action_I(u, P).value
            assert d == pytest.approx(kappa * energy_flux(u) / (2 * math.pi), rel=1e-12, abs=1e-14)

    def test_tent_kappa_one(self):
        u = TENT.field(MESH)
        d = action_I_kappa(u, P, 1.0).value - action_I(u, P).value
        assert d == pytest.approx(32 / 3, rel=1e-12)

    def test_evenness(self, sine20):
        u = random_field(sine20, 5)
        assert action_I(-u, P).value == pytest.approx(action_I(u, P).value, rel=1e-14)
        assert energy_flux(-u) == energy_flux(u)
        assert gamma_kappa(-u, P, 0.5) == pytest.approx(gamma_kappa(u, P, 0.5), rel=1e-14)


class TestEnergy:
    def test_zero(self):
        assert energy_E(RadialField.zero(MESH), P) == 0.0

    def test_tent(self):
        m, k, c, lg = tent_integrals(TENT, P)
        expected = 0.5 * (k + c + lg)
        assert expected == pytest.approx(1.904348, abs=1e-6)
        assert energy_E(TENT.field(MESH), P) == pytest.approx(expected, abs=1e-12)

    def test_increasing_in_amplitude(self):
        u = TENT.field(MESH)
        assert energy_E(u.scaled(2.0), P) > energy_E(u, P) > 0


class TestGamma:
    def test_zero(self):
        assert gamma_kappa(RadialField.zero(MESH), P, 1.0) == 0.0

    def test_t_one(self, sine20):
        u = random_field(sine20, 6)
        assert gamma_big(1.0, u, P, 0.3) == gamma_kappa(u, P, 0.3)

    def test_tent_vs_trapezoid(self):
        def integrand(r, u):
            du = np.where(r < 4.0, 0.25, -0.25)
            with np.errstate(divide="ignore", invalid="ignore"):
                inv = np.where(r > 0, u * u / np.where(r > 0, r, 1.0), 0.0)
            return 0.5 * (r * du * du + inv - 20 * r * u * u + 20 * r * u * u / (1 + 0.1 * u * u))
        ref = trapezoid_tent(integrand)
        assert gamma_kappa(TENT.field(MESH), P, 0.0) == pytest.approx(ref, abs=1e-8)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 10_000), kappa=st.floats(-0.05, 5.0))
    def test_scaling_identity(self, seed, kappa):
        b = default_basis("sine", 12, 8.0, n_cells=128)
        u = random_field(b, seed)
        for t in (0.0, 0.5, 1.0, 2.0, 10.0):
            lhs = gamma_kappa(u.scaled(t), P, kappa)
            rhs = t * t * gamma_big(t, u, P, kappa)
            assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_nonincreasing_in_t(self, seed):
        b = default_basis("sine", 12, 8.0, n_cells=128)
        u = random_field(b, seed)
        vals = [gamma_big(t, u, P, 1.0) for t in np.linspace(0, 20, 41)]
        assert np.all(np.diff(vals) <= 1e-12)
        assert gamma_big(math.inf, u, P, 1.0) <= vals[-1]

    def test_positive_at_zero(self, sine20):
        u = random_field(sine20, 7)
        assert gamma_big(0.0, u, P, -0.05) > 0

    def test_tent_at_infinity(self):
        g = gamma_big(math.inf, TENT.field(MESH), P, 1.0)
        closed = 1.0 * (1 + LOG2_TERM - (10 - 1) * 64 / 6)
        assert g == pytest.approx(closed, rel=1e-12)
        assert tent_gamma_inf(TENT, P, 1.0) == pytest.approx(closed, rel=1e-12)
        assert g < 0

    def test_negative_t(self, sine20):
        with pytest.raises(DomainError):
            gamma_big(-1.0, random_field(sine20, 1), P, 0.0)


class TestKappaRecovery:
    def test_small_tent_rayleigh_limit(self):
        u = TentProfile(4.0, 1e-3).field(MESH)
        k = kappa_from_field(u, P, energy_flux(u))
        assert k == pytest.approx(-(6 / 64) * (1 + LOG2_TERM), abs=1e-5)
        assert -(6 / 64) * (1 + LOG2_TERM) == pytest.approx(-0.1299651, abs=1e-7)

    def test_even(self, sine20):
        u = random_field(sine20, 8)
        q = energy_flux(u)
        assert kappa_from_field(-u, P, q) == pytest.approx(kappa_from_field(u, P, q), rel=1e-14)

    def test_domain(self, sine20):
        with pytest.raises(DomainError):
            kappa_from_field(random_field(sine20, 1), P, 0.0)

    def test_flux_mismatch_warns(self, sine20):
        u = random_field(sine20, 1)
        with pytest.warns(RuntimeWarning):
            kappa_from_field(u, P, 2 * energy_flux(u))


class TestResidual:
    def test_zero(self):
        assert strong_residual(RadialField.zero(MESH), P, 1.3) == 0.0

    def test_needs_second_derivative(self):
        hat = default_basis("hat", 63, 8.0)
        u = random_field(hat, 1)
        with pytest.raises(UnsupportedBasis):
            strong_residual(u, P, 1.0)
        assert strong_residual(u, P, 1.0, smooth=True) >= 0

    def test_exact_linear_mode_vanishes(self):
        from scipy.special import jv, jn_zeros
        j = jn_zeros(1, 1)[0]
        k = j / 8.0
        eps = 1e-6
        u = RadialField.from_function(MESH, lambda r: eps * jv(1, k * r),
                                      lambda r: eps * k * 0.5 * (jv(0, k * r) - jv(2, k * r)),
                                      lambda r: eps * k * k * 0.25 * (jv(-1, k * r) - 2 * jv(1, k * r) + jv(3, k * r)))
        assert strong_residual(u, P, -j * j / 128) < 1e-20


class TestTent:
    @pytest.mark.parametrize("b", [0.1, 1.0, 10.0])
    def test_against_quadrature(self, b):
        from vortexsoliton.model import _integrals
        t = TentProfile(4.0, b)
        s = _integrals(t.field(MESH), P.alpha)
        quad = (s["flux"], s["kinetic"], s["inv_r"], s["log"])
        for closed, q in zip(tent_integrals(t, P), quad):
            assert abs(closed - q) <= 1e-10

    def test_values(self):
        m, k, c, lg = tent_integrals(TENT, P)
        assert (m, k, c) == pytest.approx((32 / 3, 2.0, 0.772589), abs=1e-6)
        assert lg == pytest.approx(1.036107, abs=1e-6)

    def test_small_amplitude(self):
        lg = tent_integrals(TentProfile(4.0, 1e-6), P)[3]
        # ln(1 + x) ~ x, so the integral tends to alpha * int r u^2
        assert lg == pytest.approx(0.1 * (2 / 3) * 16 * 1e-12, rel=1e-6)

    def test_weak_saturation(self):
        p = Params(1e-10, 1, 8.0)
        lg = tent_integrals(TENT, p)[3]
        r = MESH.qr
        u = TENT(r)
        flux_int = float(np.dot(MESH.qw, r * u * u))
        assert lg == pytest.approx(p.alpha * flux_int, rel=1e-4)

    def test_log_bracket_branches_agree(self):
        y = 1e-3
        s = math.sqrt(y)
        direct = math.log1p(y) - 2 + 2 * math.atan(s) / s
        assert log_bracket(y * (1 - 1e-12)) == pytest.approx(direct, rel=1e-6)

    def test_wrong_width(self):
        with pytest.raises(DomainError):
            tent_integrals(TentProfile(3.0, 1.0), P)


def test_pohozaev_random_field_mismatch(sine20):
    # an arbitrary field does not satisfy the identity; it is a property of solutions only
    lhs, rhs = pohozaev_sides(random_field(sine20, 2), P, 1.0)
    assert abs(lhs - rhs) > 1e-3
