import math

import numpy as np
import pytest

from vortexsoliton import (DomainError, Mesh, Params, RadialField, bounds_report,
                           check_solution_against_bounds, decay_fit)
from vortexsoliton.bounds import kappa_lower, kappa_upper, radius_indefinite, radius_nehari
from vortexsoliton.model import LOG2_TERM, log_bracket

P = Params(0.1, 1, 8.0)


def test_kappa_upper_reference():
    rep = bounds_report(P, 40.0)
    assert round(rep.kappa_upper, 4) == 9.9470
    assert rep.kappa_interval == (pytest.approx(-(1 + rep.r0 ** 2) / 128), rep.kappa_upper)


def test_kappa_lower_closed_form():
    # both printed forms of the lower bound agree with the implementation
    Q0 = 40.0
    a = 0.1
    y = 3 * a * Q0 / (math.pi * 64)
    first = (10 - 6 / 64 * (1 + LOG2_TERM)
             - math.pi * 64 / (a * a * Q0) * (math.log1p(y) - 2 + math.sqrt(4 * math.pi * 64 / (3 * a * Q0))
                                             * math.atan(math.sqrt(y))))
    assert kappa_lower(P, Q0) == pytest.approx(first, rel=1e-12)
    assert kappa_lower(P, Q0) == pytest.approx(0.044166, abs=1e-6)


def test_lower_below_upper():
    for n in (1, 2, 6, 8, 10):
        for Q0 in (0.1, 10, 10 * math.pi, 40, 100):
            rep = bounds_report(Params(0.1, n, 8.0), Q0)
            assert rep.kappa_upper - rep.kappa_lower > 0


def test_winding_flag():
    assert bounds_report(Params(0.1, 10, 8.0), 10 * math.pi).winding_negative
    assert not bounds_report(Params(0.1, 9, 8.0), 10 * math.pi).winding_negative


def test_small_flux_flag():
    assert bounds_report(P, 0.2, kappa=0.1).small_flux_excluded
    assert not bounds_report(P, 0.3, kappa=0.1).small_flux_excluded
    # n^2 + 2 R^2 kappa <= 0 breaks the condition at r = R
    assert not bounds_report(P, 0.2, kappa=-1 / 128).small_flux_excluded


def test_kappa_assumed():
    rep = bounds_report(P, 40.0)
    assert rep.kappa_assumed
    assert rep.kappa == pytest.approx(0.5 * (rep.kappa_lower + rep.kappa_upper))
    rep = bounds_report(P, 40.0, kappa=1.49)
    assert not rep.kappa_assumed and rep.sigma == pytest.approx(rep.kappa_upper - 1.49)


def test_radius_thresholds():
    assert radius_nehari(P, 1.0) == pytest.approx(math.sqrt(6 * (1 + LOG2_TERM) / 9), rel=1e-12)
    assert radius_nehari(P, 1.0) == pytest.approx(0.961351, abs=1e-6)
    for n in (1, 2, 3):
        for kappa in np.linspace(-0.05, 5, 11):
            p = Params(0.1, n, 8.0)
            assert radius_indefinite(p, kappa) < 8 and radius_nehari(p, kappa) < 8
    assert radius_nehari(P, 10.0) == math.inf


def test_upper_limits_and_monotonicity():
    assert kappa_upper(Params(0.1, 1, 1e6)) == pytest.approx(10.0, abs=1e-9)
    ups = [kappa_upper(Params(0.1, n, 8.0)) for n in range(1, 8)]
    assert np.all(np.diff(ups) < 0)
    ups = [kappa_upper(Params(0.1, 1, R)) for R in (2, 4, 8, 16)]
    assert np.all(np.diff(ups) > 0)


def test_domain():
    with pytest.raises(DomainError):
        bounds_report(P, 0.0)
    with pytest.raises(DomainError):
        log_bracket(-1.0)


class TestViolations:
    def test_clean(self):
        assert check_solution_against_bounds(1.4901, bounds_report(P, 40.0, 1.4901)) == []

    def test_negative_kappa_is_advisory(self):
        v = check_solution_against_bounds(-0.033, bounds_report(P, 10.0, -0.033))
        assert [x.code for x in v] == ["positive_decay"]
        assert v[0].advisory and "positive-decay condition unmet" in v[0].message

    def test_above_upper(self):
        v = check_solution_against_bounds(12.0, bounds_report(P, 40.0, 12.0))
        assert v[0].code == "above_upper" and not v[0].advisory

    def test_below_lower(self):
        v = check_solution_against_bounds(0.0, bounds_report(P, 40.0, 0.0))
        assert "below_lower" in [x.code for x in v]

    def test_winding_sign(self):
        p = Params(0.1, 10, 8.0)
        v = check_solution_against_bounds(0.1, bounds_report(p, 10 * math.pi, 0.1))
        assert "winding_sign" in [x.code for x in v]


class TestDecayFit:
    def test_exact_exponential(self):
        mesh = Mesh.uniform(8.0)
        k = 2.0
        s = math.sqrt(2 * k)
        u = RadialField.from_function(mesh, lambda r: np.exp(-0.5 * s * r), lambda r: -0.5 * s * np.exp(-0.5 * s * r))
        fit = decay_fit(u, k)
        assert fit.slope == pytest.approx(-2.0, abs=1e-6)
        assert fit.C_kappa == pytest.approx(1.0, rel=1e-6)
        assert fit.passes

    def test_slow_decay_fails(self):
        mesh = Mesh.uniform(8.0)
        u = RadialField.from_function(mesh, lambda r: np.exp(-0.1 * r), lambda r: -0.1 * np.exp(-0.1 * r))
        assert not decay_fit(u, 2.0).passes

    def test_domain(self):
        u = RadialField.zero(Mesh.uniform(8.0))
        with pytest.raises(DomainError):
            decay_fit(u, -0.1)
        with pytest.raises(DomainError):
            decay_fit(u, 1.0, window=(1.0, 7.0))
