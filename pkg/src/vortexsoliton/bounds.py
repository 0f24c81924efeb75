"""Closed-form estimates on the propagation constant and existence thresholds.

Everything here is a cheap scalar formula; the report is used to sanity-check
solver output rather than to certify it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError
from .model import LOG2_TERM, Params, RadialField, log_bracket
from .special import bessel_j_zero


def first_bessel_zero() -> float:
    """First positive zero of ``J_0`` (2.404825557695773...)."""
    return bessel_j_zero(0)


@dataclass(frozen=True)
class BoundsReport:
    params: Params
    Q0: float
    kappa: float
    kappa_assumed: bool
    r0: float
    kappa_upper: float
    kappa_lower: float
    sigma: float
    winding_negative: bool
    small_flux_excluded: bool
    R_indefinite: float
    R_nehari: float
    kappa_interval: tuple[float, float]

    def as_dict(self) -> dict:
        return {
            "alpha": self.params.alpha, "n": self.params.n, "R": self.params.R,
            "Q0": self.Q0, "kappa": self.kappa, "kappa_assumed": self.kappa_assumed,
            "r0": self.r0, "kappa_upper": self.kappa_upper, "kappa_lower": self.kappa_lower,
            "sigma": self.sigma, "winding_negative": self.winding_negative,
            "small_flux_excluded": self.small_flux_excluded,
            "R_indefinite": self.R_indefinite, "R_nehari": self.R_nehari,
            "kappa_interval_low": self.kappa_interval[0], "kappa_interval_high": self.kappa_interval[1],
        }


def kappa_upper(p: Params) -> float:
    """Spectral ceiling ``1/alpha - (n^2 + r0^2) / (2 R^2)``."""
    r0 = first_bessel_zero()
    return p.inv_alpha - (p.n ** 2 + r0 ** 2) / (2.0 * p.R ** 2)


def kappa_lower(p: Params, Q0: float) -> float:
    """Lower bound from comparing with the tent profile of flux ``Q0`` on ``[0, R]``."""
    if not Q0 > 0:
        raise DomainError("Q0 must be positive")
    b2 = 3.0 * Q0 / (math.pi * p.R ** 2)
    y = p.alpha * b2
    return (p.inv_alpha - 6.0 / p.R ** 2 * (1.0 + p.n ** 2 * LOG2_TERM)
            - 3.0 / (p.alpha ** 2 * b2) * log_bracket(y))


def _radius_threshold(factor: float, p: Params, kappa: float) -> float:
    gap = p.inv_alpha - kappa
    if gap <= 0:
        return math.inf
    return math.sqrt(factor * (1.0 + p.n ** 2 * LOG2_TERM) / gap)


def radius_indefinite(p: Params, kappa: float) -> float:
    """Radius beyond which the fixed-kappa action takes negative values."""
    return _radius_threshold(12.0, p, kappa)


def radius_nehari(p: Params, kappa: float) -> float:
    """Radius beyond which the tent witness certifies a nonempty Nehari set."""
    return _radius_threshold(6.0, p, kappa)


def small_flux_condition(p: Params, kappa: float) -> bool:
    """``n^2 + 2 r^2 kappa > 0`` on the closed interval ``[0, R]``."""
    if p.n == 0:
        return False
    return p.n ** 2 + 2.0 * p.R ** 2 * min(kappa, 0.0) > 0


def bounds_report(p: Params, Q0: float, kappa: float | None = None) -> BoundsReport:
    """Evaluate every estimate for ``p`` and flux ``Q0``.

    Without ``kappa`` the midpoint of ``[kappa_lower, kappa_upper]`` is used for
    the kappa-dependent entries and ``kappa_assumed`` is set.
    """
    if not Q0 > 0:
        raise DomainError(f"Q0 must be positive, got {Q0}")
    r0 = first_bessel_zero()
    upper = kappa_upper(p)
    lower = kappa_lower(p, Q0)
    assumed = kappa is None
    k = 0.5 * (lower + upper) if assumed else float(kappa)
    return BoundsReport(
        params=p, Q0=float(Q0), kappa=k, kappa_assumed=assumed, r0=r0,
        kappa_upper=upper, kappa_lower=lower, sigma=upper - k,
        winding_negative=abs(p.n) >= Q0 / math.pi * (1.0 - 1e-12),
        small_flux_excluded=Q0 <= 0.25 and small_flux_condition(p, k),
        R_indefinite=radius_indefinite(p, k), R_nehari=radius_nehari(p, k),
        kappa_interval=(-(p.n ** 2 + r0 ** 2) / (2.0 * p.R ** 2), upper),
    )


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    advisory: bool = False


def check_solution_against_bounds(res, rep: BoundsReport) -> list[Violation]:
    """Named violations of ``rep`` by the propagation constant of ``res``.

    ``res`` may be a solve result (anything with ``.kappa``) or a bare number.
    A nonpositive ``kappa`` is reported as advisory only: it is admissible but
    the profile is then not exponentially confined.
    """
    kappa = float(getattr(res, "kappa", res))
    out = []
    if kappa >= rep.kappa_upper:
        out.append(Violation("above_upper",
                             f"kappa={kappa:.6g} exceeds the spectral upper bound {rep.kappa_upper:.6g}"))
    if kappa < rep.kappa_lower:
        out.append(Violation("below_lower",
                             f"kappa={kappa:.6g} is below the tent-comparison lower bound {rep.kappa_lower:.6g}"))
    sigma = rep.kappa_upper - kappa
    if sigma <= 0 and not out:
        out.append(Violation("sigma_nonpositive", f"margin sigma={sigma:.6g} is not positive"))
    if rep.winding_negative and kappa >= 0:
        out.append(Violation("winding_sign",
                             f"|n|={abs(rep.params.n)} >= Q0/pi forces kappa < 0, got {kappa:.6g}"))
    if kappa <= 0:
        out.append(Violation("positive_decay", "positive-decay condition unmet (kappa <= 0)", advisory=True))
    return out


@dataclass(frozen=True)
class DecayFit:
    r_window: tuple[float, float]
    slope: float
    C_kappa: float
    kappa: float
    passes: bool


def decay_fit(u: RadialField, kappa: float, window: tuple[float, float] | None = None,
              safety: float = 0.9) -> DecayFit:
    """Least-squares line through ``ln u^2`` on ``window``; passes if slope <= -safety*sqrt(2 kappa)."""
    if not kappa > 0:
        raise DomainError("the decay estimate needs kappa > 0")
    R = u.R
    lo, hi = window if window is not None else (0.6 * R, 0.9 * R)
    if not (0.5 * R < lo < hi < 0.95 * R):
        raise DomainError(f"fit window must lie inside (0.5R, 0.95R), got ({lo}, {hi})")
    mask = (u.r >= lo) & (u.r <= hi)
    r = u.r[mask]
    v = u.u[mask]
    if r.size < 2:
        raise NumericalError("too few samples in the fit window")
    if np.any(v == 0):
        raise NumericalError("profile vanishes inside the fit window")
    slope, intercept = np.polyfit(r, np.log(v * v), 1)
    rate = math.sqrt(2.0 * kappa)
    return DecayFit((float(lo), float(hi)), float(slope), float(math.exp(intercept)), float(kappa),
                    bool(slope <= -safety * rate))
