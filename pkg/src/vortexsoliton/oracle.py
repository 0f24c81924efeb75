"""Shooting-method solutions of the vortex ODE at a prescribed propagation constant.

Independent of the variational machinery: the profile is integrated outward
from the core with classical RK4 and the core amplitude ``c`` in
``u ~ c r^|n|`` is tuned until ``u(R) = 0`` with no interior node.

Integration uses ``w = u / r^|n|``, which satisfies the regular equation

    w'' + (2|n| + 1) w' / r = (2 kappa - 2 u^2 / (1 + alpha u^2)) w

and so avoids the ``n^2 / r^2`` stiffness of the original form near the core.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.integrate
import scipy.interpolate
import scipy.optimize

from .basis import BasisSet, project, synthesize
from .errors import DomainError, NoBracket, ShotOverflow
from .model import Params, RadialField

log = logging.getLogger(__name__)

START_FRACTION = 1e-6
DEFAULT_STEPS = 4096
_BLOWUP = 1e150


@dataclass(frozen=True, eq=False)
class ShootProfile:
    kappa: float
    c: float
    r: np.ndarray
    u: np.ndarray
    du: np.ndarray
    params: Params

    @property
    def u_end(self) -> float:
        return float(self.u[-1])

    @property
    def max_u(self) -> float:
        return float(np.max(np.abs(self.u)))

    def crossings(self, rtol: float = 1e-8) -> int:
        """Sign changes strictly inside ``(0, R)``, ignoring values below ``rtol * max|u|``."""
        u = self.u[1:-1]
        s = np.sign(np.where(np.abs(u) > rtol * self.max_u, u, 0.0))
        s = s[s != 0]
        return int(np.count_nonzero(s[1:] != s[:-1])) + int(s.size > 0 and s[0] < 0)

    def flux(self) -> float:
        return 2.0 * math.pi * float(scipy.integrate.simpson(self.r * self.u ** 2, x=self.r))

    def interpolant(self):
        """Cubic Hermite interpolant of ``u`` extended by ``c r^|n|`` inside the start radius."""
        spline = scipy.interpolate.CubicHermiteSpline(self.r, self.u, self.du)
        m = abs(self.params.n)
        r0 = self.r[0]
        c = self.c

        def f(x, deriv=0):
            x = np.asarray(x, dtype=float)
            core = x < r0
            out = spline(np.where(core, r0, x), deriv)
            if np.any(core):
                xc = x[core]
                if deriv == 0:
                    out[core] = c * xc ** m
                elif deriv == 1:
                    out[core] = m * c * xc ** (m - 1)
                else:
                    out[core] = m * (m - 1) * c * xc ** (m - 2) if m > 1 else 0.0
            return out

        return f

    def field(self, mesh) -> RadialField:
        """Sample on a quadrature mesh (second derivative from the spline)."""
        f = self.interpolant()
        return RadialField.from_function(mesh, lambda x: f(x, 0), lambda x: f(x, 1),
                                         lambda x: f(x, 2))

    def project(self, basis: BasisSet) -> RadialField:
        """Best flux-norm approximation of the profile in ``basis``."""
        f = self.interpolant()
        return synthesize(project(f(basis.mesh.qr), basis), basis)

    def pohozaev_sides(self) -> tuple[float, float]:
        """Both sides of the identity obtained by testing the equation with ``u``."""
        p, r, u, du = self.params, self.r, self.u, self.du
        lhs = -scipy.integrate.simpson(r * du ** 2, x=r)
        rhs = scipy.integrate.simpson(
            p.n ** 2 * u ** 2 / r + 2 * self.kappa * r * u ** 2 - 2 * r * u ** 4 / (1 + p.alpha * u ** 2),
            x=r)
        return float(lhs), float(rhs)


def _integrate(kappa, c, p: Params, steps, stop_on_crossing=False):
    """RK4 for ``(w, w')``; returns node lists and whether ``u`` went nonpositive on ``(0, R]``."""
    m = abs(p.n)
    alpha = p.alpha
    k2 = 2.0 * kappa
    coef = 2.0 * m + 1.0
    r0 = START_FRACTION * p.R
    h = (p.R - r0) / steps
    half = 0.5 * h

    def acc(r, rm, w, z):
        u = rm * w
        u2 = u * u
        return (k2 - 2.0 * u2 / (1.0 + alpha * u2)) * w - coef * z / r

    w, z = c, 0.0
    ws = [w]
    zs = [z]
    crossed = False
    r = r0
    rm = r0 ** m
    for i in range(steps):
        rmid = r + half
        rmid_m = rmid ** m
        rn = r0 + (i + 1) * h
        rn_m = rn ** m
        k1w, k1z = z, acc(r, rm, w, z)
        k2w = z + half * k1z
        k2z = acc(rmid, rmid_m, w + half * k1w, k2w)
        k3w = z + half * k2z
        k3z = acc(rmid, rmid_m, w + half * k2w, k3w)
        k4w = z + h * k3z
        k4z = acc(rn, rn_m, w + h * k3w, k4w)
        w += h / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w)
        z += h / 6.0 * (k1z + 2 * k2z + 2 * k3z + k4z)
        r, rm = rn, rn_m
        if not abs(w * rm) < _BLOWUP:
            raise ShotOverflow(f"shot diverged at r={r:.4g} (kappa={kappa}, c={c:.4g})")
        if w <= 0.0:
            crossed = True
            if stop_on_crossing:
                break
        ws.append(w)
        zs.append(z)
    return ws, zs, crossed


def shoot(kappa: float, c: float, p: Params, steps: int = DEFAULT_STEPS) -> ShootProfile:
    """Integrate from ``r = 1e-6 R`` with ``u = c r^|n|``, ``u' = |n| c r^(|n|-1)``."""
    if not c >= 0:
        raise DomainError("core amplitude must be nonnegative")
    if steps < DEFAULT_STEPS:
        raise DomainError(f"need at least {DEFAULT_STEPS} steps, got {steps}")
    ws, zs, _ = _integrate(kappa, c, p, steps)
    m = abs(p.n)
    r = np.linspace(START_FRACTION * p.R, p.R, steps + 1)
    w = np.asarray(ws)
    z = np.asarray(zs)
    rm = r ** m
    u = rm * w
    du = m * r ** (m - 1) * w + rm * z
    return ShootProfile(kappa=float(kappa), c=float(c), r=r, u=u, du=du, params=p)


def _crosses(kappa, c, p, steps) -> bool:
    try:
        _, _, crossed = _integrate(kappa, c, p, steps, stop_on_crossing=True)
    except ShotOverflow:
        return True
    return crossed


def _end_value(kappa, c, p, steps) -> float:
    ws, _, _ = _integrate(kappa, c, p, steps)
    return ws[-1] * p.R ** abs(p.n)


def _polish(f, c, width: int = 8) -> float:
    """Best of the floating-point neighbours of ``c``; ``u(R)`` is steep in ``c`` at large ``kappa``."""
    cands = [c]
    lo = hi = c
    for _ in range(width):
        lo = math.nextafter(lo, 0.0)
        hi = math.nextafter(hi, math.inf)
        cands += [lo, hi]
    vals = [abs(f(x)) for x in cands]
    return cands[int(np.argmin(vals))]


def profile_for_kappa(kappa: float, p: Params, steps: int = DEFAULT_STEPS,
                      c_range=(1e-8, 1e3), per_decade: int = 3, rtol: float = 1e-9) -> ShootProfile:
    """Nodeless profile with ``u(R) = 0`` at propagation constant ``kappa``.

    A logarithmic scan over ``c_range`` locates the first amplitude at which the
    shot acquires an interior zero; bisection on that event and a final Brent
    solve on ``u(R)`` pin ``c``.
    """
    lo, hi = c_range
    cs = np.geomspace(lo, hi, int(round(per_decade * math.log10(hi / lo))) + 1)
    flags = [_crosses(kappa, c, p, steps) for c in cs]
    flips = [i for i in range(len(cs) - 1) if not flags[i] and flags[i + 1]]
    if not flips:
        raise NoBracket(f"no sign change in the core amplitude over [{lo:g}, {hi:g}] at kappa={kappa}")
    if len(flips) > 1:
        warnings.warn(f"multiple shooting brackets at kappa={kappa}; using the smallest amplitude",
                      RuntimeWarning, stacklevel=2)
    c_lo, c_hi = cs[flips[0]], cs[flips[0] + 1]
    for _ in range(200):
        if _end_value(kappa, c_hi, p, steps) < 0 and c_hi / c_lo - 1 < 1e-2:
            break
        mid = math.sqrt(c_lo * c_hi)
        if _crosses(kappa, mid, p, steps):
            c_hi = mid
        else:
            c_lo = mid
        if c_hi / c_lo - 1 < 1e-15:
            break
    f_lo = _end_value(kappa, c_lo, p, steps)
    f_hi = _end_value(kappa, c_hi, p, steps)
    if f_lo > 0 > f_hi:
        c = scipy.optimize.brentq(lambda c: _end_value(kappa, c, p, steps), c_lo, c_hi,
                                  xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=200)
        c = _polish(lambda c: _end_value(kappa, c, p, steps), c)
    else:
        c = c_lo
    prof = shoot(kappa, c, p, steps)
    if abs(prof.u_end) > rtol * prof.max_u:
        log.warning("shooting defect |u(R)|/max u = %.2e exceeds %.1e", abs(prof.u_end) / prof.max_u, rtol)
    return prof


@dataclass(frozen=True)
class FluxCurve:
    kappa: np.ndarray
    flux: np.ndarray
    ok: np.ndarray
    profiles: tuple = ()

    def __len__(self):
        return len(self.kappa)


def flux_of_kappa(kappa_grid, p: Params, steps: int = DEFAULT_STEPS) -> FluxCurve:
    """Energy flux of the nodeless profile at each ``kappa``; failed points are NaN and flagged."""
    ks = np.asarray(list(kappa_grid), dtype=float)
    flux = np.full(ks.shape, np.nan)
    ok = np.zeros(ks.shape, dtype=bool)
    profiles = []
    for i, k in enumerate(ks):
        try:
            prof = profile_for_kappa(k, p, steps)
        except NoBracket as exc:
            log.warning("skipping kappa=%g: %s", k, exc)
            profiles.append(None)
            continue
        flux[i] = prof.flux()
        ok[i] = True
        profiles.append(prof)
    return FluxCurve(ks, flux, ok, tuple(profiles))
