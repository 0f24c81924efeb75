r"""Continuous functionals of the saturable n-vortex problem.

The stationary amplitude :math:`u(r)` on :math:`[0, R]` solves

.. math::

    (r u_r)_r - \frac{n^2}{r} u + \frac{2 r u^3}{1 + \alpha u^2} - 2\kappa r u = 0,
    \qquad u(0) = u(R) = 0.

Every functional here is evaluated by quadrature against a :class:`RadialField`,
which carries samples of ``u`` and its derivatives at the interior quadrature
nodes of a :class:`~vortexsoliton.basis.Mesh`. No integrand is ever evaluated
at ``r = 0``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, UnsupportedBasis

LOG2_TERM = 2.0 * math.log(2.0) - 1.0


@dataclass(frozen=True)
class Params:
    """Physical parameters: saturation ``alpha``, winding ``n`` and radius ``R``."""

    alpha: float
    n: int
    R: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if not self.R > 0:
            raise DomainError(f"R must be positive, got {self.R}")
        if int(self.n) != self.n or abs(self.n) < 1:
            raise DomainError(f"winding number must be a nonzero integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "R", float(self.R))

    @property
    def inv_alpha(self) -> float:
        return 1.0 / self.alpha


@dataclass(frozen=True, eq=False)
class RadialField:
    """Amplitude ``u`` sampled at quadrature nodes.

    Fields built from a basis keep ``basis`` and ``coeffs``; fields built from
    closed-form profiles keep an ``evaluator`` instead. ``u_rr`` is ``None``
    when second derivatives are unavailable (piecewise-linear fields).
    """

    r: np.ndarray
    w: np.ndarray
    u: np.ndarray
    u_r: np.ndarray
    R: float
    u_rr: Optional[np.ndarray] = None
    basis: object = None
    coeffs: Optional[np.ndarray] = None
    evaluator: Optional[Callable] = field(default=None, repr=False)

    @classmethod
    def from_function(cls, mesh, f, df, d2f=None) -> "RadialField":
        """Sample callables ``f``, ``df`` (and optionally ``d2f``) on ``mesh``."""
        r = mesh.qr

        def evaluator(x, deriv=0):
            x = np.asarray(x, dtype=float)
            fn = (f, df, d2f)[deriv]
            if fn is None:
                raise UnsupportedBasis("second derivative not supplied")
            return np.asarray(fn(x), dtype=float) * np.ones_like(x)

        return cls(
            r=r,
            w=mesh.qw,
            u=evaluator(r, 0),
            u_r=evaluator(r, 1),
            u_rr=None if d2f is None else evaluator(r, 2),
            R=mesh.R,
            evaluator=evaluator,
        )

    @classmethod
    def zero(cls, mesh) -> "RadialField":
        z = np.zeros_like(mesh.qr)
        return cls(r=mesh.qr, w=mesh.qw, u=z, u_r=z.copy(), u_rr=z.copy(), R=mesh.R,
                   evaluator=lambda x, deriv=0: np.zeros_like(np.asarray(x, dtype=float)))

    @property
    def smooth(self) -> bool:
        return self.u_rr is not None

    def evaluate(self, x, deriv: int = 0) -> np.ndarray:
        """Evaluate ``u`` (``deriv=0``), ``u_r`` (1) or ``u_rr`` (2) at arbitrary radii."""
        if self.basis is not None:
            return self.basis.evaluate(self.coeffs, x, deriv)
        if self.evaluator is None:
            raise UnsupportedBasis("field has no pointwise evaluator")
        return self.evaluator(x, deriv)

    def scaled(self, t: float) -> "RadialField":
        """Return the field ``t * u``."""
        ev = None
        if self.evaluator is not None:
            base = self.evaluator
            ev = lambda x, deriv=0: t * base(x, deriv)  # noqa: E731
        return RadialField(
            r=self.r, w=self.w, u=t * self.u, u_r=t * self.u_r, R=self.R,
            u_rr=None if self.u_rr is None else t * self.u_rr,
            basis=self.basis,
            coeffs=None if self.coeffs is None else t * self.coeffs,
            evaluator=ev,
        )

    def __neg__(self) -> "RadialField":
        return self.scaled(-1.0)


@dataclass(frozen=True)
class FunctionalValue:
    """A functional value together with the partial integrals it was built from."""

    value: float
    breakdown: dict

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class TentProfile:
    """Piecewise-linear witness: rises as ``(b/a) r`` then falls back to zero at ``2a``."""

    a_half: float
    b: float

    @classmethod
    def for_flux(cls, R: float, Q0: float) -> "TentProfile":
        """Tent on ``[0, R]`` whose energy flux equals ``Q0``."""
        return cls(a_half=R / 2.0, b=math.sqrt(3.0 * Q0 / (math.pi * R * R)))

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        a, b = self.a_half, self.b
        return np.where(r <= a, b / a * r, b / a * (2 * a - r))

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        s = self.b / self.a_half
        return np.where(r < self.a_half, s, -s)

    def field(self, mesh) -> RadialField:
        """Sample the tent on ``mesh``; the kink must sit on a cell boundary."""
        if not math.isclose(2 * self.a_half, mesh.R, rel_tol=1e-12):
            raise DomainError("tent support must equal the mesh radius")
        return RadialField.from_function(mesh, self, self.derivative)


def _integrals(u: RadialField, alpha: float) -> dict:
    r, w, v, vr = u.r, u.w, u.u, u.u_r
    v2 = v * v
    x = alpha * v2
    return {
        "kinetic": float(np.dot(w, r * vr * vr)),
        "inv_r": float(np.dot(w, v2 / r)),
        "flux": float(np.dot(w, r * v2)),
        "log": float(np.dot(w, r * np.log1p(x))),
        "saturable": float(np.dot(w, r * v2 / (1.0 + x))),
        "quartic": float(np.dot(w, r * v2 * v2 / (1.0 + x))),
    }


def energy_flux(u: RadialField) -> float:
    """Beam power ``2 pi int r u^2 dr``."""
    return 2.0 * math.pi * float(np.dot(u.w, u.r * u.u * u.u))


def action_I(u: RadialField, p: Params) -> FunctionalValue:
    """Action whose flux-constrained minimizers solve the vortex equation."""
    s = _integrals(u, p.alpha)
    bd = {
        "kinetic": s["kinetic"],
        "centrifugal": p.n ** 2 * s["inv_r"],
        "flux": s["flux"],
        "log": s["log"],
        "saturable": s["saturable"],
    }
    value = (0.5 * (bd["kinetic"] + bd["centrifugal"]) - p.inv_alpha * bd["flux"]
             + p.inv_alpha ** 2 * bd["log"])
    return FunctionalValue(value, bd)


def action_I_kappa(u: RadialField, p: Params, kappa: float) -> FunctionalValue:
    """Action at fixed propagation constant: ``I(u) + kappa int r u^2 dr``."""
    base = action_I(u, p)
    return FunctionalValue(base.value + kappa * base.breakdown["flux"], dict(base.breakdown))


def energy_E(u: RadialField, p: Params) -> float:
    """Finite-energy functional; finiteness defines admissibility."""
    s = _integrals(u, p.alpha)
    return 0.5 * (s["kinetic"] + s["inv_r"] + s["log"])


def gamma_big(t: float, u: RadialField, p: Params, kappa: float) -> float:
    """``Gamma(t, u)`` with ``gamma_kappa(t u) = t^2 Gamma(t, u)``.

    ``t = inf`` drops the saturable term, which is its exact limit.
    """
    if t < 0:
        raise DomainError("t must be nonnegative")
    r, w, v = u.r, u.w, u.u
    v2 = v * v
    quad = 0.5 * (np.dot(w, r * u.u_r ** 2) + p.n ** 2 * np.dot(w, v2 / r)) \
        - (p.inv_alpha - kappa) * np.dot(w, r * v2)
    if math.isinf(t):
        return float(quad)
    sat = np.dot(w, r * v2 / (1.0 + p.alpha * t * t * v2))
    return float(quad + p.inv_alpha * sat)


def gamma_kappa(u: RadialField, p: Params, kappa: float) -> float:
    """Half the Nehari functional ``<I_kappa'(u), u>``; zero on the Nehari manifold."""
    return gamma_big(1.0, u, p, kappa)


def kappa_from_field(u: RadialField, p: Params, Q0: float, flux_rtol: float = 1e-6) -> float:
    """Propagation constant recovered from a flux-``Q0`` field via the weak form tested on ``u``."""
    if not Q0 > 0:
        raise DomainError(f"Q0 must be positive, got {Q0}")
    q = energy_flux(u)
    if abs(q - Q0) > flux_rtol * Q0:
        warnings.warn(f"field flux {q:.6g} differs from Q0={Q0:.6g}", RuntimeWarning, stacklevel=2)
    s = _integrals(u, p.alpha)
    return -math.pi / Q0 * (s["kinetic"] + p.n ** 2 * s["inv_r"] - 2.0 * s["quartic"])


def ode_defect(r, u, u_r, u_rr, p: Params, kappa: float):
    """Pointwise defect ``(r u_r)_r - n^2 u / r + 2 r u^3/(1+alpha u^2) - 2 kappa r u``."""
    return (u_r + r * u_rr - p.n ** 2 * u / r
            + 2.0 * r * u ** 3 / (1.0 + p.alpha * u * u) - 2.0 * kappa * r * u)


def strong_residual(u: RadialField, p: Params, kappa: float, smooth: bool = False,
                    smooth_N: int = 40) -> float:
    """Integrated squared ODE defect.

    Fields without second derivatives are rejected unless ``smooth`` is set, in
    which case they are first projected onto a ``smooth_N``-term sine basis.
    """
    if u.u_rr is None:
        if not smooth:
            raise UnsupportedBasis("field has no second derivative; pass smooth=True")
        from .basis import Mesh, build_basis, project, synthesize

        sb = build_basis("sine", smooth_N, Mesh.uniform(u.R))
        f = u.evaluate(sb.mesh.qr)
        u = synthesize(project(f, sb), sb)
    d = ode_defect(u.r, u.u, u.u_r, u.u_rr, p, kappa)
    return float(np.dot(u.w, d * d))


def pohozaev_sides(u: RadialField, p: Params, kappa: float) -> tuple[float, float]:
    """Both sides of the integrated identity obtained by testing the equation with ``u``.

    Returns ``(-int r u_r^2, int {n^2 u^2/r + 2 kappa r u^2 - 2 r u^4/(1+alpha u^2)})``.
    """
    s = _integrals(u, p.alpha)
    lhs = -s["kinetic"]
    rhs = p.n ** 2 * s["inv_r"] + 2.0 * kappa * s["flux"] - 2.0 * s["quartic"]
    return lhs, rhs


def log_bracket(y: float) -> float:
    """``ln(1+y) - 2 + 2 atan(sqrt y)/sqrt y``, with a series branch for small ``y``."""
    if y < 0:
        raise DomainError("argument must be nonnegative")
    if y < 1e-3:
        return math.fsum((-1) ** (k + 1) * y ** k / (k * (2 * k + 1)) for k in range(1, 10))
    s = math.sqrt(y)
    return math.log1p(y) - 2.0 + 2.0 * math.atan(s) / s


def tent_integrals(t: TentProfile, p: Params) -> tuple[float, float, float, float]:
    """Closed forms of ``int r u^2``, ``int r u_r^2``, ``int u^2/r`` and ``int r ln(1+alpha u^2)``."""
    if not math.isclose(t.a_half, p.R / 2.0, rel_tol=1e-12):
        raise DomainError(f"tent half-width {t.a_half} must equal R/2 = {p.R / 2}")
    a, b = t.a_half, t.b
    return (
        2.0 / 3.0 * a * a * b * b,
        2.0 * b * b,
        2.0 * b * b * LOG2_TERM,
        2.0 * a * a * log_bracket(p.alpha * b * b),
    )


def tent_action(t: TentProfile, p: Params, kappa: float = 0.0) -> float:
    """``I_kappa`` of the tent from its closed-form integrals."""
    m, k, c, lg = tent_integrals(t, p)
    return 0.5 * (k + p.n ** 2 * c) - (p.inv_alpha - kappa) * m + p.inv_alpha ** 2 * lg


def tent_gamma_inf(t: TentProfile, p: Params, kappa: float) -> float:
    """``Gamma(inf, tent)`` in closed form."""
    m, k, c, _ = tent_integrals(t, p)
    return 0.5 * (k + p.n ** 2 * c) - (p.inv_alpha - kappa) * m
