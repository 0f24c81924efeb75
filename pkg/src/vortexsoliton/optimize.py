"""Flux-constrained and Nehari-manifold minimization in an orthonormal radial basis.

In flux-orthonormal coordinates the constraint ``Q(u) = Q0`` is the sphere
``|a|^2 = Q0``. Both solvers run Riemannian descent on a sphere: tangent
direction, Armijo backtracking, radial retraction. The default direction is a
Newton step of the Lagrangian restricted to the tangent space; when that model
is not positive definite the tangent gradient in the metric of the linear
operator ``int {r u_r v_r + n^2 u v / r}`` is used instead. Convergence is
always measured on the plain Euclidean projected gradient.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from .basis import BasisSet, project, synthesize
from .errors import DomainError, IntervalError, NoSignChange, NotConverged
from .model import (LOG2_TERM, Params, RadialField, action_I, action_I_kappa, gamma_big,
                    gamma_kappa, kappa_from_field, strong_residual)
from .special import bessel_j_zero

log = logging.getLogger(__name__)

METRICS = ("hessian", "stiffness", "euclidean")


@dataclass(frozen=True)
class SolverSettings:
    max_iters: int = 5000
    grad_tol: float = 1e-8
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    restarts: int = 4
    seed: int = 0
    nehari_bisect_tol: float = 1e-12
    perturbation: float = 0.3
    metric: str = "hessian"

    def __post_init__(self):
        for name in ("max_iters", "grad_tol", "armijo_c", "nehari_bisect_tol"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if not 0 < self.backtrack < 1:
            raise DomainError("backtrack factor must lie in (0, 1)")
        if self.restarts < 0:
            raise DomainError("restarts must be nonnegative")
        if self.metric not in METRICS:
            raise DomainError(f"metric must be one of {METRICS}")


@dataclass
class SolveResult:
    """Solution pair with diagnostics.

    ``restart`` is the index of the start that produced the returned minimum
    (0 is the deterministic initial guess). ``target`` is ``Q0`` for flux
    solves and ``kappa`` for Nehari solves.
    """

    coeffs: np.ndarray
    kappa: float
    action: float
    residual: float
    flux: float
    iterations: int
    converged: bool
    restart: int
    grad_norm: float
    params: Params
    mode: str
    target: float
    basis: BasisSet = field(repr=False, default=None)
    history: list = field(repr=False, default_factory=list)
    extras: dict = field(default_factory=dict)

    @property
    def field(self) -> RadialField:
        return synthesize(self.coeffs, self.basis)


class _Discretized:
    """Quantities of one (basis, params) pair shared by all objective evaluations."""

    def __init__(self, basis: BasisSet, p: Params):
        self.basis = basis
        self.p = p
        m = basis.mesh
        self.wr = m.qw * m.qr
        psi, dpsi = basis.psi, basis.dpsi
        self.stiffness = (dpsi * self.wr) @ dpsi.T + p.n ** 2 * (psi * (m.qw / m.qr)) @ psi.T
        self.stiffness = 0.5 * (self.stiffness + self.stiffness.T)
        self._abs_stiffness = np.abs(self.stiffness)
        self._chol = scipy.linalg.cho_factor(self.stiffness)

    def precondition(self, v):
        return scipy.linalg.cho_solve(self._chol, v)

    def objective(self, a):
        f, g, _ = self.objective_scaled(a)
        return f, g

    def objective_scaled(self, a):
        """``(F, grad F, scale)``; ``scale`` bounds the magnitude of the summed terms,
        so ``eps * scale`` is the rounding level of ``F``."""
        a = np.asarray(a, dtype=float)
        p = self.p
        u = a @ self.basis.psi
        x = p.alpha * u * u
        Aa = self.stiffness @ a
        nl = self.wr * (np.log1p(x) - x)
        f = 0.5 * a @ Aa + p.inv_alpha ** 2 * nl.sum()
        g = Aa + self.basis.psi @ (self.wr * (-2.0 * u ** 3 / (1.0 + x)))
        absa = np.abs(a)
        scale = 0.5 * absa @ self._abs_stiffness @ absa + p.inv_alpha ** 2 * np.abs(nl).sum()
        return float(f), g, float(scale)

    def hessian(self, a):
        p = self.p
        u = a @ self.basis.psi
        x = p.alpha * u * u
        curv = -2.0 * u * u * (3.0 + x) / (1.0 + x) ** 2
        return self.stiffness + (self.basis.psi * (self.wr * curv)) @ self.basis.psi.T

    def direction(self, metric: str, hessian: Callable):
        """Tangent direction rule for ``metric``; ``hessian(a, g)`` gives the second-order model."""
        if metric == "euclidean":
            return None

        def rule(a, g):
            if metric == "hessian":
                d = _tangent_newton(hessian(a, g), a, g)
                if d is not None:
                    return d
            return _preconditioned(self.precondition, a, g)

        return rule


def _operator(basis: BasisSet, p: Params) -> _Discretized:
    cache = basis.__dict__.setdefault("_operators", {})
    key = (p.alpha, p.n, p.R)
    if key not in cache:
        cache[key] = _Discretized(basis, p)
    return cache[key]


def objective_and_gradient(a, p: Params, basis: BasisSet):
    """``F(a) = I(sum a_j psi_j)`` and its exact gradient."""
    return _operator(basis, p).objective(a)


def objective_ibp(a, p: Params, basis: BasisSet) -> float:
    """``F(a)`` with the logarithm integrated by parts against ``d(r^2/2)``.

    Uses ``alpha^-2 int r ln(1+alpha u^2) = -alpha^-1 int r^2 u u_r/(1+alpha u^2)``,
    valid because ``u(R) = 0``; the flux term is written as ``-|a|^2/(2 pi alpha)``.
    """
    a = np.asarray(a, dtype=float)
    op = _operator(basis, p)
    u = a @ basis.psi
    ur = a @ basis.dpsi
    r = basis.mesh.qr
    sat = np.dot(op.wr, r * u * ur / (1.0 + p.alpha * u * u))
    return float(0.5 * a @ op.stiffness @ a - p.inv_alpha * sat - a @ a / (2.0 * math.pi * p.alpha))


@dataclass
class _Descent:
    a: np.ndarray
    f: float
    g: np.ndarray
    grad_norm: float
    iterations: int
    converged: bool
    history: list


def _tangent_basis(a: np.ndarray) -> np.ndarray:
    q, _ = np.linalg.qr(a[:, None], mode="complete")
    return q[:, 1:]


def _tangent_newton(M: np.ndarray, a: np.ndarray, g: np.ndarray) -> Optional[np.ndarray]:
    """Minimizer of the quadratic model on the tangent space, or None if ``M`` is not PD there."""
    Z = _tangent_basis(a)
    H = Z.T @ M @ Z
    try:
        c = scipy.linalg.cho_factor(0.5 * (H + H.T))
    except np.linalg.LinAlgError:
        return None
    return -Z @ scipy.linalg.cho_solve(c, Z.T @ g)


def _preconditioned(solve: Callable, a: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Tangent gradient in the metric whose inverse is ``solve``."""
    z = solve(g)
    y = solve(a)
    return -(z - (a @ z) / (a @ y) * y)


def _sphere_descent(fun: Callable, a0, radius2: float, settings: SolverSettings,
                    direction: Optional[Callable] = None) -> _Descent:
    """Riemannian steepest descent of ``fun`` on ``{|a|^2 = radius2}``.

    ``fun`` returns ``(f, grad, scale)`` and may return ``f = inf`` to reject a
    point; ``eps * scale`` is taken as the rounding level of ``f``.
    ``direction(a, g)`` supplies a tangent descent direction in a chosen metric;
    the Euclidean projected gradient is used when it is absent or fails.
    """
    scale = math.sqrt(radius2)
    a = np.asarray(a0, dtype=float)
    a = scale * a / np.linalg.norm(a)
    f, g, fscale = fun(a)
    if not math.isfinite(f):
        raise NotConverged("initial point is not admissible")
    history = [f]
    t_prev = 1.0
    gnorm = math.inf
    it = 0
    for it in range(settings.max_iters + 1):
        gp = g - (g @ a) / (a @ a) * a
        gnorm = float(np.linalg.norm(gp))
        if gnorm <= settings.grad_tol:
            return _Descent(a, f, g, gnorm, it, True, history)
        if it == settings.max_iters:
            break
        d = direction(a, g) if direction is not None else None
        if d is not None and float(g @ d) < 0:
            t = 1.0
        else:
            d = -gp
            t = min(4.0, 2.0 * t_prev)
        slope = float(g @ d)
        # Below this level the Armijo test only compares rounding noise.
        noise = 64 * np.finfo(float).eps * (fscale + abs(f) + 1.0)
        accepted = False
        while t > 1e-16:
            trial = a + t * d
            trial *= scale / np.linalg.norm(trial)
            ft, gt, st = fun(trial)
            if ft <= f + settings.armijo_c * t * slope:
                accepted = True
                break
            if math.isfinite(ft) and abs(ft - f) <= noise:
                gpt = gt - (gt @ trial) / radius2 * trial
                if np.linalg.norm(gpt) < gnorm:
                    accepted = True
                    break
            t *= settings.backtrack
        if not accepted:
            log.debug("line search stalled at iteration %d, |grad| = %.3e", it, gnorm)
            break
        a, f, g, fscale, t_prev = trial, ft, gt, st, t
        history.append(f)
    return _Descent(a, f, g, gnorm, it, False, history)


def _starts(a0: np.ndarray, settings: SolverSettings):
    rng = np.random.default_rng(settings.seed)
    yield a0
    scale = np.linalg.norm(a0) / math.sqrt(len(a0))
    for _ in range(settings.restarts):
        yield a0 + settings.perturbation * scale * rng.standard_normal(len(a0))


def initial_guess(p: Params, basis: BasisSet, Q0: float) -> np.ndarray:
    """Projection of ``r^|n| (R - r)`` rescaled to flux ``Q0``."""
    r = basis.mesh.qr
    a = project(r ** abs(p.n) * (p.R - r), basis)
    return math.sqrt(Q0) * a / np.linalg.norm(a)


def _canonical_sign(a: np.ndarray, basis: BasisSet) -> np.ndarray:
    u = a @ basis.psi
    return -a if u[np.argmax(np.abs(u))] < 0 else a


def _residual(u: RadialField, p: Params, kappa: float) -> float:
    return strong_residual(u, p, kappa, smooth=not u.smooth)


def minimize_sphere(Q0: float, p: Params, basis: BasisSet,
                    settings: SolverSettings = SolverSettings()) -> SolveResult:
    """Minimize the action over fields of prescribed flux ``Q0``.

    Raises :class:`NotConverged` (with the best iterate attached) when no start
    reaches ``settings.grad_tol``.
    """
    if not Q0 > 0:
        raise DomainError(f"Q0 must be positive, got {Q0}")
    op = _operator(basis, p)
    eye = np.eye(basis.N)
    rule = op.direction(settings.metric, lambda a, g: op.hessian(a) - (g @ a) / (a @ a) * eye)
    best = None
    best_any = None
    for k, a0 in enumerate(_starts(initial_guess(p, basis, Q0), settings)):
        run = _sphere_descent(op.objective_scaled, a0, Q0, settings, rule)
        log.debug("start %d: F=%.12g |g|=%.2e iters=%d", k, run.f, run.grad_norm, run.iterations)
        if best_any is None or run.f < best_any[1].f:
            best_any = (k, run)
        if run.converged and (best is None or run.f < best[1].f):
            best = (k, run)
    k, run = best if best is not None else best_any
    a = _canonical_sign(run.a, basis)
    u = synthesize(a, basis)
    kappa = kappa_from_field(u, p, Q0)
    result = SolveResult(
        coeffs=a, kappa=kappa, action=action_I(u, p).value, residual=_residual(u, p, kappa),
        flux=float(a @ a), iterations=run.iterations, converged=run.converged, restart=k,
        grad_norm=run.grad_norm, params=p, mode="flux", target=float(Q0), basis=basis,
        history=run.history,
    )
    if best is None:
        raise NotConverged(
            f"no start reached |grad| <= {settings.grad_tol:g} (best {run.grad_norm:.3e})", best=result)
    return result


def nehari_scale(u: RadialField, p: Params, kappa: float, tol: float = 1e-12,
                 max_iter: int = 400) -> float:
    """Ray scaling ``t0 > 0`` with ``Gamma(t0, u) = 0``, so that ``t0 u`` lies on the Nehari manifold.

    ``Gamma(., u)`` is non-increasing, so bisection between ``Gamma(0) > 0`` and a
    point with ``Gamma < 0`` converges.
    """
    g0 = gamma_big(0.0, u, p, kappa)
    ginf = gamma_big(math.inf, u, p, kappa)
    if not (g0 > 0 and ginf < 0):
        raise NoSignChange(
            f"Gamma does not change sign: Gamma(0)={g0:.6g}, Gamma(inf)={ginf:.6g}",
            gamma_zero=g0, gamma_inf=ginf)
    return _bisect_gamma(_gamma_of_t(u.r, u.w, u.u, ginf, p), tol, max_iter)


def _gamma_of_t(r, w, v, ginf, p):
    wr2 = w * r * v * v
    v2 = v * v
    return lambda t: ginf + p.inv_alpha * float(np.dot(wr2, 1.0 / (1.0 + p.alpha * t * t * v2)))


def _bisect_gamma(gam, tol, max_iter):
    lo, hi = 0.0, 1.0
    while gam(hi) > 0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e150:
            raise NoSignChange("no sign change found for finite t")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        gm = gam(mid)
        if abs(gm) <= tol or hi - lo <= 4 * np.finfo(float).eps * hi:
            return mid
        if gm > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def existence_interval(p: Params) -> tuple[float, float]:
    """Open interval of propagation constants with a positive Nehari solution."""
    r0 = bessel_j_zero(0)
    shift = (p.n ** 2 + r0 ** 2) / (2.0 * p.R ** 2)
    return -shift, p.inv_alpha - shift


def nehari_radius(p: Params, kappa: float) -> float:
    """Radius beyond which the tent witness proves the Nehari manifold nonempty."""
    return math.sqrt(6.0 * (1.0 + p.n ** 2 * LOG2_TERM) / (p.inv_alpha - kappa))


def minimize_nehari(kappa: float, p: Params, basis: BasisSet,
                    settings: SolverSettings = SolverSettings()) -> SolveResult:
    """Minimize ``I_kappa`` over the Nehari manifold at fixed ``kappa``.

    Directions ``v`` on the unit flux sphere are mapped to ``t0(v) v``; the
    composite map is scale invariant, and its gradient is ``t0 I_kappa'(t0 v)``.
    """
    lo, hi = existence_interval(p)
    if not lo < kappa < hi:
        raise IntervalError(f"kappa={kappa} outside the existence interval ({lo:.6g}, {hi:.6g})")
    if not p.R > nehari_radius(p, kappa):
        log.warning("R=%g does not exceed the tent-witness radius %.4g; relying on the spectral test",
                    p.R, nehari_radius(p, kappa))
    op = _operator(basis, p)
    psi = basis.psi
    shift = (p.inv_alpha - kappa) / math.pi
    evals, evecs = np.linalg.eigh(op.stiffness)
    if evals[0] >= shift:
        raise NotConverged(
            f"Nehari manifold is empty in this basis: lowest linear eigenvalue {evals[0]:.6g} "
            f">= {shift:.6g}")
    tol = settings.nehari_bisect_tol
    eye = np.eye(basis.N)
    scale = {}

    def fun(v):
        # Directions with Gamma(inf, v) >= 0 have no Nehari point.
        vv = v @ v
        ginf = 0.5 * v @ op.stiffness @ v - (p.inv_alpha - kappa) * vv / (2.0 * math.pi)
        if ginf >= 0:
            return math.inf, None, math.inf
        u = v @ psi
        t0 = _bisect_gamma(_gamma_of_t(basis.mesh.qr, basis.mesh.qw, u, ginf, p), tol, 400)
        scale[v.tobytes()] = t0
        f, g, fs = op.objective_scaled(t0 * v)
        f += kappa * t0 * t0 * vv / (2.0 * math.pi)
        g = t0 * (g + kappa / math.pi * t0 * v)
        return f, g, fs + abs(kappa) * t0 * t0 * vv / (2.0 * math.pi)

    def hessian(v, g):
        # Second variation of I_kappa along the Nehari manifold, pulled back to directions v.
        t0 = scale.get(v.tobytes())
        if t0 is None:
            fun(v)
            t0 = scale[v.tobytes()]
        u = t0 * v
        G = op.hessian(u) + kappa / math.pi * eye
        grad_gamma = 0.5 * (g / t0 + G @ u)
        proj = eye - np.outer(v, grad_gamma) / (grad_gamma @ v)
        return t0 * t0 * proj.T @ G @ proj

    rule = op.direction(settings.metric, hessian)

    v0 = evecs[:, 0]
    v0 = _canonical_sign(v0, basis)
    best = None
    best_any = None
    for k, start in enumerate(_starts(v0, settings)):
        if fun(start / np.linalg.norm(start))[0] == math.inf:
            continue
        scale.clear()
        run = _sphere_descent(fun, start, 1.0, settings, rule)
        if best_any is None or run.f < best_any[1].f:
            best_any = (k, run)
        if run.converged and (best is None or run.f < best[1].f):
            best = (k, run)
    k, run = best if best is not None else best_any
    v = _canonical_sign(run.a, basis)
    t0 = nehari_scale(synthesize(v, basis), p, kappa, tol)
    a = t0 * v
    u = synthesize(a, basis)
    result = SolveResult(
        coeffs=a, kappa=float(kappa), action=action_I_kappa(u, p, kappa).value,
        residual=_residual(u, p, kappa), flux=float(a @ a), iterations=run.iterations,
        converged=run.converged, restart=k, grad_norm=run.grad_norm, params=p, mode="nehari",
        target=float(kappa), basis=basis, history=run.history,
        extras={"t0": t0, "gamma": gamma_kappa(u, p, kappa)},
    )
    if best is None:
        raise NotConverged(
            f"Nehari descent did not reach |grad| <= {settings.grad_tol:g} (best {run.grad_norm:.3e})",
            best=result)
    return result
