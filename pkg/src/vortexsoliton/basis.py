"""Radial discretization: uniform mesh, sine and P1-hat families, flux-orthonormalization.

Both families vanish at ``r = 0`` and ``r = R``. After orthonormalization under
``(u, v) = 2 pi int r u v dr`` the flux of ``sum a_j psi_j`` is simply ``sum a_j^2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ConfigError, DimensionError, NumericalError
from .model import RadialField

DEFAULT_CELLS = 512
GAUSS_ORDER = 4

_KIND_ALIASES = {
    "sine": "sine", "spectral-sine": "sine", "spectral": "sine",
    "hat": "hat", "hat-p1": "hat", "p1": "hat",
}


@dataclass(frozen=True, eq=False)
class Mesh:
    """Uniform partition of ``[0, R]`` with composite Gauss-Legendre nodes per cell."""

    R: float
    n_cells: int
    order: int = GAUSS_ORDER
    nodes: np.ndarray = field(init=False, repr=False)
    qr: np.ndarray = field(init=False, repr=False)
    qw: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.R > 0:
            raise ConfigError("mesh radius must be positive")
        if int(self.n_cells) != self.n_cells or self.n_cells < 1:
            raise ConfigError("n_cells must be a positive integer")
        nodes = np.linspace(0.0, self.R, self.n_cells + 1)
        g, gw = np.polynomial.legendre.leggauss(self.order)
        h = self.R / self.n_cells
        qr = (nodes[:-1, None] + 0.5 * h * (g[None, :] + 1.0)).ravel()
        qw = np.tile(0.5 * h * gw, self.n_cells)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "qr", qr)
        object.__setattr__(self, "qw", qw)

    @classmethod
    def uniform(cls, R: float, n_cells: int = DEFAULT_CELLS, order: int = GAUSS_ORDER) -> "Mesh":
        return cls(float(R), int(n_cells), int(order))

    @property
    def h(self) -> float:
        return self.R / self.n_cells

    def integrate(self, values) -> float:
        return float(np.dot(self.qw, values))


def orthonormalize(gram) -> np.ndarray:
    """Change of basis ``T`` with ``T.T @ gram @ T = I``.

    ``T`` is upper triangular (inverse transpose of the Cholesky factor), so the
    ``j``-th new function mixes only raw functions ``1..j``: the same span and
    ordering classical Gram-Schmidt produces.
    """
    g = np.asarray(gram, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise NumericalError("Gram matrix must be square")
    if not np.allclose(g, g.T, rtol=1e-12, atol=1e-14 * np.abs(g).max()):
        raise NumericalError("Gram matrix is not symmetric")
    try:
        L = np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("Gram matrix is not positive definite; raw functions are dependent") from exc
    return scipy.linalg.solve_triangular(L, np.eye(len(g)), lower=True).T


class BasisSet:
    """Flux-orthonormal radial basis ``psi_j = sum_k T_kj phi_k`` over raw functions ``phi_k``."""

    def __init__(self, kind: str, N: int, mesh: Mesh):
        kind = _KIND_ALIASES.get(kind)
        if kind is None:
            raise ConfigError(f"unknown basis kind; choose from {sorted(_KIND_ALIASES)}")
        if int(N) != N or N < 2:
            raise ConfigError(f"basis size must be an integer >= 2, got {N}")
        if kind == "hat" and N != mesh.n_cells - 1:
            raise ConfigError(f"hat basis needs N = n_cells - 1 = {mesh.n_cells - 1}, got {N}")
        self.kind = kind
        self.N = int(N)
        self.mesh = mesh
        self.R = mesh.R
        self.smooth = kind == "sine"

        r, w = mesh.qr, mesh.qw
        raw = self._raw(r, 0)
        gram = 2.0 * math.pi * (raw * (w * r)) @ raw.T
        self.transform = orthonormalize(gram)
        T = self.transform.T
        self.psi = T @ raw
        self.dpsi = T @ self._raw(r, 1)
        self.d2psi = T @ self._raw(r, 2) if self.smooth else None
        g = 2.0 * math.pi * (self.psi * (w * r)) @ self.psi.T
        self.gram_error = float(np.abs(g - np.eye(self.N)).max())

    def __repr__(self):
        return f"BasisSet(kind={self.kind!r}, N={self.N}, R={self.R}, n_cells={self.mesh.n_cells})"

    def _raw(self, x, deriv):
        x = np.asarray(x, dtype=float)
        if self.kind == "sine":
            k = np.arange(1, self.N + 1)[:, None] * (math.pi / self.R)
            arg = k * x[None, :]
            if deriv == 0:
                return np.sin(arg)
            if deriv == 1:
                return k * np.cos(arg)
            if deriv == 2:
                return -k * k * np.sin(arg)
        else:
            h = self.mesh.h
            centers = self.mesh.nodes[1:-1][:, None]
            s = (x[None, :] - centers) / h
            if deriv == 0:
                return np.clip(1.0 - np.abs(s), 0.0, None)
            if deriv == 1:
                inside = np.abs(s) < 1.0
                return np.where(inside, -np.sign(s) / h, 0.0)
        raise NumericalError(f"derivative of order {deriv} unavailable for {self.kind} basis")

    def functions(self, x, deriv: int = 0) -> np.ndarray:
        """Orthonormal functions (or derivatives) at ``x``; shape ``(N, len(x))``."""
        return self.transform.T @ self._raw(np.atleast_1d(x), deriv)

    def evaluate(self, coeffs, x, deriv: int = 0) -> np.ndarray:
        return np.asarray(coeffs) @ self.functions(x, deriv)


def build_basis(kind: str, N: int, mesh: Mesh) -> BasisSet:
    """Construct and orthonormalize a basis of ``N`` functions on ``mesh``."""
    return BasisSet(kind, N, mesh)


def default_basis(kind: str, N: int, R: float, n_cells: int | None = None) -> BasisSet:
    """Basis with its natural mesh: 512 cells for sine, ``N + 1`` elements for hats."""
    if n_cells is None:
        n_cells = DEFAULT_CELLS if _KIND_ALIASES.get(kind) == "sine" else N + 1
    return build_basis(kind, N, Mesh.uniform(R, n_cells))


def synthesize(a, basis: BasisSet) -> RadialField:
    """Field ``u = sum a_j psi_j`` with samples cached at the quadrature nodes."""
    a = np.asarray(a, dtype=float)
    if a.shape != (basis.N,):
        raise DimensionError(f"expected {basis.N} coefficients, got shape {a.shape}")
    return RadialField(
        r=basis.mesh.qr,
        w=basis.mesh.qw,
        u=a @ basis.psi,
        u_r=a @ basis.dpsi,
        u_rr=None if basis.d2psi is None else a @ basis.d2psi,
        R=basis.R,
        basis=basis,
        coeffs=a.copy(),
    )


def project(f, basis: BasisSet) -> np.ndarray:
    """Flux-inner-product coefficients of ``f`` sampled at ``basis.mesh.qr``."""
    f = np.asarray(f, dtype=float)
    m = basis.mesh
    return 2.0 * math.pi * basis.psi @ (m.qw * m.qr * f)
