"""Fixed propagation constant: Nehari-manifold minimization and shooting.

Both routes start from kappa rather than the flux. The variational one
minimizes the fixed-kappa action over the Nehari manifold; the shooting one
integrates the ODE outward and tunes the core slope until u(R) = 0. They
should agree with each other and with the flux-constrained solve at Q0 = 40.
"""
import numpy as np

from vortexsoliton import (Params, default_basis, minimize_nehari, minimize_sphere,
                           profile_for_kappa, strong_residual)

p = Params(0.1, 1, 8.0)
basis = default_basis("sine", 40, p.R)
kappa = 1.4901

neh = minimize_nehari(kappa, p, basis)
print(f"Nehari:   flux={neh.flux:.5f}  t0={neh.extras['t0']:.4f}  gamma={neh.extras['gamma']:.1e}")

shot = profile_for_kappa(kappa, p)
print(f"shooting: flux={shot.flux():.5f}  core slope c={shot.c:.6f}  |u(R)|/max u={abs(shot.u_end) / shot.max_u:.1e}")
print(f"          projected residual={strong_residual(shot.project(basis), p, kappa):.1e}")

sph = minimize_sphere(40.0, p, basis)
r = np.linspace(0.5, 7.5, 8)
print("\n   r    sphere    nehari  shooting")
for ri, a, b, c in zip(r, basis.evaluate(sph.coeffs, r), basis.evaluate(neh.coeffs, r),
                       shot.interpolant()(r)):
    print(f"{ri:4.1f} {a:9.5f} {b:9.5f} {c:9.5f}")
