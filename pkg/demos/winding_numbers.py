"""How the winding number changes the soliton at fixed flux Q0 = 10 pi.

Higher winding pushes the ring outward and lowers kappa; once |n| >= Q0 / pi
the closed-form estimates force kappa < 0, so the beam is no longer
exponentially confined.
"""
import math

import numpy as np

from vortexsoliton import Params, bounds_report, default_basis, minimize_sphere

Q0 = 10 * math.pi
basis = default_basis("sine", 20, 8.0)

for n in (1, 2, 6, 8, 10):
    p = Params(0.1, n, 8.0)
    res = minimize_sphere(Q0, p, basis)
    u = res.field
    peak = u.r[np.argmax(u.u)]
    rep = bounds_report(p, Q0, res.kappa)
    note = "kappa < 0 forced" if rep.winding_negative else ""
    print(f"n={n:2d}  kappa={res.kappa:+.4f}  ring radius={peak:.2f}  residual={res.residual:.1e}  {note}")
