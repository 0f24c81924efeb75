"""Ring-profiled optical-vortex solitons in saturable media.

Variational solver at prescribed energy flux or fixed propagation constant,
closed-form bounds, and a shooting-method oracle for cross-validation.
"""
from .basis import BasisSet, Mesh, build_basis, default_basis, orthonormalize, project, synthesize
from .bounds import (BoundsReport, DecayFit, Violation, bounds_report, check_solution_against_bounds,
                     decay_fit, first_bessel_zero)
from .errors import (ConfigError, DimensionError, DomainError, IntervalError, NoBracket,
                     NoSignChange, NotConverged, NumericalError, ShotOverflow, UnsupportedBasis,
                     VortexError)
from .model import (FunctionalValue, Params, RadialField, TentProfile, action_I, action_I_kappa,
                    energy_E, energy_flux, gamma_big, gamma_kappa, kappa_from_field, strong_residual,
                    tent_integrals)
from .optimize import (SolveResult, SolverSettings, minimize_nehari, minimize_sphere, nehari_scale,
                       objective_and_gradient)
from .oracle import FluxCurve, ShootProfile, flux_of_kappa, profile_for_kappa, shoot

__version__ = "0.1.0"
