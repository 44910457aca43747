"""Constant scalar curvature metrics g_m(R) on Hirzebruch surfaces.

Profiles come from the Duffing problem ``f'' = -f^3 + beta f`` (closed form via
Jacobi ``cn`` or adaptive integration), curvature and Bach tensors from the
5-jet of f, and global functionals by closed form and quadrature.
"""

from ._jit import backend
from .bachflat import PRESETS, BachFlatState, BachFlatTrajectory, shoot
from .curvature import (
    BachDiagonal,
    CurvatureDiagnostics,
    CurvatureState,
    bach_closed_rho,
    bach_closed_scalar,
    bach_derdzinski,
    csc_bach_regular,
    norm_invariants,
    ricci_diagonal,
    scalar_curvature,
)
from .errors import (
    ConvergenceError,
    HCSCError,
    InconsistencyError,
    NonFiniteIntegrandError,
    PreconditionError,
    SingularityError,
)
from .functionals import FunctionalReport, build_report, cgb_check, eigen_bounds, volume, yamabe_value
from .profile import MetricProfile, SolverParams, derive_constants, jet, solve_closed_form, solve_numeric_ivp
from .special_fn import EllipticModulus, complete_elliptic_k, jacobi_cn, jacobi_scd

__version__ = "0.1.0"
