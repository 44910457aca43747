"""Pointwise curvature of the doubly warped metric ``g(f)`` on S^3 x (-T, T).

Everything is diagonal in the orthonormal frame ``E1, E2`` (round directions),
``E3`` (Hopf fibre, scaled by f) and ``E4 = d/dt``, so each tensor is a
4-vector of diagonal entries.  All functions accept scalars or equal-shape
numpy arrays inside a :class:`CurvatureState` and broadcast elementwise.

Three independent Bach routes are provided:

* :func:`bach_derdzinski` assembles B from second covariant derivatives of
  Ricci, the Hessian and Laplacian of R and quadratic Ricci terms;
* :func:`bach_closed_scalar` uses the closed form in R, R', R'';
* :func:`bach_closed_rho` uses the closed form in ``rho_i = f^(i)/f`` with
  an explicit constant term (11 or 16, see ``RHO_CONSTANT_*``).

The Derdzinski route is the reference.  It uses the corrected value of the
(1,1) divergence trace; see :func:`ricci_laplacian_traces`.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InconsistencyError, PreconditionError, SingularityError

__all__ = [
    "F_FLOOR",
    "RHO_CONSTANT_ORIGINAL",
    "RHO_CONSTANT_DERIVED",
    "CurvatureState",
    "CurvatureDiagnostics",
    "BachDiagonal",
    "scalar_curvature",
    "scalar_curvature_derivatives",
    "ricci_diagonal",
    "norm_invariants",
    "radial_hessian",
    "ricci_laplacian_traces",
    "bach_derdzinski",
    "bach_closed_scalar",
    "bach_closed_rho",
    "csc_bach_regular",
]

F_FLOOR = 1e-8
RHO_CONSTANT_ORIGINAL = 11.0
RHO_CONSTANT_DERIVED = 16.0

# relative agreement demanded between the two |W|^2 routes
W_SQ_RTOL = 1e-11
FIRST_INTEGRAL_ATOL = 1e-8


@dataclass(frozen=True)
class CurvatureState:
    """The 5-jet ``(f, f', f'', f''', f'''')`` at one or more values of t.

    ``beta`` optionally records the Duffing closure ``f'' = -f^3 + beta f``;
    when present, ``f''/f`` is replaced by ``beta - f^2`` wherever f is below
    :data:`F_FLOOR`, which keeps R, Ric and the norms finite at ``t = +-T``.
    ``rho1 .. rho4`` are filled only when every f exceeds the floor.
    """

    t: object
    f: object
    fp: object
    fpp: object
    fppp: object = 0.0
    fpppp: object = 0.0
    beta: Optional[float] = None
    rho1: object = field(init=False, default=None)
    rho2: object = field(init=False, default=None)
    rho3: object = field(init=False, default=None)
    rho4: object = field(init=False, default=None)

    def __post_init__(self):
        f = np.asarray(self.f, dtype=float)
        if np.all(f > F_FLOOR):
            object.__setattr__(self, "rho1", np.asarray(self.fp, dtype=float) / f)
            object.__setattr__(self, "rho2", np.asarray(self.fpp, dtype=float) / f)
            object.__setattr__(self, "rho3", np.asarray(self.fppp, dtype=float) / f)
            object.__setattr__(self, "rho4", np.asarray(self.fpppp, dtype=float) / f)

    @classmethod
    def point(cls, f, fp=0.0, fpp=0.0, fppp=0.0, fpppp=0.0, t=0.0, beta=None):
        return cls(t, f, fp, fpp, fppp, fpppp, beta)

    @classmethod
    def from_rho(cls, f, rho1=0.0, rho2=0.0, rho3=0.0, rho4=0.0, t=0.0):
        """Build a state from f and the ratios ``rho_i = f^(i)/f``."""
        return cls(t, f, rho1 * f, rho2 * f, rho3 * f, rho4 * f)

    @property
    def regular(self):
        return self.rho1 is not None

    def rhos(self):
        if self.rho1 is None:
            raise SingularityError(
                f"rho_i = f^(i)/f requested with f <= f_floor = {F_FLOOR:g}; "
                "use csc_bach_regular on constant-scalar-curvature profiles"
            )
        return self.rho1, self.rho2, self.rho3, self.rho4

    def minus_fpp_over_f(self):
        """``-f''/f``, falling back on the Duffing closure below the floor."""
        f = np.asarray(self.f, dtype=float)
        if self.rho2 is not None:
            return -self.rho2
        if self.beta is None:
            raise SingularityError(
                f"f''/f needs f > f_floor = {F_FLOOR:g} or a Duffing closure (beta)"
            )
        safe = np.where(f > F_FLOOR, f, 1.0)
        ratio = np.where(f > F_FLOOR, -np.asarray(self.fpp, dtype=float) / safe,
                         f * f - self.beta)
        return ratio if ratio.ndim else float(ratio)


@dataclass(frozen=True)
class CurvatureDiagnostics:
    R: object
    Rp: object
    Rpp: object
    ric: np.ndarray
    ric_sq: object
    tsric_sq: object
    r_sq: object
    rm_sq: object
    w_sq: object


@dataclass(frozen=True)
class BachDiagonal:
    b1: object
    b2: object
    b3: object
    b4: object
    route: str
    rho_constant: Optional[float] = None

    def as_array(self):
        return np.array([np.asarray(self.b1, dtype=float), np.asarray(self.b2, dtype=float),
                         np.asarray(self.b3, dtype=float), np.asarray(self.b4, dtype=float)])

    def trace(self):
        return self.b1 + self.b2 + self.b3 + self.b4

    def max_abs(self):
        return np.max(np.abs(self.as_array()), axis=0)


def _arr(x):
    return np.asarray(x, dtype=float)


def scalar_curvature(state):
    """``R = -2 f''/f - 2 f^2 + 8``."""
    f = _arr(state.f)
    return 2.0 * state.minus_fpp_over_f() - 2.0 * f * f + 8.0


def scalar_curvature_derivatives(state):
    """Return ``(R', R'')`` by differentiating R along the jet.

    Needs the ratios ``rho_i``; on a Duffing-closed state below the floor the
    scalar curvature is constant and both derivatives are returned as zero.
    """
    f, fp, fpp = _arr(state.f), _arr(state.fp), _arr(state.fpp)
    if not state.regular:
        if state.beta is None:
            state.rhos()
        zero = np.zeros_like(f)
        return zero, zero
    r1, r2, r3, r4 = state.rhos()
    rho2_p = r3 - r1 * r2
    rho2_pp = r4 - 2.0 * r1 * r3 - r2 * r2 + 2.0 * r1 * r1 * r2
    Rp = -2.0 * rho2_p - 4.0 * f * fp
    Rpp = -2.0 * rho2_pp - 4.0 * fp * fp - 4.0 * f * fpp
    return Rp, Rpp


def ricci_diagonal(state):
    """Ricci diagonal ``(4 - 2f^2, 4 - 2f^2, -f''/f + 2f^2, -f''/f)``."""
    f = _arr(state.f)
    a = state.minus_fpp_over_f()
    round_part = 4.0 - 2.0 * f * f
    return np.array([round_part, round_part, a + 2.0 * f * f, a + 0.0 * f])


def norm_invariants(state):
    """Squared norms of Ric, traceless Ric, R, the curvature tensor and Weyl.

    |W|^2 is computed twice: from ``3|W|^2 = R^2 - 12 f^2 R + 144 f'^2 + 36 f^4``
    and from the orthogonal splitting ``|Rm|^2 - 2|tsRic|^2 - R^2/6``.
    An :class:`InconsistencyError` is raised if they disagree.
    """
    f, fp = _arr(state.f), _arr(state.fp)
    a = state.minus_fpp_over_f()
    R = scalar_curvature(state)
    Rp, Rpp = scalar_curvature_derivatives(state)
    ric = ricci_diagonal(state)
    ric_sq = np.sum(ric * ric, axis=0)
    r_sq = R * R
    tsric_sq = ric_sq - r_sq / 4.0
    f2 = f * f
    rm_sq = 4.0 * a * a + 48.0 * fp * fp + 44.0 * f2 * f2 - 96.0 * f2 + 64.0
    w_sq = (r_sq - 12.0 * f2 * R + 144.0 * fp * fp + 36.0 * f2 * f2) / 3.0
    w_sq_split = rm_sq - 2.0 * tsric_sq - r_sq / 6.0
    scale = np.maximum.reduce([np.abs(rm_sq), 2.0 * np.abs(tsric_sq), r_sq / 6.0,
                               np.ones_like(rm_sq)])
    if np.any(np.abs(w_sq - w_sq_split) > W_SQ_RTOL * scale):
        worst = float(np.max(np.abs(w_sq - w_sq_split) / scale))
        raise InconsistencyError(f"|W|^2 routes disagree (relative gap {worst:.3e})")
    return CurvatureDiagnostics(R, Rp, Rpp, ric, ric_sq, tsric_sq, r_sq, rm_sq, w_sq)


def radial_hessian(state, phi_p, phi_pp):
    """Hessian diagonal and Laplacian of a function of t alone.

    Returns ``((0, 0, (f'/f) phi', phi''), -phi'' - (f'/f) phi')``; the
    Laplacian uses the positive (geometer's) sign convention.
    """
    f = _arr(state.f)
    if np.any(f <= F_FLOOR):
        raise SingularityError(f"radial Hessian needs f > f_floor = {F_FLOOR:g}")
    phi_p, phi_pp = _arr(phi_p), _arr(phi_pp)
    log_df = _arr(state.fp) / f
    h3 = log_df * phi_p
    zero = np.zeros(np.broadcast(h3, phi_pp).shape)
    hess = np.array([zero, zero, h3 + zero, phi_pp + zero])
    return hess, -phi_pp - h3


def ricci_laplacian_traces(state, corrected=False):
    """Diagonals of ``nabla^p nabla_p Ric`` and ``nabla^p nabla_j Ric_pi``.

    Returned in the order ``(rough_11, rough_33, rough_44, div_11, div_33, div_44)``;
    the 22 entries equal the 11 entries.

    With ``corrected=False`` the divergence trace ``div_11`` carries ``-f^4``.
    That value is not zero on the product S^3 x R (``f = 1``), where Ricci is
    parallel, and it leaves the Derdzinski sum with trace ``6 f^4``.
    ``corrected=True`` uses ``-4 f^4``, which fixes both.
    """
    f = _arr(state.f)
    r1, r2, r3, r4 = state.rhos()
    f2 = f * f
    f4 = f2 * f2
    rho2_p = r3 - r1 * r2
    rho2_pp = r4 - 2.0 * r1 * r3 - r2 * r2 + 2.0 * r1 * r1 * r2
    rough_11 = -6.0 * f2 * r2 - 8.0 * f2 * r1 * r1 + 8.0 * f4 - 8.0 * f2
    rough_33 = (-rho2_pp - r1 * rho2_p + 8.0 * f2 * r2 + 4.0 * f2 * r1 * r1
                - 16.0 * f4 + 16.0 * f2)
    rough_44 = -rho2_pp - r1 * rho2_p + 4.0 * f2 * r1 * r1
    div_11 = f2 * r2 - (4.0 if corrected else 1.0) * f4 + 4.0 * f2
    div_33 = -r1 * rho2_p - 4.0 * f2 * r2 - 2.0 * f2 * r1 * r1 + 8.0 * f4 - 8.0 * f2
    div_44 = -rho2_pp - 2.0 * f2 * r1 * r1
    return np.array([rough_11, rough_33, rough_44, div_11, div_33, div_44])


def bach_derdzinski(state):
    """Bach diagonal from Derdzinski's formula

    ``B = div div Ric - 1/2 rough Ric - 1/3 Hess R - 1/12 (Delta R) g
    + 1/3 R Ric - Ric o Ric + 1/12 (3|Ric|^2 - R^2) g``.
    """
    tr = ricci_laplacian_traces(state, corrected=True)
    rough = tr[[0, 0, 1, 2]]
    div = tr[[3, 3, 4, 5]]
    R = scalar_curvature(state)
    Rp, Rpp = scalar_curvature_derivatives(state)
    hess_R, lap_R = radial_hessian(state, Rp, Rpp)
    ric = ricci_diagonal(state)
    ric_sq = np.sum(ric * ric, axis=0)
    b = (div - 0.5 * rough - hess_R / 3.0 - lap_R / 12.0
         + R * ric / 3.0 - ric * ric + (3.0 * ric_sq - R * R) / 12.0)
    return BachDiagonal(b[0], b[1], b[2], b[3], "derdzinski")


def bach_closed_scalar(state):
    """Bach diagonal from the closed form in ``R, R', R''``."""
    f, fp = _arr(state.f), _arr(state.fp)
    if np.any(f <= F_FLOOR):
        raise SingularityError(f"closed Bach form needs f > f_floor = {F_FLOOR:g}")
    R = scalar_curvature(state)
    Rp, Rpp = scalar_curvature_derivatives(state)
    f2 = f * f
    f4 = f2 * f2
    fp2 = fp * fp
    lrp = fp / f * Rp
    b1 = (2 * Rpp + 2 * lrp + R * R - 40 * f2 * R - 16 * R + 96 * fp2 - 276 * f4 + 576 * f2) / 24.0
    b3 = (-4 * Rpp - R * R + 84 * f2 * R + 16 * R - 96 * fp2 + 492 * f4 - 1056 * f2) / 24.0
    b4 = (-4 * lrp - R * R - 4 * f2 * R + 16 * R - 96 * fp2 + 60 * f4 - 96 * f2) / 24.0
    return BachDiagonal(b1, b1, b3, b4, "closed_R")


def bach_closed_rho(state, constant=RHO_CONSTANT_ORIGINAL):
    """Bach diagonal from the closed form in ``rho_i`` with a selectable constant.

    The constant enters as ``-c`` in ``6 B_1`` and ``+c`` in ``6 B_3``, ``6 B_4``,
    so it cancels in the trace.  ``c = 16`` reproduces the other two routes;
    ``c = 11`` is off by ``(5/6)(1, 1, -1, -1)`` at every state.
    """
    f = _arr(state.f)
    r1, r2, r3, r4 = state.rhos()
    c = float(constant)
    f2 = f * f
    f4 = f2 * f2
    s11 = r1 * r1
    b1 = (-r4 + r1 * r3 + 2 * r2 * r2 - s11 * r2 + 20 * f2 * r2 + 20 * f2 * s11
          - 48 * f4 + 64 * f2 - c) / 6.0
    b3 = (2 * r4 - 4 * r1 * r3 - 3 * r2 * r2 + 4 * s11 * r2 - 40 * f2 * r2 - 20 * f2 * s11
          + 80 * f4 - 96 * f2 + c) / 6.0
    b4 = (2 * r1 * r3 - r2 * r2 - 2 * s11 * r2 - 20 * f2 * s11 + 16 * f4 - 32 * f2 + c) / 6.0
    return BachDiagonal(b1, b1, b3, b4, "closed_rho", rho_constant=c)


def csc_bach_regular(params, f, fp):
    """Bach diagonal on a constant-scalar-curvature profile, free of 1/f.

    With R constant the closed scalar form is a polynomial in ``f, f'``:
    ``24 B_4 = -96 f'^2 - 4 beta^2 + 8 beta f^2 + 60 f^4 - 128 f^2 + 64`` and
    similarly for ``B_1, B_3``, so it holds up to and including ``f = 0``.
    ``(f, f')`` must lie on the first-integral curve of ``params``.
    """
    f, fp = _arr(f), _arr(fp)
    m, beta, R = params.m, params.beta, params.scalar_curvature
    f2 = f * f
    f4 = f2 * f2
    fp2 = fp * fp
    residual = 2.0 * fp2 + f4 - 2.0 * beta * f2 - 2.0 * m * m
    scale = np.maximum.reduce([np.ones_like(f2), 2.0 * m * m + 0.0 * f2, f4,
                               2.0 * abs(beta) * f2, 2.0 * fp2])
    if np.any(np.abs(residual) > FIRST_INTEGRAL_ATOL * scale):
        raise PreconditionError(
            f"(f, f') is off the first-integral curve (residual {np.max(np.abs(residual)):.3e})"
        )
    b1 = (R * R - 40 * f2 * R - 16 * R + 96 * fp2 - 276 * f4 + 576 * f2) / 24.0
    b3 = (-R * R + 84 * f2 * R + 16 * R - 96 * fp2 + 492 * f4 - 1056 * f2) / 24.0
    b4 = (-R * R - 4 * f2 * R + 16 * R - 96 * fp2 + 60 * f4 - 96 * f2) / 24.0
    return BachDiagonal(b1, b1, b3, b4, "closed_R")
