"""Fibre-scale profiles f(t) of the constant-scalar-curvature metrics g_m(R).

The profile is the positive even solution of the Duffing problem

    f'' = -f^3 + beta f,   beta = -(R - 8)/2,   f(+-T) = 0,   f'(+-T) = -+m,

whose first integral ``2 f'^2 = -f^4 + 2 beta f^2 + 2 m^2`` gives the closed
form ``f(t) = f_max cn(mu t, k)``.  A second, independent route integrates the
initial-value problem from the peak and locates the first zero of f.
"""

from dataclasses import dataclass
import math

import numpy as np

from . import _ode
from .curvature import CurvatureState
from .errors import ConvergenceError
from .special_fn import EllipticModulus, complete_elliptic_k, jacobi_scd

__all__ = [
    "SolverParams",
    "EllipticConstants",
    "MetricProfile",
    "derive_constants",
    "chebyshev_nodes",
    "solve_closed_form",
    "solve_numeric_ivp",
    "jet",
    "DEFAULT_GRID",
]

DEFAULT_GRID = 512
TOL_RANGE = (1e-13, 1e-6)


@dataclass(frozen=True)
class SolverParams:
    """The pair (m, R) selecting g_m(R); ``beta`` is derived, never stored."""

    m: int
    scalar_curvature: float

    def __post_init__(self):
        if isinstance(self.m, bool) or int(self.m) != self.m or self.m < 1:
            raise ValueError(f"Hirzebruch index m must be a positive integer, got {self.m!r}")
        object.__setattr__(self, "m", int(self.m))
        R = float(self.scalar_curvature)
        if not math.isfinite(R):
            raise ValueError(f"scalar curvature must be finite, got {R!r}")
        object.__setattr__(self, "scalar_curvature", R)

    @classmethod
    def from_beta(cls, m, beta):
        return cls(m, 8.0 - 2.0 * float(beta))

    @property
    def beta(self):
        return -(self.scalar_curvature - 8.0) / 2.0


@dataclass(frozen=True)
class EllipticConstants:
    k: float
    k_prime: float
    K: float
    T: float
    f_max: float
    mu: float

    @property
    def modulus(self):
        return EllipticModulus(self.k, self.k_prime)


def derive_constants(params):
    """Modulus, quarter period, half-length T, peak f_max and frequency mu.

    ``s = sqrt(2 m^2 + beta^2)``, ``k^2 = (s + beta) / 2s``, ``mu = sqrt(s)``,
    ``f_max^2 = s + beta``, ``T = K(k) / mu``.  ``s + beta`` and ``s - beta`` are
    formed without cancellation so k stays accurate for large ``|beta|``.
    """
    m2 = float(params.m) ** 2
    beta = params.beta
    s = math.sqrt(2.0 * m2 + beta * beta)
    if beta >= 0.0:
        s_plus = s + beta
        s_minus = 2.0 * m2 / s_plus
    else:
        s_minus = s - beta
        s_plus = 2.0 * m2 / s_minus
    k = math.sqrt(s_plus / (2.0 * s))
    k_prime = math.sqrt(s_minus / (2.0 * s))
    mod = EllipticModulus(k, k_prime)
    K = complete_elliptic_k(mod)
    mu = math.sqrt(s)
    return EllipticConstants(k=k, k_prime=k_prime, K=K, T=K / mu,
                             f_max=math.sqrt(s_plus), mu=mu)


def chebyshev_nodes(n):
    """Points ``sin(pi (2j - n + 1) / (2n - 2))`` on [-1, 1], exactly mirror-symmetric."""
    if n < 2:
        raise ValueError("grid needs at least two nodes")
    j = np.arange(n)
    return np.sin(np.pi * (2 * j - (n - 1)) / (2.0 * (n - 1)))


@dataclass(frozen=True, eq=False)
class MetricProfile:
    """Sampled profile on [-T, T] plus what is needed to regenerate it.

    ``T`` is the half-length actually used for the grid: the closed-form value
    for ``closed_form`` profiles, the detected zero for ``numeric_ivp``.
    """

    params: SolverParams
    consts: EllipticConstants
    T: float
    t: np.ndarray
    f: np.ndarray
    fp: np.ndarray
    fpp: np.ndarray
    generator: str
    tol: float = 0.0

    @property
    def m(self):
        return self.params.m

    @property
    def beta(self):
        return self.params.beta

    def __len__(self):
        return len(self.t)

    def first_integral_residual(self):
        f2 = self.f * self.f
        return 2.0 * self.fp ** 2 + f2 * f2 - 2.0 * self.beta * f2 - 2.0 * self.m ** 2

    def jet(self, t):
        return jet(self, t)


def _closed_values(consts, u):
    sn, cn, dn = jacobi_scd(u, consts.modulus)
    f = consts.f_max * cn
    fp = -consts.f_max * consts.mu * sn * dn
    return f, fp


def solve_closed_form(params, n=DEFAULT_GRID):
    """Profile ``f = f_max cn(mu t, k)`` on ``n`` Chebyshev-spaced nodes."""
    if n < 2:
        raise ValueError("grid needs at least two nodes")
    consts = derive_constants(params)
    s = chebyshev_nodes(n)
    # u = mu t = K s keeps the end nodes exactly at the quarter period
    f, fp = _closed_values(consts, consts.K * s)
    beta = params.beta
    fpp = -f ** 3 + beta * f
    return MetricProfile(params, consts, consts.T, consts.T * s, f, fp, fpp, "closed_form")


def _check_tol(tol):
    tol = float(tol)
    if not (TOL_RANGE[0] <= tol <= TOL_RANGE[1]):
        raise ValueError(f"tolerance must lie in [{TOL_RANGE[0]:g}, {TOL_RANGE[1]:g}], got {tol!r}")
    return tol


def _integrate_to(params, consts, tol, targets):
    """Integrate from the peak and return (f, f') at the ascending targets >= 0."""
    targets = np.ascontiguousarray(targets, dtype=float)
    out_f = np.empty_like(targets)
    out_fp = np.empty_like(targets)
    t_max = 4.0 * consts.T
    status, _, _, _ = _ode.duffing_run(params.beta, consts.f_max, 0.0, tol, targets, False,
                                       t_max, out_f, out_fp)
    if status != 0:
        raise ConvergenceError(f"Duffing integration stopped early (status {status})")
    return out_f, out_fp


def find_first_zero(params, tol=1e-12):
    """Return ``(T, f'(T))`` found by integrating from the peak to the first zero of f."""
    tol = _check_tol(tol)
    consts = derive_constants(params)
    t_max = 4.0 * consts.T
    empty = np.empty(0)
    status, t_zero, fp_zero, _ = _ode.duffing_run(params.beta, consts.f_max, 0.0, tol, empty,
                                                  True, t_max, empty, empty)
    if status != 0:
        raise ConvergenceError(
            f"no zero of f bracketed before t = {t_max:.6g} (status {status})"
        )
    return t_zero, fp_zero


def solve_numeric_ivp(params, tol=1e-12, n=DEFAULT_GRID):
    """Profile from adaptive Dormand-Prince integration of the IVP at the peak.

    ``f(0) = f_max``, ``f'(0) = 0``; the run stops at the first zero of f,
    which becomes the interval half-length.  A second pass hits every grid node
    on [0, T] exactly and the left half is filled by evenness.
    """
    tol = _check_tol(tol)
    consts = derive_constants(params)
    T, fp_T = find_first_zero(params, tol)
    s = chebyshev_nodes(n)
    t = T * s
    half = n // 2
    interior = t[half:-1]
    if interior.size and interior[0] < 0.0:
        interior = np.abs(interior)
    f_in, fp_in = _integrate_to(params, consts, tol, np.sort(interior))
    f_right = np.concatenate([f_in, [0.0]])
    fp_right = np.concatenate([fp_in, [fp_T]])
    if n % 2:
        f = np.concatenate([f_right[:0:-1], f_right])
        fp = np.concatenate([-fp_right[:0:-1], fp_right])
    else:
        f = np.concatenate([f_right[::-1], f_right])
        fp = np.concatenate([-fp_right[::-1], fp_right])
    fpp = -f ** 3 + params.beta * f
    return MetricProfile(params, consts, T, t, f, fp, fpp, "numeric_ivp", tol)


def jet(profile, t):
    """Full 5-jet of f at ``t`` (scalar or array) as a :class:`CurvatureState`.

    f and f' come from the profile's generator (cn evaluation or a fresh
    integration); higher derivatives from the ODE,
    ``f''' = (beta - 3 f^2) f'`` and ``f'''' = (beta - 3 f^2) f'' - 6 f f'^2``.
    """
    t_arr = np.asarray(t, dtype=float)
    T = profile.T
    if np.any(np.abs(t_arr) > T * (1.0 + 1e-12)):
        raise ValueError(f"jet requested outside [-T, T] with T = {T!r}")
    t_arr = np.clip(t_arr, -T, T)
    beta = profile.beta
    if profile.generator == "closed_form":
        f, fp = _closed_values(profile.consts, profile.consts.K * (t_arr / T))
        f, fp = np.asarray(f), np.asarray(fp)
    else:
        flat = np.abs(t_arr).ravel()
        order = np.argsort(flat, kind="stable")
        sorted_t = flat[order]
        inside = sorted_t < T
        f_s = np.zeros_like(sorted_t)
        fp_s = np.empty_like(sorted_t)
        if np.any(inside):
            f_s[inside], fp_s[inside] = _integrate_to(profile.params, profile.consts,
                                                      profile.tol, sorted_t[inside])
        fp_end = profile.fp[-1]
        fp_s[~inside] = fp_end
        f = np.empty_like(flat)
        fp = np.empty_like(flat)
        f[order] = f_s
        fp[order] = fp_s
        sign = np.where(t_arr.ravel() < 0.0, -1.0, 1.0)
        f = f.reshape(t_arr.shape)
        fp = (sign * fp).reshape(t_arr.shape)
    fpp = -f ** 3 + beta * f
    fppp = (beta - 3.0 * f * f) * fp
    fpppp = (beta - 3.0 * f * f) * fpp - 6.0 * f * fp * fp
    if t_arr.ndim == 0:
        f, fp, fpp, fppp, fpppp = (float(v) for v in (f, fp, fpp, fppp, fpppp))
        return CurvatureState(float(t_arr), f, fp, fpp, fppp, fpppp, beta)
    return CurvatureState(t_arr, f, fp, fpp, fppp, fpppp, beta)
