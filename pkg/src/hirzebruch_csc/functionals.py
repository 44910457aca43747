"""Global quantities of g_m(R): volume, Yamabe and B_t values, Chern-Gauss-Bonnet.

A U(2)-invariant function phi(t) integrates over Sigma_m as

    (2 pi^2 / m) * int_{-T}^{T} f(t) phi(t) dt,

the 1/m accounting for the m-fold covering S^3 -> S^3/Gamma_m.  Each closed
form below is paired with this quadrature as an independent check.
"""

from dataclasses import asdict, dataclass
import math
from typing import Callable

import numpy as np

from .curvature import csc_bach_regular, norm_invariants, CurvatureState
from .errors import InconsistencyError, NonFiniteIntegrandError, PreconditionError
from .profile import SolverParams, derive_constants, jet, solve_closed_form

__all__ = [
    "FunctionalReport",
    "EigenBounds",
    "Bump",
    "closed_integrals",
    "quadrature",
    "integrate_dt",
    "volume",
    "yamabe_value",
    "bt_value",
    "bt_coefficients",
    "cgb_check",
    "weyl_variation",
    "weyl_el_residual",
    "weyl_el_constant",
    "eigen_bounds",
    "build_report",
]

TWO_PI2 = 2.0 * math.pi ** 2
GL_POINTS = 16
GL_PANELS = 64
QUAD_RTOL = 1e-10
MAX_DOUBLINGS = 5
YAMABE_RTOL = 1e-10
BT_RTOL = 1e-7
FIBER_EIGEN_UPPER_TOTAL = 8.0

_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_POINTS)


def _arcsin_k(params):
    return math.asin(derive_constants(params).k)


def closed_integrals(params):
    """``(T, int f, int f^3, int f^5)`` over [-T, T] in closed form."""
    c = derive_constants(params)
    m, beta = params.m, params.beta
    a = math.sqrt(2.0) * math.asin(c.k)
    return (c.T, 2.0 * a, 2.0 * beta * a + 2.0 * m,
            (2.0 * m * m + 3.0 * beta * beta) * a + 3.0 * m * beta)


def _panel_nodes(T, panels):
    edges = T * np.sin(np.pi * (2 * np.arange(panels + 1) - panels) / (2.0 * panels))
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    nodes = 0.5 * (hi + lo) + half * _GL_X[None, :]
    weights = half * _GL_W[None, :]
    return nodes.ravel(), weights.ravel()


def integrate_dt(profile, fn, panels=GL_PANELS):
    """``int_{-T}^{T} fn(state) dt`` by composite Gauss-Legendre with panel doubling.

    ``fn`` receives a :class:`CurvatureState` holding every node at once and
    returns an array of integrand values.  Panels are Chebyshev-spaced, and
    the panel count doubles until two successive sums agree to ``QUAD_RTOL``.
    """
    previous = None
    for _ in range(MAX_DOUBLINGS + 1):
        nodes, weights = _panel_nodes(profile.T, panels)
        values = np.asarray(fn(jet(profile, nodes)), dtype=float)
        if not np.all(np.isfinite(values)):
            raise NonFiniteIntegrandError(
                "integrand is not finite; evaluate 1/f terms through the Duffing closure"
            )
        total = float(np.dot(weights, np.broadcast_to(values, nodes.shape)))
        if previous is not None and abs(total - previous) <= QUAD_RTOL * max(abs(total), 1e-300):
            return total
        previous = total
        panels *= 2
    return total


def quadrature(profile, integrand, panels=GL_PANELS):
    """``(2 pi^2 / m) int f(t) phi(t) dt`` with ``phi = integrand(state)``."""
    return TWO_PI2 / profile.m * integrate_dt(
        profile, lambda s: np.asarray(s.f) * integrand(s), panels)


def volume(params):
    """Closed-form volume ``4 sqrt(2) pi^2 arcsin(k) / m``."""
    return 4.0 * math.sqrt(2.0) * math.pi ** 2 * _arcsin_k(params) / params.m


def yamabe_value(params):
    """``Y(g_m(R)) = 2 2^{1/4} pi R sqrt(arcsin(k) / m)``, checked against ``R sqrt(Vol)``."""
    R = params.scalar_curvature
    y = 2.0 * 2.0 ** 0.25 * math.pi * R * math.sqrt(_arcsin_k(params) / params.m)
    other = R * math.sqrt(volume(params))
    if abs(y - other) > YAMABE_RTOL * max(abs(y), abs(other), 1e-300):
        raise InconsistencyError(f"Yamabe routes disagree: {y!r} vs {other!r}")
    return y


def bt_coefficients(params):
    """``(intercept, slope)`` with ``B_t = intercept + t * slope``."""
    m, R = params.m, params.scalar_curvature
    a = math.sqrt(2.0) * _arcsin_k(params)
    intercept = TWO_PI2 / m * (72.0 * m * m + 59.0 / 3.0 * R * R - 272.0 * R + 960.0) * a \
        - 4.0 * math.pi ** 2 * (19.0 * R - 120.0)
    slope = TWO_PI2 / m * 2.0 * R * R * a
    return intercept, slope


def _w_sq(state):
    return norm_invariants(state).w_sq


def _r_sq(state):
    return norm_invariants(state).r_sq


def bt_value(params, t, profile=None, check=True):
    """Closed-form ``int |W|^2 + t R^2 dVol`` at g_m(R).

    With ``check`` the value is compared with quadrature over ``profile``
    (solved on demand) and an :class:`InconsistencyError` raised beyond
    ``BT_RTOL`` relative.
    """
    intercept, slope = bt_coefficients(params)
    value = intercept + t * slope
    if check:
        if profile is None:
            profile = solve_closed_form(params)
        quad = quadrature(profile, lambda s: _w_sq(s) + t * _r_sq(s))
        if abs(quad - value) > BT_RTOL * max(abs(value), abs(quad), 1.0):
            raise InconsistencyError(f"B_t closed form {value!r} vs quadrature {quad!r}")
    return value


def cgb_check(profile):
    """``int f (|W|^2/4 + R^2/24 - |tsRic|^2/2) dt``; equals 16 m on Sigma_m (chi = 4)."""

    def density(s):
        d = norm_invariants(s)
        return np.asarray(s.f) * (d.w_sq / 4.0 + d.r_sq / 24.0 - d.tsric_sq / 2.0)

    return integrate_dt(profile, density)


@dataclass(frozen=True)
class Bump:
    """Smooth compactly supported ``amplitude * exp(1 - 1/(1 - s^2))``, ``s = (t - center)/width``."""

    center: float
    width: float
    amplitude: float = 1.0

    def support(self):
        return self.center - self.width, self.center + self.width

    def derivatives(self, t):
        """``(h, h', h'')`` at ``t``; zero outside the support."""
        t = np.asarray(t, dtype=float)
        w = self.width
        s = (t - self.center) / w
        inside = np.abs(s) < 1.0
        s_in = np.where(inside, s, 0.0)
        q = 1.0 - s_in * s_in
        g = np.where(inside, np.exp(1.0 - 1.0 / q), 0.0)
        # d/ds of exp(1 - 1/q) = g * (-2 s / q^2)
        d1 = -2.0 * s_in / (q * q)
        d1p = -2.0 / (q * q) - 8.0 * s_in * s_in / (q ** 3)
        h = self.amplitude * g
        hp = self.amplitude * g * d1 / w
        hpp = self.amplitude * g * (d1 * d1 + d1p) / (w * w)
        return h, np.where(inside, hp, 0.0), np.where(inside, hpp, 0.0)


def _weyl_lagrangian(f, fp, fpp):
    state = CurvatureState.point(f, fp, fpp)
    return f * norm_invariants(state).w_sq


def weyl_variation(profile, bump, eps=1e-5, panels=32):
    """Directional derivative of ``F(f) = (2 pi^2/m) int f |W|^2 dt`` along ``bump``.

    Returns ``(derivative, pairing)`` where the derivative is the central
    difference ``(F(f + eps h) - F(f - eps h)) / 2 eps`` restricted to the
    bump's support, and ``pairing = (2 pi^2/m) int h B_3 dt``.
    """
    lo, hi = bump.support()
    if lo <= -profile.T or hi >= profile.T:
        raise PreconditionError("bump support must lie inside (-T, T)")
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)[:, None]
    nodes = (0.5 * (edges[1:] + edges[:-1])[:, None] + half * _GL_X[None, :]).ravel()
    weights = (half * _GL_W[None, :]).ravel()
    s = jet(profile, nodes)
    f, fp, fpp = np.asarray(s.f), np.asarray(s.fp), np.asarray(s.fpp)
    h, hp, hpp = bump.derivatives(nodes)
    if np.any(f - eps * np.abs(h) <= 0.0):
        raise PreconditionError("perturbed profile must stay positive")
    plus = _weyl_lagrangian(f + eps * h, fp + eps * hp, fpp + eps * hpp)
    minus = _weyl_lagrangian(f - eps * h, fp - eps * hp, fpp - eps * hpp)
    scale = TWO_PI2 / profile.m
    derivative = scale * float(np.dot(weights, (plus - minus) / (2.0 * eps)))
    b3 = np.asarray(csc_bach_regular(profile.params, f, fp).b3)
    pairing = scale * float(np.dot(weights, h * b3))
    return derivative, pairing


def weyl_el_residual(profile, bump, c, eps=1e-5):
    """Relative mismatch ``|dF - c <h, B_3>| / |dF|`` for one bump (0 for a null bump)."""
    derivative, pairing = weyl_variation(profile, bump, eps)
    if derivative == 0.0 and pairing == 0.0:
        return 0.0
    return abs(derivative - c * pairing) / max(abs(derivative), abs(c * pairing))


def weyl_el_constant(profile, bumps, eps=1e-5):
    """Fit ``c = dF / <h, B_3>`` on the first bump; return ``(c, ratios)`` over all bumps."""
    ratios = []
    for bump in bumps:
        derivative, pairing = weyl_variation(profile, bump, eps)
        ratios.append(derivative / pairing)
    return ratios[0], np.array(ratios)


@dataclass(frozen=True)
class EigenBounds:
    lower: float
    upper: float
    total_upper: float
    stability: str


def eigen_bounds(params):
    """Fibre eigenvalue bounds and the instability tag.

    ``K^2 / (2 pi^2 sqrt(2 m^2 + beta^2) arcsin^2 k) <= lambda_fibre <= sqrt(2)/arcsin k``;
    the total space has ``lambda_1 <= 8``, so R > 24 violates ``lambda_1 >= R/3``.
    Nothing here certifies stability.
    """
    c = derive_constants(params)
    a = math.asin(c.k)
    s = math.sqrt(2.0 * params.m ** 2 + params.beta ** 2)
    lower = c.K ** 2 / (TWO_PI2 * s * a * a)
    upper = math.sqrt(2.0) / a
    tag = "unstable_R_gt_24" if params.scalar_curvature > 24.0 else "bound_inconclusive"
    return EigenBounds(lower, upper, FIBER_EIGEN_UPPER_TOTAL, tag)


@dataclass(frozen=True)
class FunctionalReport:
    m: int
    scalar_curvature: float
    beta: float
    t_coefficient: float
    volume: float
    volume_quadrature: float
    yamabe: float
    bt_intercept: float
    bt_slope: float
    bt_value: float
    T: float
    int_f: float
    int_f3: float
    int_f5: float
    cgb_integral: float
    weyl_restricted: float
    eigen_lower: float
    eigen_upper: float
    eigen_total_upper: float
    stability: str

    def to_dict(self):
        return asdict(self)


def build_report(params, t_coefficient=0.0, profile=None):
    if profile is None:
        profile = solve_closed_form(params)
    T, i1, i3, i5 = closed_integrals(params)
    intercept, slope = bt_coefficients(params)
    eb = eigen_bounds(params)
    return FunctionalReport(
        m=params.m,
        scalar_curvature=params.scalar_curvature,
        beta=params.beta,
        t_coefficient=float(t_coefficient),
        volume=volume(params),
        volume_quadrature=quadrature(profile, lambda s: np.ones_like(np.asarray(s.f))),
        yamabe=yamabe_value(params),
        bt_intercept=intercept,
        bt_slope=slope,
        bt_value=bt_value(params, t_coefficient, profile),
        T=T,
        int_f=i1,
        int_f3=i3,
        int_f5=i5,
        cgb_integral=cgb_check(profile),
        weyl_restricted=quadrature(profile, _w_sq),
        eigen_lower=eb.lower,
        eigen_upper=eb.upper,
        eigen_total_upper=eb.total_upper,
        stability=eb.stability,
    )
