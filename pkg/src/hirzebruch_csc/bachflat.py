"""The Bach-flat equation ``B_4 = 0`` in the variables ``x = f^2``, ``y = f'^2``.

With ``' = d/dx`` the equation reads

    4 y y'' - y'^2 = 20 y - 16 x^2 + 32 x - C,

which is exactly ``6 B_4`` of the rho-form Bach diagonal with constant C.  The
constant is never defaulted: pass ``PRESETS["paper"]`` (11) or
``PRESETS["derived"]`` (16) explicitly.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from . import _ode
from .curvature import F_FLOOR, CurvatureState, bach_closed_rho
from .errors import PreconditionError
from .profile import MetricProfile, jet

__all__ = [
    "PRESETS",
    "BachFlatState",
    "BachFlatTrajectory",
    "residual",
    "ypp_from_state",
    "jets_from_curve",
    "b4_residual_on_profile",
    "shoot",
    "trajectory_to_profile",
    "parabola_constant",
    "fi_curve_residual_sup",
    "screen_boundary",
    "grid_search",
]

PRESETS = {"paper": 11.0, "derived": 16.0}

TERMINATIONS = {
    _ode.TERM_X_LIMIT: "reached_x_limit",
    _ode.TERM_Y_ZERO: "reached_y_zero",
    _ode.TERM_BLOWUP: "singular_blowup",
    _ode.TERM_UNDERFLOW: "step_underflow",
}

_CHUNK = 4096


@dataclass(frozen=True)
class BachFlatState:
    x: float
    y: float
    yp: float
    constant: float


@dataclass(frozen=True, eq=False)
class BachFlatTrajectory:
    """Samples ``(x, y, yp, ypp)`` along a shot, strictly increasing in x."""

    samples: np.ndarray
    origin: dict = field(default_factory=dict)
    termination: str = "reached_x_limit"

    @property
    def x(self):
        return self.samples[:, 0]

    @property
    def y(self):
        return self.samples[:, 1]

    @property
    def yp(self):
        return self.samples[:, 2]

    @property
    def ypp(self):
        return self.samples[:, 3]

    @classmethod
    def from_curve(cls, x, y, yp, ypp=None, **origin):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        yp = np.asarray(yp, dtype=float)
        ypp = np.full_like(x, np.nan) if ypp is None else np.broadcast_to(ypp, x.shape)
        return cls(np.column_stack([x, y, yp, ypp]), dict(origin, kind="curve"), "reached_x_limit")


def residual(state, ypp):
    """``4 y y'' - y'^2 - 20 y + 16 x^2 - 32 x + C``."""
    x, y, yp, c = state.x, state.y, state.yp, state.constant
    return 4.0 * y * ypp - yp * yp - 20.0 * y + 16.0 * x * x - 32.0 * x + c


def ypp_from_state(state):
    """Solve the equation for ``y''``; singular at ``y = 0``."""
    if np.any(np.asarray(state.y) == 0.0):
        raise PreconditionError("the Bach-flat equation is singular at y = 0")
    x, y, yp, c = state.x, state.y, state.yp, state.constant
    return (yp * yp + 20.0 * y - 16.0 * x * x + 32.0 * x - c) / (4.0 * y)


def jets_from_curve(x, y, yp, ypp, yppp=0.0, sign=1.0):
    """5-jet of f along a curve ``y(x)`` with ``x = f^2``, ``y = f'^2``.

    ``f'' = f y'``, ``f''' = f' (y' + 2x y'')`` and
    ``f'''' = f'' (y' + 2x y'') + 2 f y (3 y'' + 2x y''')``; ``sign`` picks the
    branch ``f' = sign * sqrt(y)``.
    """
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    yp, ypp, yppp = (np.asarray(v, dtype=float) for v in (yp, ypp, yppp))
    if np.any(x < 0.0) or np.any(y < 0.0):
        raise PreconditionError("x = f^2 and y = f'^2 must be non-negative")
    f = np.sqrt(x)
    fp = sign * np.sqrt(y)
    fpp = f * yp
    fppp = fp * (yp + 2.0 * x * ypp)
    fpppp = fpp * (yp + 2.0 * x * ypp) + 2.0 * f * y * (3.0 * ypp + 2.0 * x * yppp)
    return CurvatureState(np.zeros_like(f), f, fp, fpp, fppp, fpppp)


def b4_residual_on_profile(source, constant, f_min=0.1):
    """``sup |6 B_4|`` (rho form, constant C) over interior points with ``f > f_min``.

    ``source`` is a :class:`MetricProfile` (its grid nodes are used) or a
    :class:`CurvatureState` of precomputed jets.
    """
    if isinstance(source, MetricProfile):
        state = jet(source, source.t)
    else:
        state = source
    f = np.asarray(state.f, dtype=float)
    keep = f > max(f_min, F_FLOOR)
    if not np.any(keep):
        raise PreconditionError(f"no sample with f > {f_min}")
    sub = CurvatureState(np.asarray(state.t * np.ones_like(f))[keep], f[keep],
                         np.asarray(state.fp * np.ones_like(f))[keep],
                         np.asarray(state.fpp * np.ones_like(f))[keep],
                         np.asarray(state.fppp * np.ones_like(f))[keep],
                         np.asarray(state.fpppp * np.ones_like(f))[keep])
    b4 = np.asarray(bach_closed_rho(sub, constant).b4)
    return float(np.max(np.abs(6.0 * b4)))


def shoot(x0, y0, yp0, constant, x_max, tol=1e-12, h0=None):
    """Integrate the Bach-flat ODE in x from ``(x0, y0, y'(x0) = yp0)``.

    Adaptive Dormand-Prince; the run never steps across ``y = 0`` (the
    crossing is bracketed by bisection and the shot ends there) and the step
    size is floored at ``1e-13 * x_max``.
    """
    if not y0 > 0.0:
        raise PreconditionError(f"shooting needs y0 > 0, got {y0!r}")
    if not x_max > x0:
        raise PreconditionError("x_max must exceed x0")
    c = float(constant)
    h = float(h0) if h0 else min(1e-3, 0.01 * (x_max - x0))
    chunks = []
    x, y, yp = float(x0), float(y0), float(yp0)
    while True:
        buf = np.empty((_CHUNK, 4))
        n, code, x, y, yp, h = _ode.bachflat_run(x, y, yp, c, float(x_max), float(tol), h, buf)
        chunks.append(buf[:n] if not chunks else buf[1:n])
        if code != _ode.TERM_BUFFER_FULL:
            break
    samples = np.concatenate(chunks)
    origin = {"x0": float(x0), "y0": float(y0), "yp0": float(yp0), "constant": c,
              "x_max": float(x_max), "tol": float(tol)}
    return BachFlatTrajectory(samples, origin, TERMINATIONS[code])


def _hermite(x, x0, x1, y0, y1, d0, d1):
    h = x1 - x0
    s = (x - x0) / h
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1


def trajectory_to_profile(traj, t0=0.0, nodes=16):
    """Invert ``x = f^2``, ``y = f'^2`` on an increasing arc.

    ``t(f) = t0 + int df / sqrt(y(f^2))`` with y interpolated by cubic Hermite
    in x between samples and integrated per segment by Gauss-Legendre in f.
    Returns arrays ``(t, f, fp)`` at the samples, taking ``f' = +sqrt(y)``.
    """
    x, y, yp = traj.x, traj.y, traj.yp
    if np.any(np.diff(x) <= 0.0):
        raise PreconditionError("trajectory is not strictly monotone in x")
    if np.any(y <= 0.0) or np.any(x < 0.0):
        raise PreconditionError("inversion needs y > 0 and x >= 0 along the arc")
    gx, gw = np.polynomial.legendre.leggauss(nodes)
    f = np.sqrt(x)
    dt = np.empty(len(x) - 1)
    for i in range(len(x) - 1):
        fa, fb = f[i], f[i + 1]
        half = 0.5 * (fb - fa)
        fq = 0.5 * (fa + fb) + half * gx
        yq = _hermite(fq * fq, x[i], x[i + 1], y[i], y[i + 1], yp[i], yp[i + 1])
        if np.any(yq <= 0.0):
            raise PreconditionError("interpolated y vanishes inside a segment")
        dt[i] = half * float(np.dot(gw, 1.0 / np.sqrt(yq)))
    t = t0 + np.concatenate([[0.0], np.cumsum(dt)])
    return t, f, np.sqrt(y)


def parabola_constant(a, constant, xs=(0.0, 0.5, 2.0)):
    """Offset c making ``y = a x^2 - 2a x + c`` solve the equation with constant C.

    The residual is affine in c; it is evaluated at c = 0 and c = 1 and the
    root returned.  A :class:`PreconditionError` is raised if the residual is
    not independent of x (the family does not solve the equation for any c).
    """

    def res(c, x):
        st = BachFlatState(x, a * x * x - 2 * a * x + c, 2 * a * x - 2 * a, constant)
        return residual(st, 2.0 * a)

    r0 = np.array([res(0.0, x) for x in xs])
    r1 = np.array([res(1.0, x) for x in xs])
    if np.ptp(r0) > 1e-9 * max(1.0, np.max(np.abs(r0))) or np.ptp(r1) > 1e-9 * max(1.0, np.max(np.abs(r1))):
        raise PreconditionError(f"a = {a!r} parabolas do not solve the equation")
    slope = r1[0] - r0[0]
    return -r0[0] / slope


def fi_curve_residual_sup(params, constant, n=2001):
    """Sup of the Bach-flat residual along the first-integral curve of g_m(R).

    ``y = (-x^2 + 2 beta x + 2 m^2)/2`` for ``x`` in ``[0, f_max^2]``.
    """
    m, beta = params.m, params.beta
    x_top = beta + math.sqrt(beta * beta + 2.0 * m * m)
    x = np.linspace(0.0, x_top, n)
    y = (-x * x + 2.0 * beta * x + 2.0 * m * m) / 2.0
    st = BachFlatState(x, y, beta - x, constant)
    return float(np.max(np.abs(residual(st, -0.5))))


def screen_boundary(y_at_zero, atol=1e-12):
    """Return the integer m with ``y(0) = m^2`` if one exists, else ``None``.

    A Hirzebruch metric needs ``f'(+-T)^2 = m^2`` at ``f = 0``.
    """
    root = math.sqrt(y_at_zero) if y_at_zero >= 0 else float("nan")
    m = round(root) if math.isfinite(root) else 0
    if m >= 1 and abs(m * m - y_at_zero) <= atol:
        return m
    return None


def grid_search(y0s, yp0s, constant, x0=0.0, x_max=3.0, tol=1e-10):
    """Shoot from every ``(y0, yp0)`` pair; rows ``(y0, yp0, termination, min_y, x_end)``.

    Exploration only: nothing is claimed about completeness.
    """
    rows = []
    for y0 in y0s:
        for yp0 in yp0s:
            traj = shoot(x0, y0, yp0, constant, x_max, tol)
            rows.append((float(y0), float(yp0), traj.termination,
                         float(np.min(traj.y)), float(traj.x[-1])))
    return rows
