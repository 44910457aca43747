"""Dormand-Prince 5(4) kernels for the two second-order ODEs in the package.

Both systems are written as first-order pairs ``(u, v) = (y, dy/ds)``:

* ``DUFFING``:   ``v' = -u^3 + beta u``                      (s = t, p[0] = beta)
* ``BACHFLAT``:  ``v' = (v^2 + 20u - 16s^2 + 32s - C) / (4u)`` (s = x, p[0] = C)

The loops below are plain scalar code so numba can compile them; with numba
disabled they still run, only slower.
"""

import math

import numpy as np

from ._jit import jit

DUFFING = 0
BACHFLAT = 1

# termination codes shared with bachflat.py
TERM_X_LIMIT = 0
TERM_Y_ZERO = 1
TERM_BLOWUP = 2
TERM_UNDERFLOW = 3
TERM_BUFFER_FULL = 4

# Dormand-Prince tableau
C2, C3, C4, C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0,
                           49.0 / 176.0, -5103.0 / 18656.0)
B1, B3, B4, B5, B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
E1, E3, E4, E5, E6, E7 = (71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0,
                          -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)


@jit
def rhs(kind, s, u, v, c):
    if kind == DUFFING:
        return v, -u * u * u + c * u
    if u == 0.0:
        return v, math.inf
    return v, (v * v + 20.0 * u - 16.0 * s * s + 32.0 * s - c) / (4.0 * u)


@jit
def dp_step(kind, s, u, v, h, c):
    """One DP5 step; returns the 5th-order update and the embedded error estimate."""
    k1u, k1v = rhs(kind, s, u, v, c)
    k2u, k2v = rhs(kind, s + C2 * h, u + h * A21 * k1u, v + h * A21 * k1v, c)
    k3u, k3v = rhs(kind, s + C3 * h, u + h * (A31 * k1u + A32 * k2u),
                   v + h * (A31 * k1v + A32 * k2v), c)
    k4u, k4v = rhs(kind, s + C4 * h, u + h * (A41 * k1u + A42 * k2u + A43 * k3u),
                   v + h * (A41 * k1v + A42 * k2v + A43 * k3v), c)
    k5u, k5v = rhs(kind, s + C5 * h,
                   u + h * (A51 * k1u + A52 * k2u + A53 * k3u + A54 * k4u),
                   v + h * (A51 * k1v + A52 * k2v + A53 * k3v + A54 * k4v), c)
    k6u, k6v = rhs(kind, s + h,
                   u + h * (A61 * k1u + A62 * k2u + A63 * k3u + A64 * k4u + A65 * k5u),
                   v + h * (A61 * k1v + A62 * k2v + A63 * k3v + A64 * k4v + A65 * k5v), c)
    un = u + h * (B1 * k1u + B3 * k3u + B4 * k4u + B5 * k5u + B6 * k6u)
    vn = v + h * (B1 * k1v + B3 * k3v + B4 * k4v + B5 * k5v + B6 * k6v)
    k7u, k7v = rhs(kind, s + h, un, vn, c)
    eu = h * (E1 * k1u + E3 * k3u + E4 * k4u + E5 * k5u + E6 * k6u + E7 * k7u)
    ev = h * (E1 * k1v + E3 * k3v + E4 * k4v + E5 * k5v + E6 * k6v + E7 * k7v)
    return un, vn, eu, ev


@jit
def _err_norm(u, v, un, vn, eu, ev, tol):
    su = tol * (1.0 + max(abs(u), abs(un)))
    sv = tol * (1.0 + max(abs(v), abs(vn)))
    return max(abs(eu) / su, abs(ev) / sv)


@jit
def duffing_run(beta, f0, fp0, tol, targets, find_zero, t_max, out_f, out_fp):
    """Integrate the Duffing IVP forward from t = 0.

    Every value in the ascending array ``targets`` is hit exactly and the state
    stored in ``out_f``/``out_fp``.  With ``find_zero`` the run stops at the
    first zero of f, located by bisection on the step length.

    Returns ``(status, t_zero, fp_zero, n_steps)``; status 0 is success,
    1 means no zero before ``t_max``, 2 means the step size collapsed.
    """
    t = 0.0
    u = f0
    v = fp0
    h = min(0.01, 0.1 * t_max)
    idx = 0
    n_targets = targets.shape[0]
    n_steps = 0
    t_zero = np.nan
    fp_zero = np.nan
    while True:
        while idx < n_targets and targets[idx] <= t:
            out_f[idx] = u
            out_fp[idx] = v
            idx += 1
        if idx == n_targets and not find_zero:
            return 0, t_zero, fp_zero, n_steps
        if t >= t_max:
            return 1, t_zero, fp_zero, n_steps
        h_try = h
        clipped = False
        if idx < n_targets and t + h_try >= targets[idx]:
            h_try = targets[idx] - t
            clipped = True
        if t + h_try > t_max:
            h_try = t_max - t
        un, vn, eu, ev = dp_step(DUFFING, t, u, v, h_try, beta)
        err = _err_norm(u, v, un, vn, eu, ev, tol)
        if err <= 1.0:
            n_steps += 1
            if find_zero and un <= 0.0 < u:
                lo = 0.0
                hi = h_try
                while hi - lo > 1e-14:
                    mid = 0.5 * (lo + hi)
                    um, _, _, _ = dp_step(DUFFING, t, u, v, mid, beta)
                    if um > 0.0:
                        lo = mid
                    else:
                        hi = mid
                s = 0.5 * (lo + hi)
                _, vz, _, _ = dp_step(DUFFING, t, u, v, s, beta)
                t_zero = t + s
                fp_zero = vz
                return 0, t_zero, fp_zero, n_steps
            if clipped:
                t = targets[idx]
            else:
                t = t + h_try
            u = un
            v = vn
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            h_next = h_try * fac
            h = max(h, h_next) if clipped else h_next
        else:
            h = h_try * max(0.2, 0.9 * err ** -0.25)
        if h < 1e-15 * max(1.0, t):
            return 2, t_zero, fp_zero, n_steps


@jit
def bachflat_run(x0, y0, yp0, c_const, x_max, tol, h0, out):
    """Shoot the Bach-flat ODE in x from ``(x0, y0, yp0)`` towards ``x_max``.

    Accepted steps are written to ``out[:, 0:4] = (x, y, yp, ypp)`` where ypp
    is the right-hand side evaluated at the accepted state.  Returns
    ``(n_samples, termination_code, x, y, yp, h)``; code ``TERM_BUFFER_FULL``
    lets the caller resume with a fresh buffer.
    """
    cap = out.shape[0]
    x = x0
    y = y0
    yp = yp0
    h = h0
    h_floor = 1e-13 * max(abs(x_max), 1e-300)
    n = 0
    _, ypp = rhs(BACHFLAT, x, y, yp, c_const)
    out[0, 0] = x
    out[0, 1] = y
    out[0, 2] = yp
    out[0, 3] = ypp
    n = 1
    while True:
        if x >= x_max:
            return n, TERM_X_LIMIT, x, y, yp, h
        if n >= cap:
            return n, TERM_BUFFER_FULL, x, y, yp, h
        h_try = min(h, x_max - x)
        yn, ypn, ey, eyp = dp_step(BACHFLAT, x, y, yp, h_try, c_const)
        finite = math.isfinite(yn) and math.isfinite(ypn) and math.isfinite(ey) and math.isfinite(eyp)
        err = _err_norm(y, yp, yn, ypn, ey, eyp, tol) if finite else 1e300
        if finite and yn <= 0.0 and err <= 1.0:
            # zero crossing of y inside the step: bisect on the step length
            lo = 0.0
            hi = h_try
            yl = y
            ypl = yp
            while hi - lo > h_floor:
                mid = 0.5 * (lo + hi)
                ym, ypm, _, _ = dp_step(BACHFLAT, x, y, yp, mid, c_const)
                if math.isfinite(ym) and ym > 0.0:
                    lo = mid
                    yl = ym
                    ypl = ypm
                else:
                    hi = mid
            if lo > 0.0:
                x = x + lo
                y = yl
                yp = ypl
                _, ypp = rhs(BACHFLAT, x, y, yp, c_const)
                out[n, 0] = x
                out[n, 1] = y
                out[n, 2] = yp
                out[n, 3] = ypp
                n += 1
            return n, TERM_Y_ZERO, x, y, yp, h
        if finite and err <= 1.0:
            x = x + h_try
            y = yn
            yp = ypn
            _, ypp = rhs(BACHFLAT, x, y, yp, c_const)
            if not (math.isfinite(ypp) and abs(yp) < 1e12 and abs(y) < 1e12):
                return n, TERM_BLOWUP, x, y, yp, h
            out[n, 0] = x
            out[n, 1] = y
            out[n, 2] = yp
            out[n, 3] = ypp
            n += 1
            if y < 1e-14:
                return n, TERM_Y_ZERO, x, y, yp, h
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            h = h_try * fac if h_try >= h else max(h, h_try * fac)
        else:
            h = h_try * 0.2 if not finite else h_try * max(0.2, 0.9 * err ** -0.25)
        if h < h_floor:
            if y < 1e-6:
                return n, TERM_Y_ZERO, x, y, yp, h
            if abs(yp) > 1e6:
                return n, TERM_BLOWUP, x, y, yp, h
            return n, TERM_UNDERFLOW, x, y, yp, h
