"""Complete elliptic integral K(k) and Jacobi elliptic functions by AGM.

Both routines run the arithmetic-geometric mean on (1, k'), which converges
quadratically; K(k) = pi / (2 AGM(1, k')), and the Jacobi amplitude is
recovered by the descending Landen recursion over the stored AGM ladder.
"""

from dataclasses import dataclass
import math

import numpy as np

from ._jit import USE_NUMBA, jit

__all__ = [
    "EllipticModulus",
    "complete_elliptic_k",
    "jacobi_cn",
    "jacobi_scd",
]

AGM_MAX_ITER = 40
AGM_RTOL = 1e-16
# above this many points the vectorised numpy path beats the compiled loop
# (SIMD transcendental functions); below it call overhead dominates
VECTOR_MIN = 256


@dataclass(frozen=True)
class EllipticModulus:
    """Modulus ``k`` in [0, 1) together with its complement ``k' = sqrt(1 - k^2)``."""

    k: float
    k_prime: float

    @classmethod
    def from_k(cls, k):
        k = float(k)
        if not (0.0 <= k < 1.0):
            raise ValueError(f"elliptic modulus must lie in [0, 1), got k={k!r}")
        return cls(k, math.sqrt((1.0 - k) * (1.0 + k)))

    @classmethod
    def from_k_squared(cls, k2):
        """Build from the parameter ``k^2``; keeps ``k'`` accurate when ``k^2`` is close to 1."""
        k2 = float(k2)
        if not (0.0 <= k2 < 1.0):
            raise ValueError(f"elliptic parameter must lie in [0, 1), got k^2={k2!r}")
        return cls(math.sqrt(k2), math.sqrt(1.0 - k2))


def _as_modulus(mod):
    if isinstance(mod, EllipticModulus):
        if not (0.0 <= mod.k < 1.0):
            raise ValueError(f"elliptic modulus must lie in [0, 1), got k={mod.k!r}")
        return mod
    return EllipticModulus.from_k(mod)


@jit
def _agm(a, b):
    for _ in range(AGM_MAX_ITER):
        if abs(a - b) < AGM_RTOL * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return a


@jit
def _agm_ladder(k, kp):
    """Means ``a_j`` and half-differences ``c_j`` of AGM(1, k'); depends on k only."""
    a_s = np.empty(AGM_MAX_ITER + 1)
    c_s = np.empty(AGM_MAX_ITER + 1)
    a, b = 1.0, kp
    a_s[0] = a
    c_s[0] = k
    n = 0
    while n < AGM_MAX_ITER and abs(a - b) >= AGM_RTOL * a:
        c = 0.5 * (a - b)
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        n += 1
        a_s[n] = a
        c_s[n] = c
    return a_s, c_s, n


@jit
def _amplitude_sc(u, k, a_s, c_s, n):
    # u already folded into [0, K]; returns (sn, cn)
    if k == 0.0:
        return math.sin(u), math.cos(u)
    phi = (2.0 ** n) * a_s[n] * u
    for j in range(n, 0, -1):
        phi = 0.5 * (phi + math.asin(c_s[j] * math.sin(phi) / a_s[j]))
    return math.sin(phi), math.cos(phi)


@jit
def _scd_scalar(u, k, K, a_s, c_s, n):
    sgn = 1.0
    if u < 0.0:
        u = -u
        sgn = -1.0
    period = 4.0 * K
    r = u - period * math.floor(u / period)
    if r > 2.0 * K:
        r = period - r
        sgn = -sgn
    flip_cn = 1.0
    if r > K:
        r = 2.0 * K - r
        flip_cn = -1.0
    if r < 0.0:
        r = 0.0
    sn, cn = _amplitude_sc(r, k, a_s, c_s, n)
    dn = math.sqrt(1.0 - k * k * sn * sn)
    return sgn * sn, flip_cn * cn, dn


@jit
def _scd_loop(u, k, kp, K, sn, cn, dn):
    a_s, c_s, n = _agm_ladder(k, kp)
    for i in range(u.shape[0]):
        sn[i], cn[i], dn[i] = _scd_scalar(u[i], k, K, a_s, c_s, n)


def _scd_numpy(u, k, kp, K):
    """Vectorised twin of ``_scd_loop`` for the no-numba path."""
    u = np.asarray(u, dtype=float)
    sgn = np.where(u < 0.0, -1.0, 1.0)
    r = np.abs(u)
    period = 4.0 * K
    r = r - period * np.floor(r / period)
    upper = r > 2.0 * K
    r = np.where(upper, period - r, r)
    sgn = np.where(upper, -sgn, sgn)
    past_k = r > K
    r = np.clip(np.where(past_k, 2.0 * K - r, r), 0.0, None)
    if k == 0.0:
        phi = r
    else:
        a_s, c_s = [1.0], [k]
        a, b = 1.0, kp
        while len(a_s) <= AGM_MAX_ITER and abs(a - b) >= AGM_RTOL * a:
            c = 0.5 * (a - b)
            a, b = 0.5 * (a + b), math.sqrt(a * b)
            a_s.append(a)
            c_s.append(c)
        n = len(a_s) - 1
        phi = (2.0 ** n) * a_s[n] * r
        for j in range(n, 0, -1):
            phi = 0.5 * (phi + np.arcsin(c_s[j] * np.sin(phi) / a_s[j]))
    sn = np.sin(phi)
    cn = np.where(past_k, -np.cos(phi), np.cos(phi))
    dn = np.sqrt(1.0 - k * k * sn * sn)
    return sgn * sn, cn, dn


def complete_elliptic_k(mod):
    """Complete elliptic integral of the first kind, ``K(k) = pi / (2 AGM(1, k'))``.

    ``mod`` is an :class:`EllipticModulus` or a bare float ``k``.  Raises
    ``ValueError`` outside ``0 <= k < 1``.
    """
    mod = _as_modulus(mod)
    return 0.5 * math.pi / _agm(1.0, mod.k_prime)


def jacobi_scd(u, mod):
    """Return ``(sn, cn, dn)`` at ``u`` (scalar or array) for modulus ``mod``."""
    mod = _as_modulus(mod)
    K = complete_elliptic_k(mod)
    scalar = np.ndim(u) == 0
    arr = np.atleast_1d(np.asarray(u, dtype=float))
    if not np.all(np.isfinite(arr)):
        raise ValueError("jacobi functions need a finite argument")
    if USE_NUMBA and arr.size < VECTOR_MIN:
        sn, cn, dn = np.empty_like(arr), np.empty_like(arr), np.empty_like(arr)
        _scd_loop(np.ascontiguousarray(arr.ravel()), mod.k, mod.k_prime, K,
                  sn.ravel(), cn.ravel(), dn.ravel())
    else:
        sn, cn, dn = _scd_numpy(arr, mod.k, mod.k_prime, K)
    if scalar:
        return float(sn[0]), float(cn[0]), float(dn[0])
    return sn.reshape(arr.shape), cn.reshape(arr.shape), dn.reshape(arr.shape)


def jacobi_cn(u, mod):
    """Jacobi elliptic cosine ``cn(u, k)``.

    The argument is folded into ``[0, K]`` with the 4K period and
    ``cn(2K - u) = -cn(u)`` before the Landen descent.  ``k = 0`` gives ``cos u``.
    """
    return jacobi_scd(u, mod)[1]
