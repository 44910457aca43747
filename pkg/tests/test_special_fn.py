import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from hirzebruch_csc.special_fn import (
    EllipticModulus,
    _scd_loop,
    _scd_numpy,
    complete_elliptic_k,
    jacobi_cn,
    jacobi_scd,
)

mpmath.mp.dps = 30

moduli = st.floats(0.0, 0.999, allow_nan=False)


@pytest.mark.parametrize("k, expected", [
    (0.0, 1.5707963267948966),
    (1 / math.sqrt(2), 1.854074677301372),
    (0.5, 1.6857503548125961),
])
def test_k_reference_values(k, expected):
    assert complete_elliptic_k(k) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("k", [0.1, 0.5, 0.7071067811865476, 0.9, 0.99, 0.999999])
def test_k_against_mpmath_and_quadrature(k):
    ref = float(mpmath.ellipk(mpmath.mpf(k) ** 2))
    assert complete_elliptic_k(k) == pytest.approx(ref, rel=1e-14)
    if k < 0.99:
        # x = sin(theta) removes the endpoint singularity
        quad, _ = integrate.quad(lambda th: 1 / math.sqrt(1 - (k * math.sin(th)) ** 2),
                                 0, math.pi / 2, epsabs=0, epsrel=1e-13, limit=200)
        assert complete_elliptic_k(k) == pytest.approx(quad, rel=1e-11)


def test_k_monotone():
    ks = np.linspace(0, 0.999, 1000)
    assert np.all(np.diff([complete_elliptic_k(k) for k in ks]) > 0)


@pytest.mark.parametrize("bad", [-0.1, 1.0, 1.5, float("nan")])
def test_modulus_domain(bad):
    with pytest.raises(ValueError):
        complete_elliptic_k(bad)


def test_modulus_complement():
    mod = EllipticModulus.from_k(0.6)
    assert mod.k ** 2 + mod.k_prime ** 2 == pytest.approx(1.0, abs=4 * np.finfo(float).eps)
    assert EllipticModulus.from_k_squared(0.75).k_prime == pytest.approx(0.5, rel=1e-15)


def test_cn_examples():
    assert jacobi_cn(0.0, 0.3) == 1.0
    assert jacobi_cn(1.0, 0.0) == pytest.approx(0.5403023058681398, abs=1e-15)
    k = 1 / math.sqrt(2)
    assert abs(jacobi_cn(complete_elliptic_k(k), k)) < 1e-13


@pytest.mark.parametrize("k", [0.0, 0.3, 0.7071067811865476, 0.95, 0.9999])
def test_scd_against_mpmath(k):
    K = complete_elliptic_k(k)
    u = np.linspace(-5 * K, 5 * K, 57)
    sn, cn, dn = jacobi_scd(u, k)
    m = mpmath.mpf(k) ** 2
    for ui, s, c, d in zip(u, sn, cn, dn):
        assert s == pytest.approx(float(mpmath.ellipfun("sn", ui, m=m)), abs=1e-13)
        assert c == pytest.approx(float(mpmath.ellipfun("cn", ui, m=m)), abs=1e-13)
        assert d == pytest.approx(float(mpmath.ellipfun("dn", ui, m=m)), abs=1e-13)


def test_scd_against_scipy():
    u = np.linspace(-4, 4, 101)
    sn, cn, dn, _ = special.ellipj(u, 0.36)
    got = jacobi_scd(u, 0.6)
    for a, b in zip(got, (sn, cn, dn)):
        np.testing.assert_allclose(a, b, atol=1e-14)


@pytest.mark.parametrize("k", [0.0, 0.4, 0.83, 0.999])
def test_numpy_fallback_matches_kernel(k):
    mod = EllipticModulus.from_k(k)
    K = complete_elliptic_k(mod)
    u = np.linspace(-9, 9, 301)
    loop = [np.empty_like(u) for _ in range(3)]
    _scd_loop(u, mod.k, mod.k_prime, K, *loop)
    alt = _scd_numpy(u, mod.k, mod.k_prime, K)
    for a, b in zip(loop, alt):
        np.testing.assert_allclose(a, b, atol=2e-15)


def test_small_and_large_inputs_agree():
    u = np.linspace(-9, 9, 1000)
    big = jacobi_scd(u, 0.6)
    small = [jacobi_scd(chunk, 0.6) for chunk in np.array_split(u, 20)]
    for i in range(3):
        np.testing.assert_allclose(np.concatenate([c[i] for c in small]), big[i], atol=2e-15)


def test_non_finite_argument():
    with pytest.raises(ValueError):
        jacobi_cn(float("inf"), 0.5)
    with pytest.raises(ValueError):
        jacobi_scd(np.array([0.0, np.nan]), 0.5)


def test_shapes():
    u = np.zeros((3, 4))
    assert jacobi_scd(u, 0.2)[1].shape == (3, 4)
    assert isinstance(jacobi_cn(0.2, 0.2), float)


@settings(max_examples=200, deadline=None)
@given(k=moduli, s=st.floats(-1.0, 1.0))
def test_pythagorean_identities(k, s):
    K = complete_elliptic_k(k)
    sn, cn, dn = jacobi_scd(2 * K * s, k)
    assert abs(cn) <= 1.0
    assert sn * sn + cn * cn == pytest.approx(1.0, abs=1e-14)
    assert dn * dn + k * k * sn * sn == pytest.approx(1.0, abs=1e-14)


@settings(max_examples=100, deadline=None)
@given(k=moduli, s=st.floats(-1.0, 1.0))
def test_symmetries(k, s):
    K = complete_elliptic_k(k)
    u = 2 * K * s
    assert jacobi_cn(-u, k) == jacobi_cn(u, k)
    assert jacobi_cn(2 * K - u, k) == pytest.approx(-jacobi_cn(u, k), abs=1e-13)
    assert jacobi_cn(u + 4 * K, k) == pytest.approx(jacobi_cn(u, k), abs=1e-12)


def test_cn_derivative():
    rng = np.random.default_rng(1)
    k = 0.77
    K = complete_elliptic_k(k)
    u = rng.uniform(0, K, 100)
    h = 1e-6
    fd = (jacobi_cn(u + h, k) - jacobi_cn(u - h, k)) / (2 * h)
    sn, _, dn = jacobi_scd(u, k)
    np.testing.assert_allclose(fd, -sn * dn, atol=1e-6)
