import math

import mpmath
import numpy as np
import pytest
import sympy as sp

from hirzebruch_csc import SolverParams, bach_derdzinski, CurvatureState, solve_closed_form
from hirzebruch_csc.errors import NonFiniteIntegrandError, PreconditionError
from hirzebruch_csc.functionals import (
    Bump,
    build_report,
    bt_coefficients,
    bt_value,
    cgb_check,
    closed_integrals,
    eigen_bounds,
    integrate_dt,
    quadrature,
    volume,
    weyl_el_constant,
    weyl_el_residual,
    weyl_variation,
    yamabe_value,
)
from hirzebruch_csc.curvature import norm_invariants

from conftest import GRID, random_jets

# exact values at (m, R) = (1, 8), computed in 30-digit arithmetic
mpmath.mp.dps = 30
VOL_18 = float(mpmath.sqrt(2) * mpmath.pi ** 3)
YAMABE_18 = float(8 * mpmath.sqrt(mpmath.sqrt(2) * mpmath.pi ** 3))
BT0_18 = float(2 * mpmath.pi ** 2 * mpmath.mpf(344) / 3 * mpmath.sqrt(2) * mpmath.pi / 4
               - 128 * mpmath.pi ** 2)


def test_closed_integrals_examples():
    T, i1, i3, i5 = closed_integrals(SolverParams(1, 8.0))
    assert i1 == pytest.approx(math.pi / math.sqrt(2), rel=1e-15)
    assert i3 == pytest.approx(2.0, rel=1e-15)
    assert i5 == pytest.approx(math.pi / math.sqrt(2), rel=1e-15)


@pytest.mark.parametrize("m", [1, 2, 3, 4, 5])
@pytest.mark.parametrize("R", list(np.linspace(-40, 40, 9)))
def test_closed_integrals_vs_quadrature(m, R):
    p = SolverParams(m, R)
    prof = solve_closed_form(p)
    _, *closed = closed_integrals(p)
    for j, ref in zip((1, 3, 5), closed):
        q = integrate_dt(prof, lambda s, j=j: np.asarray(s.f) ** j)
        assert abs(q - ref) < 1e-8 * abs(ref)


def test_volume():
    assert volume(SolverParams(1, 8.0)) == pytest.approx(VOL_18, rel=1e-15)
    assert volume(SolverParams(2, 8.0)) == pytest.approx(VOL_18 / 2, rel=1e-15)
    prof = solve_closed_form(SolverParams(1, 8.0))
    assert quadrature(prof, lambda s: np.ones_like(s.f)) == pytest.approx(VOL_18, rel=1e-12)


def test_quadrature_f2_matches_int_f3():
    p = SolverParams(2, -3.0)
    prof = solve_closed_form(p)
    ref = 2 * math.pi ** 2 / 2 * closed_integrals(p)[2]
    assert quadrature(prof, lambda s: np.asarray(s.f) ** 2) == pytest.approx(ref, rel=1e-9)


def test_yamabe():
    assert yamabe_value(SolverParams(1, 8.0)) == pytest.approx(YAMABE_18, rel=1e-14)
    assert yamabe_value(SolverParams(1, 0.0)) == 0.0
    ratio = yamabe_value(SolverParams(4, 8.0)) / yamabe_value(SolverParams(1, 8.0))
    assert ratio == pytest.approx(0.5, rel=1e-15)


def test_yamabe_quoted_value_off():
    # quoted as 52.97531 +- 1e-4; the exact value sits 1.5e-4 below
    assert abs(YAMABE_18 - 52.97531) > 1e-4
    assert YAMABE_18 == pytest.approx(52.9751622, abs=1e-7)


def test_bt_example():
    p = SolverParams(1, 8.0)
    assert bt_value(p, 0.0) == pytest.approx(BT0_18, rel=1e-13)
    assert bt_value(p, 1.0) - bt_value(p, 0.0) == pytest.approx(
        2 * math.pi ** 2 * 128 * math.sqrt(2) * math.pi / 4, rel=1e-13)


@pytest.mark.parametrize("m, R", GRID)
def test_bt_closed_vs_quadrature(m, R):
    p = SolverParams(m, R)
    prof = solve_closed_form(p)
    intercept, slope = bt_coefficients(p)
    r2 = quadrature(prof, lambda s: norm_invariants(s).r_sq)
    if slope:
        assert abs(r2 - slope) < 1e-9 * abs(slope)
    for t in (-1.0, 0.0, 1.0, 59 / 6):
        q = quadrature(prof, lambda s: norm_invariants(s).w_sq + t * norm_invariants(s).r_sq)
        v = bt_value(p, t, prof, check=False)
        assert abs(q - v) < 1e-7 * max(abs(v), 1.0)


@pytest.mark.parametrize("m, R", GRID + [(2, 0.0), (3, 24.0)])
def test_cgb(m, R):
    assert cgb_check(solve_closed_form(SolverParams(m, R))) == pytest.approx(16 * m, rel=1e-6)


def test_non_finite_integrand(g18):
    with pytest.raises(NonFiniteIntegrandError):
        integrate_dt(g18, lambda s: np.where(np.asarray(s.f) < 0.5, np.inf, 1.0))


def test_eigen_bounds():
    eb = eigen_bounds(SolverParams(1, 8.0))
    k = 1 / math.sqrt(2)
    K = float(mpmath.ellipk(0.5))
    assert eb.lower == pytest.approx(K * K / (2 * math.pi ** 2 * math.sqrt(2) * (math.pi / 4) ** 2), rel=1e-14)
    assert eb.upper == pytest.approx(math.sqrt(2) / (math.pi / 4), rel=1e-15)
    assert eb.lower == pytest.approx(0.19963, abs=1e-4)
    assert eb.upper == pytest.approx(1.80063, abs=1e-4)
    assert eigen_bounds(SolverParams(1, 25.0)).stability == "unstable_R_gt_24"
    assert eigen_bounds(SolverParams(1, 24.0)).stability == "bound_inconclusive"
    for m in range(1, 6):
        for R in np.linspace(-40, 40, 81):
            b = eigen_bounds(SolverParams(m, R))
            assert b.lower < b.upper


def test_bump_derivatives():
    b = Bump(0.2, 0.5, 2.0)
    t = np.linspace(-0.25, 0.65, 50)
    h = 1e-5
    h0, h1, h2 = b.derivatives(t)
    np.testing.assert_allclose(h1, (b.derivatives(t + h)[0] - b.derivatives(t - h)[0]) / (2 * h), atol=1e-6)
    np.testing.assert_allclose(h2, (b.derivatives(t + h)[1] - b.derivatives(t - h)[1]) / (2 * h), atol=1e-5)
    assert b.derivatives(0.8)[0] == 0.0


def test_weyl_variation_null_bump(g18):
    d, pair = weyl_variation(g18, Bump(0.0, 0.5, 0.0))
    assert d == 0.0 and pair == 0.0
    assert weyl_el_residual(g18, Bump(0.0, 0.5, 0.0), 8.0) == 0.0


def test_weyl_variation_nonzero(g18):
    d, pair = weyl_variation(g18, Bump(0.0, 0.5))
    assert abs(d) > 1e-3 and abs(pair) > 1e-3
    with pytest.raises(PreconditionError):
        weyl_variation(g18, Bump(1.4, 0.5))


def test_weyl_el_constant_consistent(g18):
    bumps = [Bump(c, w) for c, w in ((0.0, 0.5), (0.3, 0.4), (-0.7, 0.5), (1.0, 0.3),
                                     (-0.2, 1.0), (0.6, 0.6), (-1.1, 0.3), (0.0, 1.2),
                                     (0.9, 0.5), (-0.5, 0.8))]
    c, ratios = weyl_el_constant(g18, bumps)
    assert np.max(np.abs(ratios / c - 1)) < 2e-3
    assert c == pytest.approx(8.0, rel=1e-6)
    assert all(weyl_el_residual(g18, b, c) < 2e-3 for b in bumps[1:])


def test_weyl_euler_lagrange_symbolic():
    """The EL expression of f|W|^2 equals 8 B_3 for arbitrary jets."""
    t = sp.symbols("t")
    f = sp.Function("f")(t)
    R = -2 * f.diff(t, 2) / f - 2 * f ** 2 + 8
    L = f * (R ** 2 - 12 * f ** 2 * R + 144 * f.diff(t) ** 2 + 36 * f ** 4) / 3
    el = sp.euler_equations(L, f, t)[0].lhs
    syms = sp.symbols("f0:5")
    for i in range(4, -1, -1):
        el = el.subs(f.diff(t, i) if i else f, syms[i])
    fn = sp.lambdify(syms, el, "numpy")
    s = random_jets(200, seed=31)
    vals = fn(s.f, s.fp, s.fpp, s.fppp, s.fpppp)
    np.testing.assert_allclose(vals, 8 * bach_derdzinski(s).b3, rtol=1e-9, atol=1e-9)


def test_report():
    r = build_report(SolverParams(1, 8.0), 1.0)
    d = r.to_dict()
    assert d["volume"] == pytest.approx(VOL_18, rel=1e-14)
    assert d["yamabe"] == pytest.approx(YAMABE_18, rel=1e-14)
    assert d["yamabe"] == pytest.approx(8 * math.sqrt(d["volume"]), rel=1e-10)
    assert d["cgb_integral"] == pytest.approx(16, rel=1e-9)
    assert d["eigen_lower"] <= d["eigen_upper"]
    assert d["stability"] == "bound_inconclusive"
