import math

import numpy as np
import pytest
import sympy as sp

from hirzebruch_csc import (
    CurvatureState,
    SolverParams,
    bach_closed_rho,
    bach_closed_scalar,
    bach_derdzinski,
    csc_bach_regular,
    jet,
    norm_invariants,
    ricci_diagonal,
    scalar_curvature,
    solve_closed_form,
)
from hirzebruch_csc.curvature import (
    RHO_CONSTANT_DERIVED,
    RHO_CONSTANT_ORIGINAL,
    radial_hessian,
    ricci_laplacian_traces,
    scalar_curvature_derivatives,
)
from hirzebruch_csc.errors import PreconditionError, SingularityError

from conftest import GRID, random_jets

B4_PEAK = (184 - 128 * math.sqrt(2)) / 24
FLAT = CurvatureState.point(1.0)


def test_scalar_and_ricci_examples():
    assert scalar_curvature(FLAT) == 6.0
    assert scalar_curvature(CurvatureState.point(2.0)) == 0.0
    assert ricci_diagonal(FLAT).tolist() == [2.0, 2.0, 2.0, 0.0]
    assert ricci_diagonal(FLAT).sum() == scalar_curvature(FLAT)


def test_ric3_at_peak(g18):
    ric = ricci_diagonal(jet(g18, 0.0))
    assert ric[2] == pytest.approx(3 * math.sqrt(2), abs=1e-14)


def test_norms_flat():
    d = norm_invariants(FLAT)
    assert d.w_sq == 0.0
    assert d.ric_sq == 12.0
    assert d.rm_sq == 12.0


def test_norm_identities_random():
    s = random_jets(500, seed=4)
    d = norm_invariants(s)
    np.testing.assert_allclose(d.ric.sum(axis=0), d.R, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(d.tsric_sq, d.ric_sq - d.r_sq / 4, rtol=1e-12)


def test_rho_reconstruction():
    s = random_jets(200, seed=8)
    for i, name in enumerate(("fp", "fpp", "fppp", "fpppp"), start=1):
        rho = getattr(s, f"rho{i}")
        np.testing.assert_allclose(rho * s.f, getattr(s, name), rtol=4 * np.finfo(float).eps)


def test_singular_without_closure():
    s = CurvatureState.point(0.0, 1.0)
    with pytest.raises(SingularityError):
        scalar_curvature(s)
    with pytest.raises(SingularityError):
        bach_closed_scalar(CurvatureState.point(1e-9))
    with pytest.raises(SingularityError):
        bach_derdzinski(CurvatureState.point(1e-9))


def test_closure_at_boundary(g18):
    end = jet(g18, np.array([-g18.T, g18.T]))
    np.testing.assert_allclose(scalar_curvature(end), 8.0, atol=1e-12)
    assert np.all(np.isfinite(norm_invariants(end).w_sq))


@pytest.mark.parametrize("m, R", GRID)
def test_constant_scalar_curvature(m, R):
    prof = solve_closed_form(SolverParams(m, R))
    assert np.max(np.abs(scalar_curvature(jet(prof, prof.t)) - R)) < 1e-10


def test_radial_hessian():
    hess, lap = radial_hessian(FLAT, 0.0, 0.0)
    assert np.all(hess == 0) and lap == 0
    hess, lap = radial_hessian(FLAT, 1.0, 0.0)
    assert np.all(hess == 0) and lap == 0
    s = random_jets(100, seed=2)
    rng = np.random.default_rng(3)
    pp, ppp = rng.normal(size=(2, 100))
    hess, lap = radial_hessian(s, pp, ppp)
    np.testing.assert_allclose(-hess.sum(axis=0), lap, atol=1e-13)


def test_traces_examples():
    tr = ricci_laplacian_traces(FLAT)
    np.testing.assert_allclose(tr, [0, 0, 0, 3, 0, 0], atol=1e-15)
    assert ricci_laplacian_traces(CurvatureState.point(2.0))[0] == 96.0
    np.testing.assert_allclose(ricci_laplacian_traces(FLAT, corrected=True), 0, atol=1e-15)


def test_bach_flat_product():
    assert np.max(np.abs(bach_derdzinski(FLAT).as_array())) < 1e-14
    assert np.max(np.abs(bach_closed_scalar(FLAT).as_array())) < 1e-14
    assert np.max(np.abs(bach_closed_rho(FLAT, 16).as_array())) < 1e-14
    np.testing.assert_allclose(bach_closed_rho(FLAT, 11).as_array(), [5 / 6, 5 / 6, -5 / 6, -5 / 6])


def test_three_routes_agree():
    s = random_jets(1000, seed=11)
    ref = bach_derdzinski(s).as_array()
    scale = np.maximum(np.max(np.abs(ref), axis=0), 1.0)
    for other in (bach_closed_scalar(s), bach_closed_rho(s, RHO_CONSTANT_DERIVED)):
        assert np.max(np.abs(other.as_array() - ref)) < 1e-9
        assert np.max(np.abs(other.as_array() - ref) / scale) < 1e-10


def test_quoted_constant_offset_is_state_independent():
    s = random_jets(1000, seed=12)
    diff = bach_closed_rho(s, RHO_CONSTANT_ORIGINAL).as_array() - bach_derdzinski(s).as_array()
    expected = (5 / 6) * np.array([1, 1, -1, -1])
    np.testing.assert_allclose(diff, expected[:, None] * np.ones_like(diff), atol=1e-9)


@pytest.mark.parametrize("route", [bach_derdzinski, bach_closed_scalar,
                                   lambda s: bach_closed_rho(s, 11), lambda s: bach_closed_rho(s, 16)])
def test_trace_free(route):
    B = route(random_jets(1000, seed=5))
    assert np.max(np.abs(B.trace()) / np.maximum(B.max_abs(), 1e-300)) < 1e-10
    assert np.array_equal(B.b1, B.b2)


def test_b4_peak(g18):
    s = jet(g18, 0.0)
    for B in (bach_derdzinski(s), bach_closed_scalar(s), csc_bach_regular(g18.params, s.f, s.fp)):
        assert B.b4 == pytest.approx(B4_PEAK, abs=1e-10)


def test_regular_form_boundary():
    B = csc_bach_regular(SolverParams(1, 8.0), 0.0, -1.0)
    assert B.b4 == pytest.approx(-4 / 3, abs=1e-15)
    assert abs(B.trace()) < 1e-14


def test_regular_form_matches_closed(g18):
    inner = g18.f > 0.05
    s = jet(g18, g18.t[inner])
    a = csc_bach_regular(g18.params, s.f, s.fp).as_array()
    b = bach_closed_scalar(s).as_array()
    assert np.max(np.abs(a - b)) < 1e-10
    reg = csc_bach_regular(g18.params, g18.f, g18.fp)
    assert np.max(np.abs(reg.trace())) < 1e-12


def test_regular_form_precondition():
    with pytest.raises(PreconditionError):
        csc_bach_regular(SolverParams(1, 8.0), 1.0, 1.0)


@pytest.mark.parametrize("m, R", [(1, 8.0), (2, -8.0), (3, 40.0)])
def test_divergence_identity(m, R):
    prof = solve_closed_form(SolverParams(m, R))
    ts = prof.t[prof.f > 0.1][1:-1]
    h = 1e-5
    b4 = lambda t: bach_derdzinski(jet(prof, t)).b4
    s = jet(prof, ts)
    B = bach_derdzinski(s)
    lhs = (b4(ts + h) - b4(ts - h)) / (2 * h)
    assert np.max(np.abs(lhs - s.fp / s.f * (B.b3 - B.b4))) < 1e-4


def test_scalar_derivatives_against_sympy():
    t = sp.symbols("t")
    f = 1 + sp.sin(t) / 3 + t ** 2 / 5
    R = -2 * sp.diff(f, t, 2) / f - 2 * f ** 2 + 8
    t0 = 0.4
    jets = [float(sp.diff(f, t, i).subs(t, t0)) for i in range(5)]
    s = CurvatureState(t0, *jets)
    Rp, Rpp = scalar_curvature_derivatives(s)
    assert Rp == pytest.approx(float(sp.diff(R, t).subs(t, t0)), rel=1e-13)
    assert Rpp == pytest.approx(float(sp.diff(R, t, 2).subs(t, t0)), rel=1e-13)


# Quoted closed expansions of |tsRic|^2 and R^2 differ from their defining
# identities.  The package computes both from the identities; these tests pin
# down the size of the quoted deviation.

def _quoted_tsric_sq(s):
    a = -s.fpp / s.f
    return a * a - 8 * a - 6 * s.f * s.fpp + 11 * s.f ** 4 + 24 * s.f ** 2 + 16


def _quoted_r_sq(s):
    a = -s.fpp / s.f
    return 4 * a * a + 32 * a + 8 * s.f * s.fpp + 4.0 ** 4 - 32 * s.f ** 2 + 64


def test_quoted_tsric_expansion_sign():
    s = random_jets(300, seed=21)
    d = norm_invariants(s)
    np.testing.assert_allclose(_quoted_tsric_sq(s) - d.tsric_sq, 48 * s.f ** 2, rtol=1e-11)


def test_quoted_r_sq_expansion_constant():
    s = random_jets(300, seed=22)
    d = norm_invariants(s)
    np.testing.assert_allclose(_quoted_r_sq(s) - d.r_sq, 256 - 4 * s.f ** 4, rtol=1e-10, atol=1e-10)


def test_quoted_divergence_trace():
    s = random_jets(300, seed=23)
    shift = ricci_laplacian_traces(s)[3] - ricci_laplacian_traces(s, corrected=True)[3]
    np.testing.assert_allclose(shift, 3 * s.f ** 4, rtol=1e-12)
