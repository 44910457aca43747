"""Invariant suite run by ``hcsc check``.

Hard checks must pass for exit code 0.  Findings record known slips in
quoted closed forms; they are reported with their measured size and never
fail the run.
"""

from dataclasses import dataclass
import json
import math
import time

import numpy as np

from . import bachflat as bf
from .curvature import (
    CurvatureState,
    bach_closed_rho,
    bach_closed_scalar,
    bach_derdzinski,
    norm_invariants,
    ricci_laplacian_traces,
    scalar_curvature,
)
from .functionals import (
    Bump,
    bt_coefficients,
    cgb_check,
    closed_integrals,
    eigen_bounds,
    integrate_dt,
    quadrature,
    volume,
    weyl_el_constant,
    yamabe_value,
)
from .io import dump_profile, load_profile
from .profile import SolverParams, derive_constants, jet, solve_closed_form, solve_numeric_ivp
from .special_fn import complete_elliptic_k, jacobi_scd

M_VALUES = (1, 2, 3)
R_VALUES = (-8.0, 0.0, 8.0, 24.0, 40.0)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    finding: bool = False


def _special_fn():
    ok = abs(complete_elliptic_k(0.0) - math.pi / 2) < 1e-15
    ok &= abs(complete_elliptic_k(1 / math.sqrt(2)) - 1.854074677301372) < 1e-14
    ok &= abs(complete_elliptic_k(0.5) - 1.6857503548125961) < 1e-14
    ks = np.linspace(0.0, 0.999, 1000)
    kk = np.array([complete_elliptic_k(k) for k in ks])
    ok &= bool(np.all(np.diff(kk) > 0))
    k = 0.8
    K = complete_elliptic_k(k)
    u = np.linspace(-2 * K, 2 * K, 401)
    sn, cn, dn = jacobi_scd(u, k)
    ident = float(np.max(np.abs(sn * sn + cn * cn - 1)))
    ok &= ident < 1e-14 and abs(jacobi_scd(K, k)[1]) < 1e-13
    return ok, f"K monotone, sn^2+cn^2-1 sup {ident:.1e}"


def _profiles():
    worst = {"agree": 0.0, "fi": 0.0, "bc": 0.0, "R": 0.0, "even": 0.0}
    mono = True
    for m in M_VALUES:
        for R in R_VALUES:
            p = SolverParams(m, R)
            c = solve_closed_form(p)
            n = solve_numeric_ivp(p, 1e-12)
            worst["agree"] = max(worst["agree"], float(np.max(np.abs(c.f - n.f))))
            for prof in (c, n):
                worst["fi"] = max(worst["fi"], float(np.max(np.abs(prof.first_integral_residual()))))
                worst["bc"] = max(worst["bc"], abs(prof.f[0]), abs(prof.f[-1]),
                                  abs(prof.fp[0] - m), abs(prof.fp[-1] + m))
                worst["even"] = max(worst["even"], float(np.max(np.abs(prof.f - prof.f[::-1]))))
                Rt = scalar_curvature(jet(prof, prof.t))
                worst["R"] = max(worst["R"], float(np.max(np.abs(Rt - R))))
            left = c.t < 0
            mono &= bool(np.all(c.fp[left][1:] > 0))
    ok = (worst["agree"] < 1e-9 and worst["fi"] < 1e-10 and worst["bc"] < 1e-9
          and worst["R"] < 1e-10 and worst["even"] < 1e-12 and mono)
    return ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items())


def _boundary_identity():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(50):
        p = SolverParams(int(rng.integers(1, 8)), float(rng.uniform(-60, 60)))
        c = derive_constants(p)
        worst = max(worst, abs(c.f_max * c.mu * c.k_prime - p.m))
    return worst < 1e-12, f"|f_max mu k' - m| sup {worst:.1e}"


def _random_jets(n=1000, seed=11):
    rng = np.random.default_rng(seed)
    f = rng.uniform(0.2, 3.0, n)
    d = rng.uniform(-3.0, 3.0, (4, n))
    return CurvatureState(np.zeros(n), f, d[0], d[1], d[2], d[3])


def _bach_routes():
    s = _random_jets()
    ref = bach_derdzinski(s).as_array()
    gap_s = float(np.max(np.abs(bach_closed_scalar(s).as_array() - ref)))
    gap_r = float(np.max(np.abs(bach_closed_rho(s, 16.0).as_array() - ref)))
    trace = float(np.max(np.abs(ref.sum(axis=0)) / np.max(np.abs(ref), axis=0)))
    flat = bach_derdzinski(CurvatureState.point(1.0)).as_array()
    ok = gap_s < 1e-9 and gap_r < 1e-9 and trace < 1e-10 and float(np.max(np.abs(flat))) < 1e-14
    return ok, f"closed_R gap {gap_s:.1e}, rho16 gap {gap_r:.1e}, trace {trace:.1e}"


def _divergence():
    worst = 0.0
    h = 1e-5
    for m, R in ((1, 8.0), (2, -8.0), (3, 40.0)):
        prof = solve_closed_form(SolverParams(m, R))
        ts = prof.t[(prof.f > 0.1)][1:-1]
        b4 = lambda t: bach_derdzinski(jet(prof, t)).b4
        s = jet(prof, ts)
        B = bach_derdzinski(s)
        lhs = (b4(ts + h) - b4(ts - h)) / (2 * h)
        worst = max(worst, float(np.max(np.abs(lhs - s.fp / s.f * (B.b3 - B.b4)))))
    return worst < 1e-4, f"dB4/dt - (f'/f)(B3 - B4) sup {worst:.1e}"


def _integrals():
    worst = 0.0
    for m in (1, 2, 3, 4, 5):
        for R in np.linspace(-40, 40, 9):
            p = SolverParams(m, R)
            prof = solve_closed_form(p)
            _, i1, i3, i5 = closed_integrals(p)
            for j, ref in ((1, i1), (3, i3), (5, i5)):
                q = integrate_dt(prof, lambda s, j=j: np.asarray(s.f) ** j)
                worst = max(worst, abs(q - ref) / abs(ref))
    return worst < 1e-8, f"relative gap sup {worst:.1e} on 5x9 grid"


def _global():
    worst_cgb, worst_bt = 0.0, 0.0
    for m in M_VALUES:
        for R in R_VALUES:
            p = SolverParams(m, R)
            prof = solve_closed_form(p)
            worst_cgb = max(worst_cgb, abs(cgb_check(prof) - 16 * m) / (16 * m))
            intercept, slope = bt_coefficients(p)
            quad_r2 = quadrature(prof, lambda s: norm_invariants(s).r_sq)
            if slope:
                worst_bt = max(worst_bt, abs(quad_r2 - slope) / abs(slope))
            for t in (-1.0, 0.0, 1.0, 59.0 / 6.0):
                q = quadrature(prof, lambda s: norm_invariants(s).w_sq + t * norm_invariants(s).r_sq)
                v = intercept + t * slope
                worst_bt = max(worst_bt, abs(q - v) / max(abs(v), 1.0))
    y = yamabe_value(SolverParams(1, 8.0))
    ok = worst_cgb < 1e-6 and worst_bt < 1e-7 and abs(y - 8 * math.sqrt(volume(SolverParams(1, 8.0)))) < 1e-9
    return ok, f"CGB rel gap {worst_cgb:.1e}, B_t rel gap {worst_bt:.1e}, Y(1,8) {y:.6f}"


def _weyl_el():
    prof = solve_closed_form(SolverParams(1, 8.0))
    bumps = [Bump(c, w) for c, w in ((0.0, 0.5), (0.3, 0.4), (-0.7, 0.5), (1.0, 0.3),
                                     (-0.2, 1.0), (0.6, 0.6), (-1.1, 0.3), (0.0, 1.2),
                                     (0.9, 0.5), (-0.5, 0.8))]
    c, ratios = weyl_el_constant(prof, bumps)
    spread = float(np.max(np.abs(ratios / c - 1)))
    return spread < 2e-3, f"c = {c:.6f}, relative spread {spread:.1e} over 10 bumps"


def _eigen():
    ok = True
    for m in range(1, 6):
        for R in np.linspace(-40, 40, 81):
            eb = eigen_bounds(SolverParams(m, R))
            ok &= eb.lower < eb.upper
            ok &= (eb.stability == "unstable_R_gt_24") == (R > 24)
    eb = eigen_bounds(SolverParams(1, 8.0))
    return ok, f"(m,R)=(1,8): [{eb.lower:.5f}, {eb.upper:.5f}]"


def _bachflat():
    x = np.linspace(0.0, 3.0, 301)
    worst = 0.0
    for a, c in ((1, 7 / 12), (4, 53 / 12)):
        st = bf.BachFlatState(x, a * x * x - 2 * a * x + c, 2 * a * x - 2 * a, 11.0)
        worst = max(worst, float(np.max(np.abs(bf.residual(st, 2.0 * a)))))
    dev = 0.0
    for a, c, C in ((1, 7 / 12, 11.0), (4, 53 / 12, 11.0), (1, 1.0, 16.0), (4, 4.0, 16.0)):
        tr = bf.shoot(0.0, c, -2 * a, C, 0.5, 1e-12)
        dev = max(dev, float(np.max(np.abs(tr.y - (a * tr.x ** 2 - 2 * a * tr.x + c)))))
    forced = [bf.parabola_constant(a, C) for a, C in ((1, 11.0), (4, 11.0), (1, 16.0), (4, 16.0))]
    expected = [7 / 12, 53 / 12, 1.0, 4.0]
    f_ok = all(abs(u - v) < 1e-12 for u, v in zip(forced, expected))
    fi = min(bf.fi_curve_residual_sup(SolverParams(m, R), C)
             for m in M_VALUES for R in R_VALUES for C in (11.0, 16.0))
    ok = worst < 1e-12 and dev < 1e-9 and f_ok and fi > 0.5
    return ok, f"parabola residual {worst:.1e}, shooting drift {dev:.1e}, min FI-curve residual {fi:.2f}"


def _roundtrip():
    prof = solve_numeric_ivp(SolverParams(2, 3.5), 1e-12, n=64)
    back = load_profile(dump_profile(prof))
    ok = (back.T == prof.T and np.array_equal(back.t, prof.t) and np.array_equal(back.f, prof.f)
          and np.array_equal(back.fp, prof.fp) and np.array_equal(back.fpp, prof.fpp)
          and back.consts == prof.consts)
    return ok, "profile JSON round trip bit-exact" if ok else "round trip altered values"


HARD_CHECKS = [
    ("special functions", _special_fn),
    ("Duffing profiles (closed vs IVP, FI, BC, R const)", _profiles),
    ("boundary identity f_max mu k' = m", _boundary_identity),
    ("Bach three-route agreement", _bach_routes),
    ("Bach divergence identity", _divergence),
    ("closed integrals vs quadrature", _integrals),
    ("CGB, B_t, Yamabe", _global),
    ("restricted Weyl Euler-Lagrange", _weyl_el),
    ("eigenvalue bounds / stability tags", _eigen),
    ("Bach-flat ODE", _bachflat),
    ("profile serialisation", _roundtrip),
]


def _finding_rho_constant():
    s = _random_jets(200, seed=3)
    diff = bach_closed_rho(s, 11.0).as_array() - bach_derdzinski(s).as_array()
    spread = float(np.max(np.ptp(diff, axis=1)))
    mean = diff.mean(axis=1)
    return (f"rho form with 11 is offset by {np.round(mean, 12).tolist()} "
            f"(state spread {spread:.1e}); 16 removes it")


def _finding_trace21():
    quoted = ricci_laplacian_traces(CurvatureState.point(1.0))
    s = _random_jets(50, seed=5)
    shift = ricci_laplacian_traces(s)[3] - ricci_laplacian_traces(s, corrected=True)[3]
    gap = float(np.max(np.abs(shift - 3 * np.asarray(s.f) ** 4)))
    return (f"quoted div_11 = {quoted[3]:g} at f = 1 (parallel Ricci needs 0); it exceeds "
            f"the corrected -4 f^4 form by 3 f^4 (residual {gap:.1e}), giving the Derdzinski "
            f"assembly a trace of 6 f^4")


def _finding_expansions():
    s = _random_jets(50, seed=9)
    f = np.asarray(s.f)
    a = -np.asarray(s.fpp) / f
    d = norm_invariants(s)
    ts_quoted = a * a - 8 * a - 6 * f * np.asarray(s.fpp) + 11 * f ** 4 + 24 * f ** 2 + 16
    r2_quoted = 4 * a * a + 32 * a + 8 * f * np.asarray(s.fpp) + 4.0 ** 4 - 32 * f ** 2 + 64
    g1 = float(np.max(np.abs(ts_quoted - d.tsric_sq - 48 * f ** 2)))
    g2 = float(np.max(np.abs(r2_quoted - d.r_sq - (256 - 4 * f ** 4))))
    return (f"quoted |tsRic|^2 exceeds the identity by 48 f^2 (residual {g1:.1e}); "
            f"quoted R^2 has 4^4 for 4 f^4 (residual {g2:.1e})")


def _finding_parabolas():
    verdicts = {c: bf.screen_boundary(c) for c in (7 / 12, 53 / 12, 1.0, 4.0)}
    return ("y(0) = m^2 screening: "
            + ", ".join(f"{c:.4g} -> {'m=%d' % v if v else 'no integer m'}" for c, v in verdicts.items()))


FINDINGS = [
    ("rho-form constant 11 vs 16", _finding_rho_constant),
    ("divergence trace div_11", _finding_trace21),
    ("quoted norm expansions", _finding_expansions),
    ("parabola particular solutions", _finding_parabolas),
]


def run_checks():
    results = []
    for name, fn in HARD_CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # reported as a failed invariant
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(ok), detail))
    for name, fn in FINDINGS:
        results.append(CheckResult(name, True, fn(), finding=True))
    return results


def format_table(results, elapsed=None):
    width = max(len(r.name) for r in results)
    lines = []
    for r in results:
        tag = "NOTE" if r.finding else ("PASS" if r.passed else "FAIL")
        lines.append(f"{tag:4}  {r.name:<{width}}  {r.detail}")
    if elapsed is not None:
        lines.append(f"elapsed {elapsed:.1f} s")
    return "\n".join(lines)


def main_check(stream=None, as_json=False):
    start = time.perf_counter()
    results = run_checks()
    elapsed = time.perf_counter() - start
    if as_json:
        text = json.dumps([r.__dict__ for r in results], indent=1)
    else:
        text = format_table(results, elapsed)
    if stream is not None:
        print(text, file=stream)
    return all(r.passed for r in results if not r.finding), text
