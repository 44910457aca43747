"""JSON/CSV serialisation.  Floats are written with ``repr`` (shortest round-trip)."""

import csv
import io as _io
import json
import os
import tempfile

import numpy as np

from .curvature import (
    F_FLOOR,
    CurvatureState,
    bach_closed_rho,
    bach_derdzinski,
    csc_bach_regular,
    norm_invariants,
    ricci_diagonal,
)
from .profile import MetricProfile, SolverParams, derive_constants, jet

__all__ = [
    "write_atomic",
    "profile_to_dict",
    "profile_from_dict",
    "dump_profile",
    "load_profile",
    "CURVATURE_HEADER",
    "curvature_rows",
    "rows_to_csv",
]

CURVATURE_HEADER = ["t", "f", "fp", "R", "Ric1", "Ric3", "Ric4", "W2", "B1", "B3", "B4", "route"]
# below this f the Bach columns come from the 1/f-free polynomial form
REGULAR_SWITCH = 1e-2


def write_atomic(path, text):
    """Write ``text`` to ``path`` through a temporary file and ``os.replace``."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def profile_to_dict(profile):
    p, c = profile.params, profile.consts
    return {
        "m": p.m,
        "scalar_curvature": p.scalar_curvature,
        "beta": p.beta,
        "k": c.k,
        "K": c.K,
        "T": float(profile.T),
        "f_max": c.f_max,
        "generator": profile.generator,
        "samples": [
            {"t": float(t), "f": float(f), "fp": float(fp), "fpp": float(fpp)}
            for t, f, fp, fpp in zip(profile.t, profile.f, profile.fp, profile.fpp)
        ],
    }


def profile_from_dict(data):
    params = SolverParams(int(data["m"]), float(data["scalar_curvature"]))
    consts = derive_constants(params)
    samples = data["samples"]
    col = lambda key: np.array([s[key] for s in samples], dtype=float)
    return MetricProfile(params, consts, float(data["T"]), col("t"), col("f"), col("fp"),
                         col("fpp"), data["generator"], float(data.get("tolerance", 1e-12)))


def dump_profile(profile):
    return json.dumps(profile_to_dict(profile), indent=1) + "\n"


def load_profile(text):
    return profile_from_dict(json.loads(text))


def _profile_state(profile):
    """State at the stored samples; f, f' as saved, higher derivatives by the ODE."""
    f, fp = profile.f, profile.fp
    beta = profile.beta
    fpp = -f ** 3 + beta * f
    fppp = (beta - 3 * f * f) * fp
    fpppp = (beta - 3 * f * f) * fpp - 6 * f * fp * fp
    return CurvatureState(profile.t, f, fp, fpp, fppp, fpppp, beta)


def curvature_rows(source, bach_constant=16.0):
    """One row per sample: curvature, Weyl norm and the reference Bach diagonal.

    Returns ``(rows, gap)`` where ``gap`` is the largest difference between the
    rho-form Bach with ``bach_constant`` and the reference at samples with
    ``f > REGULAR_SWITCH``, relative to ``max(1, max_i |B_i|)`` per sample.
    """
    if isinstance(source, MetricProfile):
        state = _profile_state(source)
        params = source.params
    else:
        state = source
        params = None
    f = np.atleast_1d(np.asarray(state.f, dtype=float))
    n = f.size
    bc = lambda v: np.broadcast_to(np.asarray(v, dtype=float), (n,)).copy()
    t, fp, fpp, fppp, fpppp = (bc(v) for v in (state.t, state.fp, state.fpp, state.fppp, state.fpppp))
    full = CurvatureState(t, f, fp, fpp, fppp, fpppp, state.beta)
    diag = norm_invariants(full)
    ric = ricci_diagonal(full)
    B = np.full((4, n), np.nan)
    route = np.array(["derdzinski"] * n, dtype=object)
    gap = 0.0
    inner = f > REGULAR_SWITCH
    if np.any(inner):
        sub = CurvatureState(t[inner], f[inner], fp[inner], fpp[inner], fppp[inner], fpppp[inner])
        ref = bach_derdzinski(sub).as_array()
        B[:, inner] = ref
        rho = bach_closed_rho(sub, bach_constant).as_array()
        gap = float(np.max(np.abs(rho - ref) / np.maximum(1.0, np.max(np.abs(ref), axis=0))))
    outer = ~inner
    if np.any(outer):
        if params is None:
            if np.any(f[outer] <= F_FLOOR):
                raise ValueError("synthetic states need f > f_floor for the Bach columns")
            sub = CurvatureState(t[outer], f[outer], fp[outer], fpp[outer], fppp[outer], fpppp[outer])
            B[:, outer] = bach_derdzinski(sub).as_array()
        else:
            B[:, outer] = csc_bach_regular(params, f[outer], fp[outer]).as_array()
            route[outer] = "closed_R"
    R = np.broadcast_to(diag.R, (n,))
    w2 = np.broadcast_to(diag.w_sq, (n,))
    ric = np.broadcast_to(ric, (4, n))
    rows = []
    for i in range(n):
        values = (t[i], f[i], fp[i], R[i], ric[0, i], ric[2, i], ric[3, i], w2[i],
                  B[0, i], B[2, i], B[3, i])
        rows.append([float(v) for v in values] + [route[i]])
    return rows, gap


def rows_to_csv(header, rows):
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()
