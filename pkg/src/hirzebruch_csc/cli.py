"""``hcsc`` command-line front end.

Exit codes: 0 ok, 1 invariant failure, 2 bad arguments, 3 non-convergence,
4 Bach route disagreement.
"""

import argparse
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import json
import os
import sys

import numpy as np

from . import bachflat as bf
from .curvature import RHO_CONSTANT_DERIVED, RHO_CONSTANT_ORIGINAL, CurvatureState
from .errors import ConvergenceError, InconsistencyError
from .functionals import build_report
from .io import (
    CURVATURE_HEADER,
    curvature_rows,
    dump_profile,
    load_profile,
    rows_to_csv,
    write_atomic,
)
from .profile import DEFAULT_GRID, TOL_RANGE, SolverParams, solve_closed_form, solve_numeric_ivp

EXIT_OK, EXIT_INVARIANT, EXIT_ARGS, EXIT_CONVERGENCE, EXIT_ROUTE = 0, 1, 2, 3, 4
ROUTE_ATOL = 1e-8
MIN_GRID = 64

SWEEP_HEADER = ["m", "R", "t", "T", "volume", "yamabe", "bt_value", "cgb_integral",
                "eigen_lower", "eigen_upper", "stability", "rho_gap_11", "rho_gap_16"]
TRAJECTORY_HEADER = ["x", "y", "yp", "termination"]
GRID_HEADER = ["y0", "yp0", "termination", "min_y", "x_at_termination"]


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    m: int = 1
    R: float = 8.0
    t_coefficient: float = 0.0
    grid_size: int = DEFAULT_GRID
    tolerance: float = 1e-12
    bach_constant: float = RHO_CONSTANT_DERIVED
    output_path: str = None
    format: str = "json"

    def __post_init__(self):
        if self.grid_size < MIN_GRID:
            raise UsageError(f"--grid must be at least {MIN_GRID}")
        lo, hi = TOL_RANGE
        if not lo <= self.tolerance <= hi:
            raise UsageError(f"--tolerance must lie in [{lo:g}, {hi:g}]")

    @property
    def params(self):
        return SolverParams(self.m, self.R)


def _emit(text, path):
    if path:
        write_atomic(path, text)
    else:
        sys.stdout.write(text)


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _span(text):
    """``a:b:n`` (inclusive linspace) or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"range must be start:stop:count, got {text!r}")
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
        if n < 1:
            raise UsageError("range count must be positive")
        return list(np.linspace(a, b, n))
    return _floats(text)


def _solve(cfg, generator):
    if generator == "numeric":
        return solve_numeric_ivp(cfg.params, cfg.tolerance, cfg.grid_size)
    return solve_closed_form(cfg.params, cfg.grid_size)


def _rho_gaps(source):
    return {str(int(c)): curvature_rows(source, c)[1]
            for c in (RHO_CONSTANT_ORIGINAL, RHO_CONSTANT_DERIVED)}


def cmd_solve(cfg, generator="closed"):
    _emit(dump_profile(_solve(cfg, generator)), cfg.output_path)
    return EXIT_OK


def cmd_curvature(cfg, profile_path=None, point=None):
    if point is not None:
        jet_values = (list(point) + [0.0] * 5)[:5]
        source = CurvatureState(np.zeros(1), *(np.array([v]) for v in jet_values))
    elif profile_path:
        with open(profile_path) as fh:
            source = load_profile(fh.read())
    else:
        source = _solve(cfg, "closed")
    rows, gap = curvature_rows(source, cfg.bach_constant)
    _emit(rows_to_csv(CURVATURE_HEADER, rows), cfg.output_path)
    gaps = _rho_gaps(source)
    print("rho-form gap vs derdzinski: "
          + ", ".join(f"C={c}: {g:.3e}" for c, g in gaps.items()), file=sys.stderr)
    if gap > ROUTE_ATOL:
        print(f"route disagreement {gap:.3e} > {ROUTE_ATOL:g} with constant {cfg.bach_constant:g}",
              file=sys.stderr)
        return EXIT_ROUTE
    return EXIT_OK


def _report_dict(cfg, params, t):
    profile = solve_closed_form(params, cfg.grid_size)
    out = build_report(params, t, profile).to_dict()
    out["rho_gap"] = _rho_gaps(profile)
    return out


def cmd_report(cfg):
    text = json.dumps(_report_dict(cfg, cfg.params, cfg.t_coefficient), indent=1) + "\n"
    _emit(text, cfg.output_path)
    return EXIT_OK


def _threads():
    raw = os.environ.get("HCSC_THREADS", "")
    if raw.strip():
        try:
            n = int(raw)
        except ValueError:
            raise UsageError(f"HCSC_THREADS must be an integer, got {raw!r}") from None
        return max(1, n)
    return min(4, os.cpu_count() or 1)


def cmd_sweep(cfg, ms, Rs, ts):
    cells = [(int(m), float(R)) for m in ms for R in Rs]

    def run(cell):
        params = SolverParams(*cell)
        rows = []
        for t in ts:
            d = _report_dict(cfg, params, t)
            rows.append([params.m, params.scalar_curvature, float(t), d["T"], d["volume"],
                         d["yamabe"], d["bt_value"], d["cgb_integral"], d["eigen_lower"],
                         d["eigen_upper"], d["stability"], d["rho_gap"]["11"], d["rho_gap"]["16"]])
        return rows

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(run, cells))
    rows = [r for block in results for r in block]
    _emit(rows_to_csv(SWEEP_HEADER, rows), cfg.output_path)
    return EXIT_OK


def cmd_bachflat(cfg, args):
    if args.mode == "shoot":
        traj = bf.shoot(args.x0, args.y0, args.yp0, cfg.bach_constant, args.x_max, cfg.tolerance)
        rows = [[float(x), float(y), float(yp), ""] for x, y, yp in zip(traj.x, traj.y, traj.yp)]
        rows[-1][3] = traj.termination
        _emit(rows_to_csv(TRAJECTORY_HEADER, rows), cfg.output_path)
    else:
        rows = bf.grid_search(_span(args.y0s), _span(args.yp0s), cfg.bach_constant,
                              args.x0, args.x_max, max(cfg.tolerance, 1e-10))
        _emit(rows_to_csv(GRID_HEADER, [list(r) for r in rows]), cfg.output_path)
    return EXIT_OK


def cmd_check(cfg, as_json=False):
    from .checks import main_check

    ok, text = main_check(as_json=as_json)
    _emit(text + "\n", cfg.output_path)
    return EXIT_OK if ok else EXIT_INVARIANT


def _bach_constant(value):
    if value in bf.PRESETS:
        return bf.PRESETS[value]
    try:
        return float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected a number or one of {sorted(bf.PRESETS)}, got {value!r}") from None


def build_parser():
    p = argparse.ArgumentParser(prog="hcsc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, with_params=True):
        if with_params:
            sp.add_argument("--m", type=int, default=1, help="Hirzebruch index (>= 1)")
            sp.add_argument("--scalar-curvature", "-R", type=float, default=8.0, dest="R")
        sp.add_argument("--grid", type=int, default=DEFAULT_GRID, dest="grid_size")
        sp.add_argument("--tolerance", type=float, default=1e-12)
        sp.add_argument("--output", "-o", dest="output_path")

    sp = sub.add_parser("solve", help="write the profile JSON of g_m(R)")
    common(sp)
    sp.add_argument("--generator", choices=["closed", "numeric"], default="closed")

    sp = sub.add_parser("curvature", help="per-node curvature and Bach CSV")
    common(sp)
    src = sp.add_mutually_exclusive_group()
    src.add_argument("--profile", help="profile JSON written by solve")
    src.add_argument("--point", type=_floats, help="synthetic jet f[,f',f'',f''',f'''']")
    sp.add_argument("--bach-constant", type=_bach_constant, default=RHO_CONSTANT_DERIVED,
                    help="rho-form constant compared against the reference (default 16)")

    sp = sub.add_parser("report", help="global functionals as JSON")
    common(sp)
    sp.add_argument("--t", type=float, default=0.0, dest="t_coefficient",
                    help="coefficient t of B_t = W + t R^2")

    sp = sub.add_parser("sweep", help="report quantities over an (m, R, t) grid as CSV")
    common(sp, with_params=False)
    sp.add_argument("--m-values", default="1,2,3")
    sp.add_argument("--R-values", default="-8,0,8,24,40", help="comma list or start:stop:count")
    sp.add_argument("--t-values", default="0")

    sp = sub.add_parser("bachflat", help="shoot the Bach-flat ODE or grid-search initial data")
    common(sp, with_params=False)
    sp.add_argument("mode", choices=["shoot", "grid"])
    sp.add_argument("--bach-constant", type=_bach_constant, required=True,
                    help="11, 16, 'paper' or 'derived'")
    sp.add_argument("--x0", type=float, default=0.0)
    sp.add_argument("--x-max", type=float, default=3.0)
    sp.add_argument("--y0", type=float, default=None)
    sp.add_argument("--yp0", type=float, default=None)
    sp.add_argument("--y0s", default="0.25:4:16")
    sp.add_argument("--yp0s", default="-4:4:17")

    sp = sub.add_parser("check", help="run the invariant suite")
    common(sp, with_params=False)
    sp.add_argument("--json", action="store_true")
    return p


def run(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(
            command=args.command,
            m=getattr(args, "m", 1),
            R=getattr(args, "R", 8.0),
            t_coefficient=getattr(args, "t_coefficient", 0.0),
            grid_size=args.grid_size,
            tolerance=args.tolerance,
            bach_constant=getattr(args, "bach_constant", RHO_CONSTANT_DERIVED),
            output_path=args.output_path,
            format="csv" if args.command in ("curvature", "sweep", "bachflat") else "json",
        )
        if args.command in ("solve", "curvature", "report"):
            cfg.params
        if args.command == "solve":
            return cmd_solve(cfg, args.generator)
        if args.command == "curvature":
            return cmd_curvature(cfg, args.profile, args.point)
        if args.command == "report":
            return cmd_report(cfg)
        if args.command == "sweep":
            ms = [int(v) for v in _floats(args.m_values)]
            return cmd_sweep(cfg, ms, _span(args.R_values), _floats(args.t_values))
        if args.command == "bachflat":
            if args.mode == "shoot" and (args.y0 is None or args.yp0 is None):
                raise UsageError("shoot needs --y0 and --yp0")
            return cmd_bachflat(cfg, args)
        return cmd_check(cfg, args.json)
    except ConvergenceError as exc:
        print(f"hcsc: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except InconsistencyError as exc:
        print(f"hcsc: {exc}", file=sys.stderr)
        return EXIT_ROUTE
    except (ValueError, OSError) as exc:
        print(f"hcsc: {exc}", file=sys.stderr)
        return EXIT_ARGS


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
