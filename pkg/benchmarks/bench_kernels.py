"""Time the hot kernels under the numba and pure-numpy backends.

Each backend runs in its own interpreter because the choice is fixed at
import time by ``HCSC_DISABLE_JIT``.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, timeit
import numpy as np
from hirzebruch_csc import SolverParams, backend, jacobi_scd, solve_closed_form, solve_numeric_ivp
from hirzebruch_csc.bachflat import shoot

repeat = int(sys.argv[1])
u = np.linspace(-20.0, 20.0, 200_000)
p = SolverParams(2, 5.0)
cases = {
    "jacobi_scd 2e5 points": lambda: jacobi_scd(u, 0.9),
    "jacobi_scd scalar": lambda: jacobi_scd(0.37, 0.9),
    "jacobi_scd 64 points": lambda: jacobi_scd(u[:64], 0.9),
    "solve_closed_form n=512": lambda: solve_closed_form(p),
    "solve_numeric_ivp n=512": lambda: solve_numeric_ivp(p, 1e-12),
    "bach-flat shoot x<=3": lambda: shoot(0.0, 2.0, 0.3, 16.0, 3.0, 1e-12),
}
out = {"backend": backend()}
for name, fn in cases.items():
    fn()  # compile / warm caches
    out[name] = min(timeit.repeat(fn, number=1, repeat=repeat))
print(json.dumps(out))
"""


def run_backend(disable, repeat):
    env = dict(os.environ, HCSC_DISABLE_JIT="1" if disable else "0")
    proc = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env,
                          capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    fast = run_backend(False, args.repeat)
    slow = run_backend(True, args.repeat)
    names = [k for k in fast if k != "backend"]
    width = max(map(len, names))
    print(f"{'kernel':<{width}}  {fast['backend']:>10}  {slow['backend']:>10}  speedup")
    for name in names:
        a, b = fast[name], slow[name]
        print(f"{name:<{width}}  {a * 1e3:8.2f}ms  {b * 1e3:8.2f}ms  {b / a:6.1f}x")


if __name__ == "__main__":
    main()
