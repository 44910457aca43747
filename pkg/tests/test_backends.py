"""The pure-numpy fallback reproduces the compiled kernels."""

import json
import os
import subprocess
import sys

import numpy as np

SCRIPT = r"""
import json, numpy as np
from hirzebruch_csc import SolverParams, backend, jacobi_scd, solve_numeric_ivp, solve_closed_form
from hirzebruch_csc.bachflat import shoot
u = np.linspace(-7, 7, 201)
sn, cn, dn = jacobi_scd(u, 0.9)
p = solve_numeric_ivp(SolverParams(2, 5.0), 1e-12, 64)
c = solve_closed_form(SolverParams(2, 5.0), 64)
tr = shoot(0.0, 4.0, -8.0, 16.0, 0.5, 1e-12)
print(json.dumps({"backend": backend(), "cn": cn.tolist(), "f": p.f.tolist(),
                  "fc": c.f.tolist(), "T": p.T, "y": tr.y[-5:].tolist(), "x": tr.x[-1]}))
"""


def _run(disable):
    env = dict(os.environ, HCSC_DISABLE_JIT="1" if disable else "0")
    out = subprocess.run([sys.executable, "-c", SCRIPT], env=env, capture_output=True,
                         text=True, check=True)
    return json.loads(out.stdout)


def test_backends_agree():
    a, b = _run(False), _run(True)
    assert a["backend"] == "numba" and b["backend"] == "numpy"
    np.testing.assert_allclose(a["cn"], b["cn"], atol=1e-15)
    np.testing.assert_allclose(a["fc"], b["fc"], atol=1e-15)
    np.testing.assert_allclose(a["f"], b["f"], atol=1e-13)
    assert abs(a["T"] - b["T"]) < 1e-13
    assert a["x"] == b["x"]
    np.testing.assert_allclose(a["y"], b["y"], atol=1e-13)
