"""Optional numba acceleration.

Kernels are written once as plain loops and decorated with :func:`jit`.  When
numba is importable and ``HCSC_DISABLE_JIT`` is unset (or ``0``), they are
compiled with ``numba.njit``; otherwise the decorator is the identity and the
callers switch to the vectorised numpy paths where one exists.
"""

import os

_flag = os.environ.get("HCSC_DISABLE_JIT", "0").strip().lower()
_disabled = _flag not in ("", "0", "false", "no")

try:
    if _disabled:
        raise ImportError
    import numba

    USE_NUMBA = True

    def jit(fn):
        return numba.njit(cache=True, error_model="numpy")(fn)

except ImportError:
    USE_NUMBA = False

    def jit(fn):
        return fn


def backend():
    """Name of the active kernel backend: ``"numba"`` or ``"numpy"``."""
    return "numba" if USE_NUMBA else "numpy"
