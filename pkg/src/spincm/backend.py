"""Backend selection for the hot numeric kernels.

Two interchangeable kernel implementations exist: numba-compiled scalar
loops and pure-numpy vectorized fallbacks.  The environment variable
``SPINCM_BACKEND`` picks one:

    SPINCM_BACKEND=auto    use numba when importable (default)
    SPINCM_BACKEND=numba   require numba, fail loudly if missing
    SPINCM_BACKEND=numpy   force the pure-numpy path

The choice is resolved once at import time; ``benchmarks/bench_kernels.py``
runs both in subprocesses to compare them.
"""

from __future__ import annotations

import os

_VALID = ("auto", "numba", "numpy")


def _resolve() -> str:
    req = os.environ.get("SPINCM_BACKEND", "auto").strip().lower()
    if req not in _VALID:
        raise ValueError(
            f"SPINCM_BACKEND={req!r} not understood; expected one of {_VALID}"
        )
    if req == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if req == "numba":
            raise RuntimeError("SPINCM_BACKEND=numba but numba is not importable")
        return "numpy"
    return "numba"


BACKEND = _resolve()
USING_NUMBA = BACKEND == "numba"
