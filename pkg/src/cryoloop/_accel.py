"""JIT backend selection.

Hot kernels are written once, in numba-compatible numpy style, and wrapped
with :func:`maybe_njit`.  The environment variable ``CRYOLOOP_BACKEND``
selects between the compiled path (``numba``, default) and a pure-numpy
interpretation of the very same code (``numpy``).  Because numba executes
``np.random.Generator`` with the exact algorithms numpy uses, the two
backends consume identical random streams and produce matching
trajectories.

``CRYOLOOP_WORKERS`` caps the trajectory thread pool (kernels are compiled
with ``nogil=True`` so threads scale on the numba path).
"""

import os

_requested = os.environ.get("CRYOLOOP_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ValueError(
        f"CRYOLOOP_BACKEND must be 'numba' or 'numpy', got {_requested!r}"
    )

USE_NUMBA = _requested == "numba"
if USE_NUMBA:
    try:
        from numba import njit as _njit
    except ImportError:  # pragma: no cover - numba is a hard dependency
        USE_NUMBA = False

BACKEND = "numba" if USE_NUMBA else "numpy"


def maybe_njit(*args, **kwargs):
    """``numba.njit`` on the compiled backend, identity otherwise."""
    if USE_NUMBA:
        return _njit(*args, **kwargs)
    if args and callable(args[0]):
        return args[0]

    def identity(func):
        return func

    return identity


def worker_count():
    env = os.environ.get("CRYOLOOP_WORKERS")
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)
