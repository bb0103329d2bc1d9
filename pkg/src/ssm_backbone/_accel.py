"""Numba dispatch layer.

The hot integration kernels in :mod:`ssm_backbone.kernels` are written in
loop style so they compile under ``numba.njit``.  Setting the environment
variable ``SSM_BACKBONE_NO_NUMBA=1`` (or numba being unimportable) selects
the pure-numpy fallback: the same functions run uncompiled.  The benchmark
in ``benchmarks/bench_kernels.py`` compares both paths.
"""

import os

_FLAG = os.environ.get("SSM_BACKBONE_NO_NUMBA", "0").strip().lower()
USING_NUMBA = _FLAG not in ("1", "true", "yes")

if USING_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        USING_NUMBA = False

if not USING_NUMBA:

    def njit(*args, **kwargs):
        """No-op stand-in for ``numba.njit`` (pure-python fallback)."""
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap
