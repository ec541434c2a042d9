"""Backend switch for the hot kernels.

Set ``CUBEFLAG_NO_NUMBA=1`` to force the pure-numpy path.
"""

import os

_flag = os.environ.get("CUBEFLAG_NO_NUMBA", "").strip().lower()
USE_NUMBA = _flag not in ("1", "true", "yes", "on")

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        USE_NUMBA = False

if not USE_NUMBA:

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def _wrap(f):
            return f

        return _wrap


BACKEND = "numba" if USE_NUMBA else "numpy"
