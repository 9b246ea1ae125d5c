"""Numba switch.

Set ``MORSEPOLAR_NUMBA=0`` to run the pure-numpy kernels instead of the
jitted ones (also used automatically when numba is not importable).
"""
import os

USE_NUMBA = os.environ.get("MORSEPOLAR_NUMBA", "1").strip().lower() not in ("0", "false", "no", "off")

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        USE_NUMBA = False

if not USE_NUMBA:
    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f
