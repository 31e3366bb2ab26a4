"""First-kind Hankel functions of orders 0 and 1 for positive real arguments.

Three regimes, chosen for double-precision accuracy over the whole range:

* ``x <= 4``: power series for J and the logarithmic series for Y;
* ``4 < x <= 25``: Miller backward recurrence for J_n, with Y_0 and Y_1
  from their Neumann series in even/odd J_n;
* ``x > 25``: Hankel's asymptotic expansion (error below ``exp(-2x)``).
"""
import numpy as np

from . import _backend
from ._core_py import MILLER_MAX, SERIES_MAX

SWITCH_POINTS = (SERIES_MAX, MILLER_MAX)


def _checked(x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("Hankel function argument must be finite")
    if np.any(arr <= 0):
        raise ValueError("Hankel function argument must be positive")
    return arr


def bessel_jy(x):
    """Return ``(J0, Y0, J1, Y1)`` at ``x > 0`` (scalar or array)."""
    arr = _checked(x)
    out = _backend.bessel01(np.atleast_1d(arr))
    if arr.ndim == 0:
        return tuple(float(o[0]) for o in out)
    return out


def hankel1_0(x):
    """``H^(1)_0(x) = J0(x) + i Y0(x)``."""
    j0, y0, _, _ = bessel_jy(x)
    return j0 + 1j * y0 if np.ndim(j0) else complex(j0, y0)


def hankel1_1(x):
    """``H^(1)_1(x) = J1(x) + i Y1(x)``."""
    _, _, j1, y1 = bessel_jy(x)
    return j1 + 1j * y1 if np.ndim(j1) else complex(j1, y1)
