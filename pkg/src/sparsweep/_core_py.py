"""Pure numpy implementations of the hot kernels.

These mirror ``_core.pyx`` one-to-one and are used when the compiled
extension is unavailable (or ``SPARSWEEP_PURE_PYTHON=1`` is set).
"""
import numpy as np

EULER_GAMMA = 0.57721566490153286061
TWO_OVER_PI = 2.0 / np.pi

# Regime boundaries for the Bessel evaluation.
SERIES_MAX = 4.0
MILLER_MAX = 25.0
MILLER_START = 100
SERIES_TERMS = 40
ASYMPTOTIC_TERMS = 30

# Neighbour offsets (di, dj) in row-major order: s = 3 * (dj + 1) + (di + 1).
OFFSETS = tuple((di, dj) for dj in (-1, 0, 1) for di in (-1, 0, 1))


def _series(x):
    q = 0.25 * x * x
    j0 = np.zeros_like(x)
    j1s = np.zeros_like(x)
    y0s = np.zeros_like(x)
    y1s = np.zeros_like(x)
    t0 = np.ones_like(x)  # (-q)^k / (k!)^2
    t1 = np.ones_like(x)  # (-q)^k / (k! (k+1)!)
    harm = 0.0
    for k in range(SERIES_TERMS):
        if k > 0:
            t0 = t0 * (-q) / (k * k)
            t1 = t1 * (-q) / (k * (k + 1))
            harm += 1.0 / k
        j0 += t0
        j1s += t1
        y0s -= harm * t0
        # psi(k+1) + psi(k+2) = 2 H_k + 1/(k+1) - 2 gamma
        y1s += (2.0 * harm + 1.0 / (k + 1) - 2.0 * EULER_GAMMA) * t1
    half = 0.5 * x
    j1 = half * j1s
    lg = np.log(half)
    y0 = TWO_OVER_PI * ((lg + EULER_GAMMA) * j0 + y0s)
    y1 = TWO_OVER_PI * lg * j1 - 1.0 / (np.pi * half) - half * y1s / np.pi
    return j0, y0, j1, y1


def _miller(x):
    # Backward recurrence J_{n-1} = (2n/x) J_n - J_{n+1}, normalised with
    # 1 = J_0 + 2 sum_k J_{2k}; Y_0, Y_1 from the Neumann series.
    n_top = MILLER_START
    jp1 = np.zeros_like(x)
    jn = np.full_like(x, 1e-30)
    vals = {n_top: jn}
    for n in range(n_top, 0, -1):
        jm1 = (2.0 * n / x) * jn - jp1
        jp1, jn = jn, jm1
        vals[n - 1] = jn
    norm = vals[0].copy()
    for k in range(2, n_top + 1, 2):
        norm += 2.0 * vals[k]
    j = {n: v / norm for n, v in vals.items()}
    s0 = np.zeros_like(x)
    s1 = np.zeros_like(x)
    for k in range(1, n_top // 2):
        sign = -1.0 if k % 2 else 1.0
        s0 += sign * j[2 * k] / k
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / k
    lg = np.log(0.5 * x) + EULER_GAMMA
    y0 = TWO_OVER_PI * (lg * j[0] - 2.0 * s0)
    y1 = TWO_OVER_PI * (lg * j[1] - j[0] / x + s1)
    return j[0], y0, j[1], y1


def _asymptotic_h(x, nu):
    mu = 4.0 * nu * nu
    term = np.ones(x.shape, dtype=complex)
    total = term.copy()
    for k in range(1, ASYMPTOTIC_TERMS):
        term = term * 1j * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        total += term
    phase = np.exp(1j * x) * np.exp(-1j * np.pi * (0.5 * nu + 0.25))
    return np.sqrt(TWO_OVER_PI / x) * phase * total


def bessel01(x):
    """Return ``(J0, Y0, J1, Y1)`` evaluated at the positive array ``x``."""
    x = np.asarray(x, dtype=float)
    out = [np.empty_like(x) for _ in range(4)]
    regimes = (
        (x <= SERIES_MAX, _series),
        ((x > SERIES_MAX) & (x <= MILLER_MAX), _miller),
    )
    for mask, fn in regimes:
        if mask.any():
            for o, v in zip(out, fn(x[mask])):
                o[mask] = v
    big = x > MILLER_MAX
    if big.any():
        h0 = _asymptotic_h(x[big], 0.0)
        h1 = _asymptotic_h(x[big], 1.0)
        out[0][big] = h0.real
        out[1][big] = h0.imag
        out[2][big] = h1.real
        out[3][big] = h1.imag
    return tuple(out)


def stencil_apply(vals, x):
    """Apply a 9-point operator stored as ``vals[j, i, s]`` to ``x[j, i]``."""
    nz, nx = x.shape
    xp = np.zeros((nz + 2, nx + 2), dtype=np.result_type(vals, x))
    xp[1:-1, 1:-1] = x
    y = np.zeros((nz, nx), dtype=xp.dtype)
    for s, (di, dj) in enumerate(OFFSETS):
        y += vals[:, :, s] * xp[1 + dj:nz + 1 + dj, 1 + di:nx + 1 + di]
    return y


def assemble_rows(classes, alpha, coupling, m, omega2):
    """Rows ``alpha[c, s] + omega2 * m[neighbour s] * coupling[c, s]``.

    ``classes[j, i]`` indexes the rows of ``alpha``/``coupling``; entries for
    neighbours outside the grid come out zero because both tables hold zeros
    there.
    """
    nz, nx = classes.shape
    mp = np.zeros((nz + 2, nx + 2), dtype=complex)
    mp[1:-1, 1:-1] = m
    a = alpha[classes]
    b = coupling[classes]
    vals = np.empty((nz, nx, 9), dtype=complex)
    for s, (di, dj) in enumerate(OFFSETS):
        nb = mp[1 + dj:nz + 1 + dj, 1 + di:nx + 1 + di]
        vals[:, :, s] = a[:, :, s] + omega2 * nb * b[:, :, s]
    return vals
