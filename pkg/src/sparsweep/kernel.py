"""Sampled free-space Green's function and its FFT-accelerated convolution.

The discrete operator ``G`` acts on z-major grid fields by
``(G f)_k = sum_j S(k - j) f_j`` with ``S(d) = h^2 G(h |d|)`` off the diagonal
and a quadrature-corrected self weight at ``d = 0``.  ``G`` is block Toeplitz
with Toeplitz blocks, applied through a zero-padded circulant embedding.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .grid import Grid
from .special import bessel_jy, hankel1_0, hankel1_1

MAX_FFT_ELEMENTS = 1 << 24

# Z'(0) for the Epstein zeta function of the square lattice,
# -log(2 pi) - 2 log(Gamma(1/4)^2 / (2 pi sqrt 2)).
LATTICE_ZETA_PRIME0 = -2.6210658518230185

DIAGONAL_RULES = ("cell", "corrected")


def greens_value(r, omega):
    """``G(r) = -(i/4) H^(1)_0(omega r)`` for ``r > 0``."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("Green's function is singular at r = 0; use the diagonal weight")
    return -0.25j * hankel1_0(omega * r)


def _cell_integral(h, omega, n_theta=24):
    """Integral of G over the h x h cell centred on the singularity.

    Radially, ``int_0^R r H0(omega r) dr = R H1(omega R)/omega + 2i/(pi omega^2)``;
    the angular integral over the eight symmetric triangles is smooth and done
    with Gauss-Legendre.
    """
    t, w = np.polynomial.legendre.leggauss(n_theta)
    theta = 0.125 * np.pi * (t + 1.0)
    w = 0.125 * np.pi * w
    R = 0.5 * h / np.cos(theta)
    radial = R * hankel1_1(omega * R) / omega + 2j / (np.pi * omega ** 2)
    return 8.0 * np.sum(w * (-0.25j) * radial)


def _corrected_weight(h, omega):
    """Self weight of the O(h^4 log h) corrected trapezoidal rule.

    ``G = (1/2pi) J0(omega r) log r + smooth``; the punctured lattice sum of the
    log part is corrected by ``h^2 (log h + Z'(0)/2) / (2 pi)`` and the smooth
    part contributes its value at the origin.
    """
    smooth0 = -0.25j + (np.log(0.5 * omega) + np.euler_gamma) / (2.0 * np.pi)
    return h * h * (smooth0 + (np.log(h) + 0.5 * LATTICE_ZETA_PRIME0) / (2.0 * np.pi))


def diagonal_weight(h, omega, rule="cell"):
    if rule == "cell":
        return complex(_cell_integral(h, omega))
    if rule == "corrected":
        return complex(_corrected_weight(h, omega))
    raise ValueError(f"unknown diagonal rule {rule!r}; expected one of {DIAGONAL_RULES}")


def lattice_samples(di, dj, h, omega, diag):
    """``h^2 G(h |(di, dj)|)`` for integer offset arrays, ``diag`` at the origin."""
    di = np.asarray(di)
    dj = np.asarray(dj)
    r2 = di.astype(np.int64) ** 2 + dj.astype(np.int64) ** 2
    uniq, inv = np.unique(r2, return_inverse=True)
    vals = np.empty(uniq.shape, dtype=complex)
    nz = uniq > 0
    j0, y0, _, _ = bessel_jy(omega * h * np.sqrt(uniq[nz]))
    vals[nz] = (-0.25j * h * h) * (j0 + 1j * y0)
    vals[~nz] = diag
    return vals[inv].reshape(r2.shape)


@dataclass(frozen=True)
class KernelTable:
    grid: Grid
    samples: np.ndarray          # shape (2 nz - 1, 2 nx - 1), [dj + nz - 1, di + nx - 1]
    diagonal_weight: complex
    fft_embedding: np.ndarray    # fft2 of the circulant extension, shape pad_shape
    rule: str = "cell"

    @property
    def pad_shape(self) -> tuple[int, int]:
        return self.fft_embedding.shape

    def sample(self, di, dj):
        """Kernel weights at arbitrary integer offsets (not limited to the table)."""
        return lattice_samples(di, dj, self.grid.h, self.grid.omega, self.diagonal_weight)

    def offset(self, di, dj):
        """Table lookup ``S(di, dj)``; offsets must lie in the grid's lattice."""
        nx, nz = self.grid.nx, self.grid.nz
        di = np.asarray(di)
        dj = np.asarray(dj)
        if np.any(np.abs(di) > nx - 1) or np.any(np.abs(dj) > nz - 1):
            raise IndexError("offset outside the kernel table")
        return self.samples[dj + nz - 1, di + nx - 1]

    def convolve(self, f: np.ndarray) -> np.ndarray:
        nx, nz = self.grid.nx, self.grid.nz
        f = np.asarray(f)
        if f.shape not in ((self.grid.N,), (nz, nx)):
            raise ValueError(f"field of shape {f.shape} does not match grid {nz}x{nx}")
        F = np.zeros(self.pad_shape, dtype=complex)
        F[:nz, :nx] = f.reshape(nz, nx)
        y = scipy.fft.ifft2(scipy.fft.fft2(F, overwrite_x=True) * self.fft_embedding,
                            overwrite_x=True)
        return y[:nz, :nx].reshape(f.shape)

    def submatrix(self, rows, cols) -> np.ndarray:
        """Dense block ``G(rows, cols)`` for flat z-major node indices."""
        nx = self.grid.nx
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        if rows.size and (rows.min() < 0 or rows.max() >= self.grid.N):
            raise IndexError("row node outside the grid")
        if cols.size and (cols.min() < 0 or cols.max() >= self.grid.N):
            raise IndexError("column node outside the grid")
        rj, ri = np.divmod(rows, nx)
        cj, ci = np.divmod(cols, nx)
        return self.offset(ri[:, None] - ci[None, :], rj[:, None] - cj[None, :])

    def transposed(self) -> "KernelTable":
        return KernelTable(self.grid.transposed(), np.ascontiguousarray(self.samples.T),
                           self.diagonal_weight, np.ascontiguousarray(self.fft_embedding.T),
                           self.rule)


def _embed(samples, nx, nz, pad):
    pz, px = pad
    K = np.zeros(pad, dtype=complex)
    dj = np.arange(-(nz - 1), nz)
    di = np.arange(-(nx - 1), nx)
    K[np.ix_(dj % pz, di % px)] = samples
    return scipy.fft.fft2(K, overwrite_x=True)


def build_kernel(grid: Grid, rule: str = "cell",
                 max_fft_elements: int = MAX_FFT_ELEMENTS) -> KernelTable:
    nx, nz = grid.nx, grid.nz
    pad = (scipy.fft.next_fast_len(2 * nz - 1), scipy.fft.next_fast_len(2 * nx - 1))
    if pad[0] * pad[1] > max_fft_elements:
        raise ValueError(f"padded transform {pad} exceeds the budget of {max_fft_elements} elements")
    diag = diagonal_weight(grid.h, grid.omega, rule)
    # one quadrant, then mirrored: S depends only on |di|, |dj|
    quad = lattice_samples(np.arange(nx)[None, :], np.arange(nz)[:, None],
                           grid.h, grid.omega, diag)
    samples = np.empty((2 * nz - 1, 2 * nx - 1), dtype=complex)
    samples[nz - 1:, nx - 1:] = quad
    samples[nz - 1:, :nx - 1] = quad[:, :0:-1]
    samples[:nz - 1, :] = samples[2 * nz - 2:nz - 1:-1, :]
    return KernelTable(grid, samples, diag, _embed(samples, nx, nz, pad), rule)
