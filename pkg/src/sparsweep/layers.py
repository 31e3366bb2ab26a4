"""Layered decomposition and the local sparsified systems on extended layers.

Layers split the grid rows (the z direction of the grid they are built on;
vertical layering is done on the x/z-exchanged grid).  Layer ``l`` owns rows
``lo..hi`` and is extended by ``q`` rows on each side, clipped to the grid.
Inside the extension the medium is faded out with a cubic cut-off and
damped with a complex shift; the extended boundary rows use the
boundary-class stencils, which act as the absorbing condition for the
background medium.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla
from scipy.linalg import lapack

from . import _backend
from .grid import Grid, Medium
from .kernel import KernelTable
from .sparsify import OFFSETS, SparseOperator, StencilSet, class_grid

log = logging.getLogger(__name__)

DEFAULT_Q = 10
DEFAULT_ROWS_PER_LAYER = 50
MIN_THICKNESS = 2
LOCAL_SOLVERS = ("banded", "superlu")


class LayerError(ValueError):
    pass


@dataclass(frozen=True)
class Partition:
    L: int
    ranges: tuple[tuple[int, int], ...]   # 0-based inclusive row ranges, bottom to top
    q: int
    n: int                                 # rows along the layering direction
    orientation: str = "horizontal"

    def extended(self, layer: int) -> tuple[int, int]:
        lo, hi = self.ranges[layer]
        return max(0, lo - self.q), min(self.n - 1, hi + self.q)


def default_layer_count(n: int) -> int:
    return max(1, int(round(n / DEFAULT_ROWS_PER_LAYER)))


def make_partition(grid: Grid, L: int | None = None, q: int = DEFAULT_Q,
                   orientation: str = "horizontal") -> Partition:
    """Near-equal layers; when sizes differ the lower layers get the extra row."""
    if orientation not in ("horizontal", "vertical"):
        raise LayerError(f"unknown orientation {orientation!r}")
    n = grid.nz if orientation == "horizontal" else grid.nx
    if L is None:
        L = default_layer_count(n)
    if L < 1 or L * MIN_THICKNESS > n:
        raise LayerError(f"cannot split {n} rows into {L} layers of at least {MIN_THICKNESS} rows")
    if q < 1 and L > 1:
        raise LayerError("extension thickness q must be at least 1")
    base, extra = divmod(n, L)
    ranges, lo = [], 0
    for layer in range(L):
        size = base + (1 if layer < extra else 0)
        ranges.append((lo, lo + size - 1))
        lo += size
    return Partition(L, tuple(ranges), int(q), n, orientation)


def _cubic_ramp(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


@dataclass(frozen=True)
class CutoffProfile:
    xi: np.ndarray       # per extended row (constant along the row)
    shift: np.ndarray    # per extended row, i * beta * omega * ramp^2


def make_cutoff(partition: Partition, layer: int, omega: float,
                shift_strength: float = 1.0) -> CutoffProfile:
    if not 0 <= layer < partition.L:
        raise LayerError(f"layer {layer} outside 0..{partition.L - 1}")
    lo, hi = partition.ranges[layer]
    elo, ehi = partition.extended(layer)
    rows = np.arange(elo, ehi + 1)
    dist = np.maximum(lo - rows, 0) + np.maximum(rows - hi, 0)
    ramp = _cubic_ramp(dist / max(partition.q, 1))
    return CutoffProfile(1.0 - ramp, 1j * shift_strength * omega * ramp ** 2)


class BandedLU:
    """LAPACK banded LU of a local 9-point operator, unknowns ordered along the
    layer (x-major) so the bandwidth is the layer thickness, not its width."""

    def __init__(self, vals: np.ndarray):
        ne, nx, _ = vals.shape
        self.ne, self.nx = ne, nx
        n = ne * nx
        kl = ku = ne + 1
        ab = np.zeros((2 * kl + ku + 1, n), dtype=complex)
        J, I = np.meshgrid(np.arange(ne), np.arange(nx), indexing="ij")
        p = I * ne + J
        for s, (di, dj) in enumerate(OFFSETS):
            ok = (I + di >= 0) & (I + di < nx) & (J + dj >= 0) & (J + dj < ne)
            off = di * ne + dj
            cols = (p + off)[ok]
            ab[kl + ku - off, cols] = vals[:, :, s][ok]
        self.kl, self.ku = kl, ku
        self.lu, self.piv, self.info = lapack.zgbtrf(ab, kl, ku, overwrite_ab=True)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        b = np.ascontiguousarray(rhs.T).ravel()
        x, info = lapack.zgbtrs(self.lu, self.kl, self.ku, b, self.piv)
        if info != 0:
            raise RuntimeError(f"zgbtrs failed with info={info}")
        return x.reshape(self.nx, self.ne).T

    @property
    def nbytes(self):
        return self.lu.nbytes


class SparseLU:
    """SuperLU factorisation (minimum-degree ordering on A^T + A)."""

    def __init__(self, vals: np.ndarray):
        ne, nx, _ = vals.shape
        self.shape = (ne, nx)
        A = SparseOperator(Grid(nx, ne, 1.0, 1.0), vals).to_scipy("csc")
        self.info = 0
        try:
            self.lu = spla.splu(A, permc_spec="MMD_AT_PLUS_A")
        except RuntimeError:
            self.info = 1

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return self.lu.solve(rhs.ravel()).reshape(self.shape)

    @property
    def nbytes(self):
        return (self.lu.L.data.nbytes + self.lu.U.data.nbytes)


@dataclass
class LocalSystem:
    layer: int
    lo: int
    hi: int
    elo: int
    ehi: int
    vals: np.ndarray                # local rows of C^l, shape (ne, nx, 9)
    global_bottom: np.ndarray | None  # C row lo (global), couples to row lo - 1
    global_top: np.ndarray | None     # C row hi (global), couples to row hi + 1
    factor: object = field(default=None, repr=False)

    @property
    def ne(self):
        return self.ehi - self.elo + 1

    @property
    def nx(self):
        return self.vals.shape[1]

    @property
    def a(self):
        """Local index of the layer's bottom row ("1")."""
        return self.lo - self.elo

    @property
    def b(self):
        """Local index of the layer's top row ("n")."""
        return self.hi - self.elo

    @property
    def has_below(self):
        return self.a > 0

    @property
    def has_above(self):
        return self.b < self.ne - 1

    def operator(self) -> SparseOperator:
        return SparseOperator(Grid(self.nx, self.ne, 1.0, 1.0), self.vals)

    def matvec(self, x):
        return _backend.stencil_apply(self.vals, np.ascontiguousarray(x, dtype=complex))

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        if self.factor is None:
            raise LayerError(f"layer {self.layer} has not been factorised")
        return self.factor.solve(rhs)

    def compatible_rows(self, nz_global: int) -> np.ndarray:
        """Local rows whose whole 3x3 neighbourhood (within the grid) lies in the layer."""
        g = np.arange(self.lo, self.hi + 1)
        ok = ((g - 1 >= self.lo) | (g == 0)) & ((g + 1 <= self.hi) | (g == nz_global - 1))
        return g[ok] - self.elo


def assemble_local(partition: Partition, layer: int, stencils: StencilSet, medium: Medium,
                   kernel: KernelTable, C: SparseOperator, cutoff: CutoffProfile) -> LocalSystem:
    grid = medium.grid
    if partition.n != grid.nz:
        raise LayerError("partition and grid disagree on the layering direction")
    lo, hi = partition.ranges[layer]
    elo, ehi = partition.extended(layer)
    ne = ehi - elo + 1
    if ne < 3:
        raise LayerError(f"extended layer {layer} has only {ne} rows")
    m = medium.array[elo:ehi + 1]
    m_loc = cutoff.xi[:, None] * m + (cutoff.shift / grid.omega ** 2)[:, None]
    vals = _backend.assemble_rows(class_grid(grid.nx, ne), stencils.alpha,
                                  stencils.coupling, m_loc, grid.omega ** 2)
    return LocalSystem(layer, lo, hi, elo, ehi, vals,
                       C.vals[lo].copy() if lo > elo else None,
                       C.vals[hi].copy() if hi < ehi else None)


def factorize_local(system: LocalSystem, method: str = "banded") -> LocalSystem:
    if method == "banded":
        factor = BandedLU(system.vals)
    elif method == "superlu":
        factor = SparseLU(system.vals)
    else:
        raise LayerError(f"unknown local solver {method!r}; expected one of {LOCAL_SOLVERS}")
    if factor.info != 0:
        raise LayerError(f"singular pivot while factorising layer {system.layer} "
                         f"(info={factor.info}); check the cut-off and complex shift")
    system.factor = factor
    return system


def build_layers(partition: Partition, stencils: StencilSet, medium: Medium,
                 kernel: KernelTable, C: SparseOperator, shift_strength: float = 1.0,
                 method: str = "banded") -> list[LocalSystem]:
    systems = []
    for layer in range(partition.L):
        cut = make_cutoff(partition, layer, medium.grid.omega, shift_strength)
        sysl = assemble_local(partition, layer, stencils, medium, kernel, C, cut)
        systems.append(factorize_local(sysl, method))
    return systems
