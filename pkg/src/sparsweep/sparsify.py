"""Annihilating stencils for the sampled Green's function and the sparsified system.

A row of ``A`` is a 3x3 stencil ``alpha`` chosen so that ``alpha . G`` nearly
vanishes away from the stencil; ``C`` is ``A (I + omega^2 G D)`` restricted to
the sparsity pattern of ``A``.  By translation invariance there is one stencil
per boundary class, so

    C(k, k + s) = alpha_c[s] + omega^2 m_{k+s} B_c[s],
    B_c[s]      = sum_{p in mu} alpha_c[p] S(p - s),

with ``c`` the class of node ``k`` and ``s`` ranging over the 9 neighbour
offsets (ordered row-major, ``s = 3 (dj + 1) + (di + 1)``).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import _backend
from .grid import Grid, Medium
from .kernel import KernelTable

OFFSETS = _backend.OFFSETS
CLASS_NAMES = ("I", "W", "E", "S", "N", "SW", "SE", "NW", "NE")
CLASS_INDEX = {name: c for c, name in enumerate(CLASS_NAMES)}
# class of a node after exchanging x and z
_TRANSPOSE_CLASS = {"I": "I", "W": "S", "E": "N", "S": "W", "N": "E",
                    "SW": "SW", "SE": "NW", "NW": "SE", "NE": "NE"}
_TRANSPOSE_OFFSET = [OFFSETS.index((dj, di)) for (di, dj) in OFFSETS]
DEFAULT_WINDOW = 12


class StencilError(RuntimeError):
    pass


def class_grid(nx: int, nz: int) -> np.ndarray:
    """Boundary class index of every node, shape ``(nz, nx)``."""
    cls = np.zeros((nz, nx), dtype=np.int64)
    ew = np.zeros((nz, nx), dtype="<U1")
    ns = np.zeros((nz, nx), dtype="<U1")
    ew[:, 0] = "W"
    ew[:, -1] = "E"
    ns[0, :] = "S"
    ns[-1, :] = "N"
    for name, c in CLASS_INDEX.items():
        if name == "I":
            continue
        want_ns = name[0] if name[0] in "SN" else ""
        want_ew = name[-1] if name[-1] in "WE" else ""
        cls[(ns == want_ns) & (ew == want_ew)] = c
    return cls


def _allowed(name: str, di, dj):
    ok = np.ones(np.broadcast(di, dj).shape, dtype=bool)
    if "W" in name:
        ok &= di >= 0
    if "E" in name:
        ok &= di <= 0
    if "S" in name:
        ok &= dj >= 0
    if "N" in name:
        ok &= dj <= 0
    return ok


def neighbor_set(k: int, grid: Grid) -> list[int]:
    """Flat indices of the nodes within l-infinity distance 1 of node ``k``
    (0-based, z-major), in row-major offset order."""
    if not 0 <= k < grid.N:
        raise IndexError(f"node {k} outside grid of {grid.N} nodes")
    j, i = divmod(k, grid.nx)
    return [(j + dj) * grid.nx + i + di for (di, dj) in OFFSETS
            if 0 <= i + di < grid.nx and 0 <= j + dj < grid.nz]


@dataclass(frozen=True)
class Stencil:
    name: str
    offsets: tuple[tuple[int, int], ...]
    alpha: np.ndarray        # length len(offsets)
    residual: float          # attained min ||alpha G(mu, T)||
    n_targets: int


@dataclass(frozen=True)
class StencilSet:
    classes: dict[str, Stencil]
    alpha: np.ndarray        # (9 classes, 9 offsets), zero where an offset is clipped
    coupling: np.ndarray     # (9 classes, 9 offsets), B_c[s]
    window_radius: int

    def transposed(self) -> "StencilSet":
        alpha = np.empty_like(self.alpha)
        coupling = np.empty_like(self.coupling)
        classes = {}
        for name, st in self.classes.items():
            tname = _TRANSPOSE_CLASS[name]
            c, tc = CLASS_INDEX[name], CLASS_INDEX[tname]
            alpha[tc] = self.alpha[c][_TRANSPOSE_OFFSET]
            coupling[tc] = self.coupling[c][_TRANSPOSE_OFFSET]
            classes[tname] = Stencil(tname, tuple((dj, di) for di, dj in st.offsets),
                                     st.alpha, st.residual, st.n_targets)
        return StencilSet(classes, alpha, coupling, self.window_radius)


def target_matrix(name: str, kernel: KernelTable, window_radius: int):
    """``G(mu, T)`` for a class: rows over the clipped 3x3 neighbourhood,
    columns over the window (clipped to the class's half-planes) minus mu."""
    r = np.arange(-window_radius, window_radius + 1)
    TI, TJ = np.meshgrid(r, r)
    TI, TJ = TI.ravel(), TJ.ravel()
    keep = _allowed(name, TI, TJ) & ((np.abs(TI) > 1) | (np.abs(TJ) > 1))
    TI, TJ = TI[keep], TJ[keep]
    mu = [(di, dj) for (di, dj) in OFFSETS if _allowed(name, di, dj)]
    pi = np.array([p[0] for p in mu])
    pj = np.array([p[1] for p in mu])
    M = kernel.sample(pi[:, None] - TI[None, :], pj[:, None] - TJ[None, :])
    return tuple(mu), M


def _solve_class(name, kernel, window_radius):
    mu, M = target_matrix(name, kernel, window_radius)
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    if s[0] < 1e-14:
        raise StencilError(f"degenerate target matrix for class {name}")
    alpha = U[:, -1].conj()
    c = mu.index((0, 0))
    alpha = alpha * (abs(alpha[c]) / alpha[c])   # fixes the phase: real positive centre
    alpha[c] = abs(alpha[c])
    return Stencil(name, mu, alpha, float(s[-1]), M.shape[1])


def compute_stencils(grid: Grid, kernel: KernelTable,
                     window_radius: int = DEFAULT_WINDOW) -> StencilSet:
    if window_radius < 2:
        raise ValueError("window_radius must be at least 2")
    classes = {}
    alpha = np.zeros((9, 9), dtype=complex)
    coupling = np.zeros((9, 9), dtype=complex)
    oi = np.array([o[0] for o in OFFSETS])
    oj = np.array([o[1] for o in OFFSETS])
    for name in CLASS_NAMES:
        st = _solve_class(name, kernel, window_radius)
        classes[name] = st
        c = CLASS_INDEX[name]
        idx = [OFFSETS.index(o) for o in st.offsets]
        alpha[c, idx] = st.alpha
        pi = np.array([o[0] for o in st.offsets])
        pj = np.array([o[1] for o in st.offsets])
        S = kernel.sample(pi[:, None] - oi[None, :], pj[:, None] - oj[None, :])
        coupling[c] = st.alpha @ S
        coupling[c, alpha[c] == 0] = 0.0
    return StencilSet(classes, alpha, coupling, window_radius)


@dataclass(frozen=True)
class SparseOperator:
    """9-point operator on a grid, ``vals[j, i, s]`` multiplying ``x[j + dj, i + di]``."""
    grid: Grid
    vals: np.ndarray

    @property
    def shape(self):
        return (self.grid.N, self.grid.N)

    def matvec(self, x):
        x = np.asarray(x)
        out = _backend.stencil_apply(self.vals, np.ascontiguousarray(x.reshape(self.grid.shape),
                                                                     dtype=complex))
        return out.reshape(x.shape)

    __matmul__ = matvec

    def row_block_apply(self, row: int, dj: int, p: np.ndarray) -> np.ndarray:
        """Block ``C_{row, row + dj}`` (an ``nx x nx`` tridiagonal block) times ``p``."""
        return coupling_apply(self.vals[row], dj, p)

    def triplets(self):
        nx, nz = self.grid.nx, self.grid.nz
        J, I = np.meshgrid(np.arange(nz), np.arange(nx), indexing="ij")
        rows, cols, data = [], [], []
        for s, (di, dj) in enumerate(OFFSETS):
            ok = (I + di >= 0) & (I + di < nx) & (J + dj >= 0) & (J + dj < nz)
            rows.append((J * nx + I)[ok])
            cols.append(((J + dj) * nx + I + di)[ok])
            data.append(self.vals[:, :, s][ok])
        return np.concatenate(rows), np.concatenate(cols), np.concatenate(data)

    def to_scipy(self, fmt="csr"):
        r, c, d = self.triplets()
        return sp.coo_matrix((d, (r, c)), shape=self.shape).asformat(fmt)

    def to_dense(self):
        return self.to_scipy().toarray()

    def export(self, path):
        """Write ``row col re im`` lines (0-based z-major indices)."""
        r, c, d = self.triplets()
        order = np.lexsort((c, r))
        r, c, d = r[order], c[order], d[order]
        with open(path, "w") as fh:
            fh.write(f"# nx={self.grid.nx} nz={self.grid.nz} nnz={len(d)}\n")
            for a, b, v in zip(r, c, d):
                fh.write(f"{a} {b} {v.real:.17g} {v.imag:.17g}\n")

    def transposed_grid(self) -> "SparseOperator":
        """The same operator in the ordering of the x/z-exchanged grid (``P C P^T``)."""
        vals = np.ascontiguousarray(self.vals.transpose(1, 0, 2)[:, :, _TRANSPOSE_OFFSET])
        return SparseOperator(self.grid.transposed(), vals)


def coupling_apply(row_vals: np.ndarray, dj: int, p: np.ndarray) -> np.ndarray:
    """``y_i = sum_di row_vals[i, s(di, dj)] p[i + di]`` for one grid row."""
    nx = row_vals.shape[0]
    pp = np.zeros(nx + 2, dtype=complex)
    pp[1:-1] = p
    y = np.zeros(nx, dtype=complex)
    for di in (-1, 0, 1):
        y += row_vals[:, 3 * (dj + 1) + di + 1] * pp[1 + di:nx + 1 + di]
    return y


def stencil_operator(stencils: StencilSet, grid: Grid) -> SparseOperator:
    """The sparse operator ``A``."""
    vals = _backend.assemble_rows(class_grid(grid.nx, grid.nz), stencils.alpha,
                                  stencils.coupling, np.zeros(grid.shape, dtype=complex), 0.0)
    return SparseOperator(grid, vals)


def apply_A(stencils: StencilSet, f: np.ndarray, grid: Grid) -> np.ndarray:
    if np.asarray(f).size != grid.N:
        raise ValueError("field size does not match the grid")
    return stencil_operator(stencils, grid).matvec(f)


def assemble_C(stencils: StencilSet, medium: Medium, kernel: KernelTable) -> SparseOperator:
    grid = medium.grid
    if (grid.nx, grid.nz) != (kernel.grid.nx, kernel.grid.nz):
        raise ValueError("medium and kernel live on different grids")
    vals = _backend.assemble_rows(class_grid(grid.nx, grid.nz), stencils.alpha,
                                  stencils.coupling, medium.array, grid.omega ** 2)
    return SparseOperator(grid, vals)
