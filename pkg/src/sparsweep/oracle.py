"""Dense reference solvers, only for small grids."""
from __future__ import annotations

import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla

from .grid import Medium
from .kernel import KernelTable

ORACLE_CAP = 2500


class OracleCapError(ValueError):
    pass


def dense_H(medium: Medium, kernel: KernelTable, cap: int = ORACLE_CAP) -> np.ndarray:
    N = medium.grid.N
    if N > cap:
        raise OracleCapError(f"dense oracle limited to N <= {cap} (got {N})")
    idx = np.arange(N)
    G = kernel.submatrix(idx, idx)
    return np.eye(N, dtype=complex) + medium.grid.omega ** 2 * G * medium.values[None, :]


def dense_oracle_solve(medium: Medium, kernel: KernelTable, f, cap: int = ORACLE_CAP):
    f = np.asarray(f, dtype=complex)
    if medium.is_zero:
        if f.size != medium.grid.N:
            raise ValueError("field size does not match the grid")
        return f.copy()
    H = dense_H(medium, kernel, cap)
    return scipy.linalg.solve(H, f.ravel()).reshape(f.shape)


def sparse_oracle_solve(C, g):
    """Direct sparse solve of ``C u = g`` (SuperLU)."""
    g = np.asarray(g, dtype=complex)
    return spla.spsolve(C.to_scipy("csc"), g.ravel()).reshape(g.shape)
