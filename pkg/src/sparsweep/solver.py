"""Offline setup (stencils, C, layers, factorisations) and the online solves."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .grid import Grid, Medium, incident_plane_wave
from .kernel import KernelTable, build_kernel
from .krylov import SolveReport, solve_ls, solve_sparsified
from .layers import DEFAULT_Q, LocalSystem, Partition, build_layers, make_partition
from .operator import LSOperator
from .sparsify import (DEFAULT_WINDOW, SparseOperator, StencilSet, assemble_C,
                       compute_stencils, stencil_operator)
from .sweep import Bidirectional, LayeredSweep, TransposedSweep

log = logging.getLogger(__name__)


@dataclass
class Setup:
    grid: Grid
    medium: Medium
    kernel: KernelTable
    stencils: StencilSet
    op: LSOperator
    A: SparseOperator
    C: SparseOperator
    partition_h: Partition
    systems_h: list[LocalSystem]
    partition_v: Partition | None
    systems_v: list[LocalSystem] | None
    horizontal: LayeredSweep
    vertical: TransposedSweep | None
    precond: Bidirectional
    timings: dict = field(default_factory=dict)

    @property
    def offline_seconds(self):
        return sum(self.timings.values())

    def factor_bytes(self):
        systems = self.systems_h + (self.systems_v or [])
        return sum(s.factor.nbytes for s in systems)

    def solve_sparse(self, g, tol=1e-6, max_iter=200, precond="bidirectional"):
        M = {"bidirectional": self.precond, "sweep": self.horizontal, "none": None}[precond]
        return solve_sparsified(self.C, M, g, tol, max_iter)

    def solve(self, f, outer_tol=1e-10, inner_tol=1e-3, flexible=True, max_outer=200,
              max_inner=200) -> tuple[np.ndarray, SolveReport]:
        return solve_ls(self.op, self.A, self.C, self.precond, f, outer_tol, inner_tol,
                        flexible, max_outer, max_inner)

    def scattered(self, angle, **kw):
        """Scattered field for the plane wave in direction ``angle``."""
        return self.solve(self.op.rhs(incident_plane_wave(self.grid, angle)), **kw)


def prepare(medium: Medium, L: int | None = None, q: int = DEFAULT_Q,
            shift_strength: float = 1.0, window_radius: int = DEFAULT_WINDOW,
            diag_rule: str = "cell", local_solver: str = "banded",
            bidirectional: bool = True, L_vertical: int | None = None,
            kernel: KernelTable | None = None) -> Setup:
    """Run the offline stage for ``medium``; each phase is timed separately."""
    grid = medium.grid
    t = {}
    t0 = time.perf_counter()
    if kernel is None:
        kernel = build_kernel(grid, diag_rule)
    t["kernel"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    stencils = compute_stencils(grid, kernel, window_radius)
    A = stencil_operator(stencils, grid)
    C = assemble_C(stencils, medium, kernel)
    t["sparsify"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    part_h = make_partition(grid, L, q, "horizontal")
    sys_h = build_layers(part_h, stencils, medium, kernel, C, shift_strength, local_solver)
    horizontal = LayeredSweep(C, part_h, sys_h)
    t["layers_h"] = time.perf_counter() - t0

    part_v = sys_v = vertical = None
    if bidirectional:
        t0 = time.perf_counter()
        part_v = make_partition(grid, L_vertical if L_vertical is not None else L, q, "vertical")
        C_t = C.transposed_grid()
        sys_v = build_layers(part_v, stencils.transposed(), medium.transposed(),
                             kernel.transposed(), C_t, shift_strength, local_solver)
        vertical = TransposedSweep(LayeredSweep(C_t, part_v, sys_v))
        t["layers_v"] = time.perf_counter() - t0
    log.info("offline setup on %dx%d: %s", grid.nx, grid.nz,
             ", ".join(f"{k} {v:.3f}s" for k, v in t.items()))
    return Setup(grid, medium, kernel, stencils, LSOperator(kernel, medium), A, C,
                 part_h, sys_h, part_v, sys_v, horizontal, vertical,
                 Bidirectional(C, horizontal, vertical), t)
