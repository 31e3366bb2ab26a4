"""The discretised Lippmann-Schwinger operator ``H = I + omega^2 G D``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Medium
from .kernel import KernelTable


@dataclass(frozen=True)
class LSOperator:
    kernel: KernelTable
    medium: Medium

    def __post_init__(self):
        g, k = self.medium.grid, self.kernel.grid
        if (g.nx, g.nz) != (k.nx, k.nz):
            raise ValueError("medium and kernel grids differ")

    @property
    def grid(self):
        return self.medium.grid

    @property
    def omega2(self):
        return self.grid.omega ** 2

    def _check(self, u):
        u = np.asarray(u)
        if u.size != self.grid.N:
            raise ValueError(f"field of size {u.size} does not match N = {self.grid.N}")
        return u.ravel()

    def apply(self, u):
        u = self._check(u)
        if self.medium.is_zero:
            return u.astype(complex)
        return u + self.omega2 * self.kernel.convolve(self.medium.values * u)

    def rhs(self, u_incident):
        u = self._check(u_incident)
        if self.medium.is_zero:
            return np.zeros(self.grid.N, dtype=complex)
        return -self.omega2 * self.kernel.convolve(self.medium.values * u)


def apply_H(op: LSOperator, u):
    return op.apply(u)


def build_rhs(op: LSOperator, u_incident):
    return op.rhs(u_incident)
