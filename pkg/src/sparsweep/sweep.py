"""Layered Gauss-Seidel sweeps built from the Green's representation formula.

For layer ``l`` with bottom row ``1`` and top row ``n`` (local rows ``0`` and
``n + 1`` are the neighbouring rows just outside), the local solution with
traces ``v_0, v_1`` below and ``v_n, v_{n+1}`` above is

    C^l u = -d_n C_{n,n+1} v_{n+1} + d_{n+1} C_{n+1,n} v_n
            -d_1 C_{1,0} v_0     + d_0 C_{0,1} v_1 + g,

where ``d_r`` places a row vector into local row ``r``.  ``C_{1,0}`` and
``C_{n,n+1}`` are blocks of the global matrix; ``C_{0,1}`` and ``C_{n+1,n}``
are blocks of the local matrix (they coincide with the global ones unless the
cut-off already acts one row from the layer).

Layers are numbered ``0..L-1`` from the bottom (row 0) upwards.  The downward
pass (top to bottom) propagates the field of the sources above each layer
through its top traces; the upward pass re-solves each layer with the
accumulated source and the traces of the updated layer below.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .layers import LocalSystem, Partition
from .sparsify import SparseOperator, coupling_apply


class SweepError(RuntimeError):
    pass


def inject_delta(rhs: np.ndarray, row: int, values: np.ndarray) -> np.ndarray:
    """Add ``values`` to local row ``row`` of a ``(ne, nx)`` right-hand side."""
    if not 0 <= row < rhs.shape[0]:
        raise SweepError(f"trace row {row} outside the extended layer (0..{rhs.shape[0] - 1})")
    rhs[row] += values
    return rhs


def _inject_above(rhs, sysl: LocalSystem, v_n, v_n1):
    """Top traces: ``v_n`` on the layer's top row, ``v_n1`` on the row above."""
    inject_delta(rhs, sysl.b, -coupling_apply(sysl.global_top, +1, v_n1))
    inject_delta(rhs, sysl.b + 1, coupling_apply(sysl.vals[sysl.b + 1], -1, v_n))


def _inject_below(rhs, sysl: LocalSystem, v_0, v_1):
    """Bottom traces: ``v_0`` on the row below the layer, ``v_1`` on its bottom row."""
    inject_delta(rhs, sysl.a, -coupling_apply(sysl.global_bottom, -1, v_0))
    inject_delta(rhs, sysl.a - 1, coupling_apply(sysl.vals[sysl.a - 1], +1, v_1))


def local_rhs(sysl: LocalSystem, g: np.ndarray) -> np.ndarray:
    """``g`` restricted to the layer, zero-extended over the extension rows."""
    rhs = np.zeros((sysl.ne, sysl.nx), dtype=complex)
    rhs[sysl.a:sysl.b + 1] = g[sysl.lo:sysl.hi + 1]
    return rhs


def grf_solve(sysl: LocalSystem, g: np.ndarray, below=None, above=None) -> np.ndarray:
    """Local solve with optional trace pairs ``below = (v_0, v_1)`` and
    ``above = (v_n, v_{n+1})``; ``g`` is the global ``(nz, nx)`` source.
    Returns the field on the extended layer."""
    rhs = local_rhs(sysl, g)
    if below is not None:
        if not sysl.has_below:
            raise SweepError(f"layer {sysl.layer} has no room for a bottom trace")
        _inject_below(rhs, sysl, *below)
    if above is not None:
        if not sysl.has_above:
            raise SweepError(f"layer {sysl.layer} has no room for a top trace")
        _inject_above(rhs, sysl, *above)
    return sysl.solve(rhs)


@dataclass
class SweepCounters:
    sweeps: int = 0
    local_solves: int = 0


class LayeredSweep:
    """Approximate inverse of ``C`` by one down-and-up pass over the layers."""

    def __init__(self, C: SparseOperator, partition: Partition, systems: list[LocalSystem]):
        if partition.n != C.grid.nz:
            raise SweepError("partition does not match the operator grid")
        if len(systems) != partition.L:
            raise SweepError("one local system per layer is required")
        self.C = C
        self.partition = partition
        self.systems = systems
        self.counters = SweepCounters()

    @property
    def grid(self):
        return self.C.grid

    def __call__(self, g: np.ndarray) -> np.ndarray:
        return self.apply(g)

    def apply(self, g: np.ndarray) -> np.ndarray:
        g = np.asarray(g)
        if g.size != self.grid.N:
            raise SweepError(f"residual of size {g.size} does not match N = {self.grid.N}")
        G = g.reshape(self.grid.shape)
        S = self.systems
        L = len(S)
        rhs = [local_rhs(s, G) for s in S]
        w = [None] * L
        for l in range(L - 1, -1, -1):
            if l < L - 1:
                up = S[l + 1]
                _inject_above(rhs[l], S[l], w[l + 1][up.a - 1], w[l + 1][up.a])
            w[l] = S[l].solve(rhs[l])
        v = [w[0]]
        for l in range(1, L):
            dn, cur = S[l - 1], S[l]
            # v^{l-1} was solved with the top injection, which cancels the
            # down-going field above its top row; put it back so both traces
            # describe the same field.
            v0 = v[l - 1][dn.b]
            v1 = v[l - 1][dn.b + 1] + w[l][cur.a]
            _inject_below(rhs[l], cur, v0, v1)
            v.append(cur.solve(rhs[l]))
        self.counters.sweeps += 1
        self.counters.local_solves += 2 * L - 1
        u = np.concatenate([vl[s.a:s.b + 1] for vl, s in zip(v, S)], axis=0)
        return u.reshape(g.shape)


class TransposedSweep:
    """The layered sweep run on the x/z-exchanged problem (vertical layers).

    ``inner`` sweeps ``P C P^T`` on the transposed grid; the residual is
    permuted in and the result permuted back.
    """

    def __init__(self, inner: LayeredSweep):
        self.inner = inner
        self.nz, self.nx = inner.grid.nx, inner.grid.nz   # shape of the original grid

    def __call__(self, g):
        return self.apply(g)

    def apply(self, g):
        g = np.asarray(g)
        gt = np.ascontiguousarray(g.reshape(self.nz, self.nx).T)
        u = self.inner.apply(gt)
        return np.ascontiguousarray(u.T).reshape(g.shape)


def gs_sweep(C: SparseOperator, partition: Partition, systems: list[LocalSystem], g):
    return LayeredSweep(C, partition, systems).apply(g)


def transpose_sweep(C_t: SparseOperator, partition_t: Partition, systems_t: list[LocalSystem], g):
    return TransposedSweep(LayeredSweep(C_t, partition_t, systems_t)).apply(g)


class Bidirectional:
    """Horizontal sweep, then a vertical sweep on the remaining residual."""

    def __init__(self, C: SparseOperator, horizontal: LayeredSweep,
                 vertical: TransposedSweep | None):
        self.C = C
        self.horizontal = horizontal
        self.vertical = vertical

    def __call__(self, g):
        return self.apply(g)

    def apply(self, g):
        u1 = self.horizontal.apply(g)
        if self.vertical is None:
            return u1
        e = g - self.C.matvec(u1)
        return u1 + self.vertical.apply(e)

    @property
    def local_solves(self):
        n = self.horizontal.counters.local_solves
        if self.vertical is not None:
            n += self.vertical.inner.counters.local_solves
        return n


def bidirectional(C, horizontal: LayeredSweep, vertical: TransposedSweep | None, g):
    return Bidirectional(C, horizontal, vertical).apply(g)
