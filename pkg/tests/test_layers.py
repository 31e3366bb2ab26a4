import logging
import time

import numpy as np
import pytest

from sparsweep.grid import make_grid, unit_square_grid
from sparsweep.layers import (BandedLU, LayerError, LocalSystem, SparseLU, assemble_local,
                              build_layers, default_layer_count, factorize_local, make_cutoff,
                              make_partition)
from sparsweep.oracle import sparse_oracle_solve

from conftest import bump_setup, random_field, rel

log = logging.getLogger(__name__)


def sizes(p):
    return [hi - lo + 1 for lo, hi in p.ranges]


def test_partition_sizes():
    assert sizes(make_partition(unit_square_grid(200, 200.0), 4)) == [50] * 4
    assert sizes(make_partition(make_grid(6, 10, 0.1, 6.0), 4)) == [3, 3, 2, 2]
    p = make_partition(unit_square_grid(16, 16.0), 1)
    assert p.ranges == ((0, 15),) and p.extended(0) == (0, 15)


@pytest.mark.parametrize("n,L", [(17, 3), (64, 5), (100, 8), (9, 4)])
def test_partition_tiles_rows_once(n, L):
    p = make_partition(unit_square_grid(n, float(n)), L)
    rows = np.concatenate([np.arange(lo, hi + 1) for lo, hi in p.ranges])
    assert np.array_equal(rows, np.arange(n))
    assert max(sizes(p)) - min(sizes(p)) <= 1


def test_partition_rejects():
    g = unit_square_grid(8, 8.0)
    with pytest.raises(LayerError):
        make_partition(g, 5)
    with pytest.raises(LayerError):
        make_partition(g, 0)
    with pytest.raises(LayerError):
        make_partition(g, 2, q=0)
    with pytest.raises(LayerError):
        make_partition(g, 2, orientation="diagonal")


def test_default_layer_count():
    assert default_layer_count(64) == 1
    assert default_layer_count(200) == 4
    assert default_layer_count(400) == 8


def test_vertical_partition_uses_x():
    g = make_grid(12, 8, 1 / 12, 12.0)
    assert make_partition(g, 2, orientation="vertical").n == 12


def test_cutoff_endpoints():
    p = make_partition(unit_square_grid(60, 60.0), 3, q=10)
    cut = make_cutoff(p, 1, 60.0, shift_strength=2.0)
    lo, hi = p.ranges[1]
    elo, _ = p.extended(1)
    inner = slice(lo - elo, hi - elo + 1)
    assert np.all(cut.xi[inner] == 1) and np.all(cut.shift[inner] == 0)
    assert cut.xi[0] == pytest.approx(0.0) and cut.xi[-1] == pytest.approx(0.0)
    assert cut.shift[0] == pytest.approx(2j * 60.0)
    assert np.all(np.diff(cut.xi[:lo - elo + 1]) >= 0)


@pytest.fixture(scope="module")
def setup64():
    return bump_setup(64, -0.2, L=4)


@pytest.mark.parametrize("method", ["banded", "superlu"])
def test_factor_solve_roundtrip(setup64, method, rng):
    S = setup64
    for sysl in S.systems_h:
        s = factorize_local(LocalSystem(**{**sysl.__dict__, "factor": None}), method)
        x = random_field(rng, sysl.ne * sysl.nx).reshape(sysl.ne, sysl.nx)
        assert rel(s.solve(s.matvec(x)), x) <= 1e-12
        y = random_field(rng, x.size).reshape(x.shape)
        a, b = s.solve(s.matvec(x)), s.solve(s.matvec(y))
        assert rel(a, x) <= 1e-12 and rel(b, y) <= 1e-12


def test_banded_matches_superlu(setup64, rng):
    sysl = setup64.systems_h[1]
    rhs = random_field(rng, sysl.ne * sysl.nx).reshape(sysl.ne, sysl.nx)
    assert rel(BandedLU(sysl.vals).solve(rhs), SparseLU(sysl.vals).solve(rhs)) <= 1e-11


def test_unknown_local_solver(setup64):
    with pytest.raises(LayerError):
        factorize_local(setup64.systems_h[0], "cholesky")


def test_singular_pivot_names_layer(setup64):
    s = setup64.systems_h[2]
    bad = LocalSystem(**{**s.__dict__, "vals": np.zeros_like(s.vals), "factor": None})
    with pytest.raises(LayerError, match="layer 2"):
        factorize_local(bad)


def _check_compat(C, systems, nz):
    for s in systems:
        rows = s.compatible_rows(nz)
        assert rows.size > 0
        assert np.max(np.abs(s.vals[rows] - C.vals[rows + s.elo])) <= 1e-13


def test_compatibility_both_orientations(setup64):
    S = setup64
    _check_compat(S.C, S.systems_h, 64)
    _check_compat(S.C.transposed_grid(), S.systems_v, 64)


def test_single_layer_without_shift_is_global_C():
    S = bump_setup(24, 0.3, L=1, q=5, shift_strength=0.0, bidirectional=False)
    assert np.array_equal(S.systems_h[0].vals, S.C.vals)


def test_coupling_blocks_match_global(setup64):
    S = setup64
    for s in S.systems_h:
        if s.has_below:
            assert np.array_equal(s.global_bottom, S.C.vals[s.lo])
        if s.has_above:
            assert np.array_equal(s.global_top, S.C.vals[s.hi])
    # the extension rows' couplings into the layer see the unmodified medium
    up, down = slice(6, 9), slice(0, 3)
    for s in S.systems_h:
        if s.has_below:
            assert np.array_equal(s.vals[s.a - 1][:, up], S.C.vals[s.lo - 1][:, up])
        if s.has_above:
            assert np.array_equal(s.vals[s.b + 1][:, down], S.C.vals[s.hi + 1][:, down])


def test_partition_grid_mismatch(setup64):
    S = setup64
    p = make_partition(unit_square_grid(32, 32.0), 2)
    cut = make_cutoff(p, 0, 64.0)
    with pytest.raises(LayerError):
        assemble_local(p, 0, S.stencils, S.medium, S.kernel, S.C, cut)


@pytest.mark.parametrize("amp", [-0.2, 0.2])
def test_local_green_function(amp):
    """Point source in the middle of a layer: local solve against the global
    sparsified solve, restricted to the layer."""
    S = bump_setup(64, amp, L=4)
    err = []
    for s in S.systems_h:
        g = np.zeros(S.grid.shape, dtype=complex)
        g[(s.lo + s.hi) // 2, 32] = 1.0
        v = sparse_oracle_solve(S.C, g)
        w = s.solve(np.pad(g[s.lo:s.hi + 1], ((s.a, s.ne - 1 - s.b), (0, 0))))
        err.append(rel(w[s.a:s.b + 1], v[s.lo:s.hi + 1]))
    log.info("local Green's function error, amplitude %+.1f: %s", amp, err)
    if amp < 0:
        assert max(err) <= 0.10


def test_factorisation_time_roughly_linear():
    t = {}
    for n in (64, 128):
        S = bump_setup(n, 0.2, L=2, bidirectional=False)
        t0 = time.perf_counter()
        build_layers(S.partition_h, S.stencils, S.medium, S.kernel, S.C)
        t[n] = time.perf_counter() - t0
    log.info("layer factorisation: %s (ratio %.2f for 2x width)", t, t[128] / t[64])
