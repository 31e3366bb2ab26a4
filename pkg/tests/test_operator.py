import logging

import numpy as np
import pytest

from sparsweep.checks import check_apply_H
from sparsweep.grid import incident_plane_wave, make_medium, unit_square_grid
from sparsweep.kernel import build_kernel
from sparsweep.operator import LSOperator, apply_H, build_rhs
from sparsweep.oracle import OracleCapError, dense_H, dense_oracle_solve

from conftest import random_field, rel

log = logging.getLogger(__name__)


def _op(n, amp=0.3, omega=None):
    g = unit_square_grid(n, float(n) if omega is None else omega)
    med = make_medium({"kind": "smooth_bump", "amplitude": amp}, g)
    return LSOperator(build_kernel(g), med)


def test_apply_matches_dense():
    assert check_apply_H().passed


def test_zero_medium_is_identity(rng):
    g = unit_square_grid(8, 8.0)
    op = LSOperator(build_kernel(g), make_medium({"kind": "zero"}, g))
    u = random_field(rng, g.N)
    assert np.array_equal(apply_H(op, u), u)
    assert not np.any(build_rhs(op, incident_plane_wave(g, 0.3)))


def test_rhs_spreads_beyond_support():
    op = _op(24)
    uin = incident_plane_wave(op.grid, 0.0)
    src = op.medium.values * uin
    f = build_rhs(op, uin)
    outside = op.medium.values == 0
    assert not np.any(src[outside])
    assert np.count_nonzero(np.abs(f[outside]) > 1e-12) > 0.5 * outside.sum()


def test_dense_solution_satisfies_equation():
    op = _op(12)
    f = op.rhs(incident_plane_wave(op.grid, 0.7))
    u = dense_oracle_solve(op.medium, op.kernel, f)
    assert rel(op.apply(u), f) <= 1e-10
    assert rel(dense_H(op.medium, op.kernel) @ u, f) <= 1e-12


def test_oracle_cap():
    op = _op(12)
    with pytest.raises(OracleCapError):
        dense_H(op.medium, op.kernel, cap=100)


def test_oracle_zero_medium_returns_f(rng):
    g = unit_square_grid(8, 8.0)
    med = make_medium({"kind": "zero"}, g)
    f = random_field(rng, g.N)
    assert np.array_equal(dense_oracle_solve(med, build_kernel(g), f), f)


def test_shape_checked():
    op = _op(8)
    with pytest.raises(ValueError):
        op.apply(np.ones(10))


def test_grid_mismatch_rejected():
    g = unit_square_grid(8, 8.0)
    with pytest.raises(ValueError):
        LSOperator(build_kernel(unit_square_grid(10, 10.0)), make_medium({"kind": "zero"}, g))


def test_condition_number_stabilises():
    """Second-kind equation: refining the grid at fixed omega does not worsen
    the conditioning."""
    conds = []
    for n in (8, 12, 16, 20, 24):
        op = _op(n, omega=8.0)
        conds.append(np.linalg.cond(dense_H(op.medium, op.kernel)))
    log.info("cond(H) for n = 8..24: %s", conds)
    for a, b in zip(conds, conds[1:]):
        assert b / a <= 1.5
