import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from sparsweep.checks import check_two_level
from sparsweep.grid import incident_plane_wave, make_medium, unit_square_grid
from sparsweep.krylov import KrylovError, gmres, solve_ls
from sparsweep.solver import prepare

from conftest import bump_setup, random_field, rel


@pytest.mark.parametrize("flexible", [False, True])
def test_identity_one_iteration(rng, flexible):
    b = random_field(rng, 30)
    x, rep = gmres(lambda v: v, b, flexible=flexible)
    assert rep.iterations == 1 and rep.converged
    assert np.allclose(x, b, rtol=1e-14, atol=0)


def _dense_problem(seed, n=20):
    r = np.random.default_rng(seed)
    A = np.eye(n) * 4 + r.standard_normal((n, n)) + 1j * r.standard_normal((n, n))
    return A, r.standard_normal(n) + 1j * r.standard_normal(n)


@pytest.mark.parametrize("flexible", [False, True])
def test_dense_system(flexible):
    A, b = _dense_problem(0)
    x, rep = gmres(lambda v: A @ v, b, tol=1e-10, flexible=flexible)
    assert rep.converged and rep.final_residual <= 1e-10
    assert rel(A @ x, b) <= 1e-10
    assert rel(x, scipy.linalg.solve(A, b)) <= 1e-10 * np.linalg.cond(A)


def test_left_preconditioned_history_and_true_residual():
    A, b = _dense_problem(1)
    M = np.linalg.inv(np.diag(np.diag(A)))
    x, rep = gmres(lambda v: A @ v, b, lambda v: M @ v, tol=1e-9)
    assert rep.converged and rep.residual_history[-1] <= 1e-9
    assert rep.true_residual == pytest.approx(rel(A @ x, b), rel=1e-6)


@given(st.integers(0, 10_000), st.booleans())
@settings(max_examples=40, deadline=None)
def test_history_non_increasing(seed, flexible):
    A, b = _dense_problem(seed, 15)
    _, rep = gmres(lambda v: A @ v, b, tol=1e-12, flexible=flexible, restart=None)
    h = np.array(rep.residual_history)
    assert np.all(np.diff(h) <= 1e-12 * h[0])
    assert len(h) == rep.iterations + 1


def test_zero_rhs():
    x, rep = gmres(lambda v: v * 2, np.zeros(5))
    assert rep.iterations == 0 and rep.converged and not np.any(x)


def test_nan_detected():
    with pytest.raises(KrylovError):
        gmres(lambda v: v * np.nan, np.ones(4))
    with pytest.raises(KrylovError):
        gmres(lambda v: v, np.array([1.0, np.nan]))


def test_bad_tolerance():
    with pytest.raises(ValueError):
        gmres(lambda v: v, np.ones(3), tol=0.0)


def test_breakdown_on_invariant_subspace():
    A = np.diag([1.0, 2.0, 3.0, 4.0]).astype(complex)
    b = np.array([1.0, 1.0, 0, 0], dtype=complex)
    x, rep = gmres(lambda v: A @ v, b, tol=1e-14)
    assert rep.iterations == 2
    assert rel(A @ x, b) <= 1e-13


def test_max_iter_reports_unconverged():
    A, b = _dense_problem(3, 30)
    _, rep = gmres(lambda v: A @ v, b, tol=1e-12, max_iter=3)
    assert not rep.converged and rep.iterations == 3


def test_restart_still_converges():
    A, b = _dense_problem(4, 25)
    A += 6 * np.eye(25)
    x, rep = gmres(lambda v: A @ v, b, tol=1e-10, restart=5, max_iter=400)
    assert rep.converged and rel(A @ x, b) <= 1e-9


def test_flexible_accepts_varying_preconditioner():
    A, b = _dense_problem(5)
    d = np.diag(A)
    k = [0]

    def M(v):
        k[0] += 1
        return v / d * (1 + 0.1 * np.sin(k[0]))

    x, rep = gmres(lambda v: A @ v, b, M, tol=1e-10, flexible=True)
    assert rep.converged and rel(A @ x, b) <= 1e-10


@pytest.fixture(scope="module")
def setup32():
    return bump_setup(32, 0.3, L=2)


def test_sparsified_recovers_x(setup32, rng):
    S = setup32
    x = random_field(rng, S.grid.N)
    u, rep = S.solve_sparse(S.C.matvec(x), tol=1e-10)
    assert rep.converged and rel(u, x) <= 1e-7


def test_looser_tolerance_fewer_iterations(setup32, rng):
    g = random_field(rng, setup32.grid.N)
    loose = setup32.solve_sparse(g, tol=1e-3)[1].iterations
    tight = setup32.solve_sparse(g, tol=1e-6)[1].iterations
    assert loose <= tight


def test_two_level_matches_dense():
    r = check_two_level()
    assert r.passed, r


def test_two_level_left_preconditioned(setup32):
    S = setup32
    f = S.op.rhs(incident_plane_wave(S.grid, 1.1))
    u, rep = S.solve(f, flexible=False)
    # left preconditioning converges on the preconditioned residual
    assert rep.converged and rep.final_residual <= 1e-10
    assert rel(S.op.apply(u), f) <= 1e-6
    assert rep.true_residual == pytest.approx(rel(S.op.apply(u), f), rel=1e-6)


def test_zero_medium_zero_iterations():
    g = unit_square_grid(32, 32.0)
    S = prepare(make_medium({"kind": "zero"}, g), L=2)
    f = S.op.rhs(incident_plane_wave(g, 0.4))
    u, rep = S.solve(f)
    assert rep.iterations == 0 and not np.any(u)
    assert rep.counters["apply_H"] == 0 and rep.counters["inner_solves"] == 0


def test_counters_one_H_and_one_inner_solve_per_iteration(setup32):
    S = setup32
    f = S.op.rhs(incident_plane_wave(S.grid, 0.2))
    _, rep = S.solve(f)
    c = rep.counters
    assert c["inner_solves"] == rep.iterations
    assert c["apply_H"] == rep.iterations + 1     # the last one is the true-residual check
    assert c["local_solves"] > 0 and rep.inner_iteration_total >= rep.iterations


def test_deterministic(setup32):
    f = setup32.op.rhs(incident_plane_wave(setup32.grid, 2.0))
    a = setup32.solve(f)
    b = setup32.solve(f)
    assert a[1].residual_history == b[1].residual_history
    assert np.array_equal(a[0], b[0])


def test_nonconvergence_flagged(setup32):
    f = setup32.op.rhs(incident_plane_wave(setup32.grid, 2.0))
    u, rep = solve_ls(setup32.op, setup32.A, setup32.C, None, f, max_outer=1, max_inner=1)
    assert not rep.converged and np.all(np.isfinite(u))
