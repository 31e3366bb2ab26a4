"""GMRES and the two-level solve (outer GMRES on H, inner GMRES on C)."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

log = logging.getLogger(__name__)

BREAKDOWN_TOL = 1e-14
DEFAULT_RESTART = 200


class KrylovError(FloatingPointError):
    pass


@dataclass
class SolveReport:
    iterations: int = 0
    residual_history: list = field(default_factory=list)   # preconditioned, relative; entry 0 is the start
    wall_time: float = 0.0
    converged: bool = False
    inner_iteration_total: int = 0
    true_residual: float = float("nan")                     # ||b - A x|| / ||b||
    breakdown: bool = False
    counters: dict = field(default_factory=dict)

    @property
    def final_residual(self):
        return self.residual_history[-1] if self.residual_history else float("nan")


def _check_finite(v, what):
    if not np.all(np.isfinite(v)):
        raise KrylovError(f"non-finite values in {what}; the operator or preconditioner "
                          "produced NaN/Inf")


def _givens(a, b):
    if b == 0:
        return 1.0, 0.0
    if a == 0:
        return 0.0, b.conjugate() / abs(b)
    r = np.hypot(abs(a), abs(b))
    c = abs(a) / r
    s = (a / abs(a)) * b.conjugate() / r
    return c, s


def gmres(apply: Callable, b, precond: Callable | None = None, tol: float = 1e-6,
          max_iter: int = 500, flexible: bool = False, restart: int | None = DEFAULT_RESTART,
          x0=None, callback: Callable | None = None):
    """Solve ``apply(x) = b``.

    ``flexible=False``: left preconditioning, Arnoldi on ``M A``; the history
    holds ``||M r|| / ||M b||``.  ``flexible=True``: right preconditioning with
    the preconditioned directions stored, so ``precond`` may change between
    iterations; the history is then the true relative residual.
    Returns ``(x, SolveReport)``.
    """
    if not 0 < tol < 1:
        raise ValueError("tol must lie in (0, 1)")
    t0 = time.perf_counter()
    b = np.asarray(b, dtype=complex)
    shape = b.shape
    b = b.ravel()
    _check_finite(b, "right-hand side")
    M = precond if precond is not None else (lambda v: v)
    Mf = lambda v: np.asarray(M(v.reshape(shape)), dtype=complex).ravel()
    Af = lambda v: np.asarray(apply(v.reshape(shape)), dtype=complex).ravel()
    report = SolveReport()
    n_apply = n_prec = 0

    x = np.zeros_like(b) if x0 is None else np.asarray(x0, dtype=complex).ravel().copy()
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        report.residual_history = [0.0]
        report.converged = True
        report.true_residual = 0.0
        report.wall_time = time.perf_counter() - t0
        report.counters = {"apply": 0, "precond": 0}
        return np.zeros(shape, dtype=complex), report

    if flexible:
        scale = bnorm
    else:
        Mb = Mf(b)
        n_prec += 1
        scale = np.linalg.norm(Mb)
        if scale == 0.0:
            raise KrylovError("preconditioner maps the right-hand side to zero")
    m_restart = max_iter if not restart else min(restart, max_iter)

    total = 0
    history = []
    while True:
        r = b - Af(x) if (x0 is not None or total > 0) else b.copy()
        if x0 is not None or total > 0:
            n_apply += 1
        if not flexible:
            r = Mf(r)
            n_prec += 1
        beta = np.linalg.norm(r)
        _check_finite(beta, "initial residual")
        if not history:
            history.append(beta / scale)
        if beta / scale <= tol or total >= max_iter:
            break
        m = min(m_restart, max_iter - total)
        V = np.zeros((m + 1, b.size), dtype=complex)
        Z = np.zeros((m, b.size), dtype=complex) if flexible else None
        H = np.zeros((m + 1, m), dtype=complex)
        cs = np.zeros(m)
        sn = np.zeros(m, dtype=complex)
        g = np.zeros(m + 1, dtype=complex)
        g[0] = beta
        V[0] = r / beta
        k = 0
        done = False
        for j in range(m):
            if flexible:
                Z[j] = Mf(V[j])
                n_prec += 1
                w = Af(Z[j])
                n_apply += 1
            else:
                w = Mf(Af(V[j]))
                n_apply += 1
                n_prec += 1
            w = np.array(w, dtype=complex)   # apply may hand back a view of V[j]
            _check_finite(w, f"Krylov vector {total + j + 1}")
            wnorm0 = np.linalg.norm(w)
            # classical Gram-Schmidt, applied twice
            for _ in range(2):
                hcol = V[:j + 1].conj() @ w
                w -= hcol @ V[:j + 1]
                H[:j + 1, j] += hcol
            hn = np.linalg.norm(w)
            H[j + 1, j] = hn
            for i in range(j):
                t = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
                H[i + 1, j] = -sn[i].conjugate() * H[i, j] + cs[i] * H[i + 1, j]
                H[i, j] = t
            cs[j], sn[j] = _givens(H[j, j], H[j + 1, j])
            H[j, j] = cs[j] * H[j, j] + sn[j] * H[j + 1, j]
            H[j + 1, j] = 0.0
            g[j + 1] = -sn[j].conjugate() * g[j]
            g[j] = cs[j] * g[j]
            k = j + 1
            res = abs(g[j + 1]) / scale
            history.append(res)
            if callback is not None:
                callback(res)
            breakdown = hn <= BREAKDOWN_TOL * max(wnorm0, 1.0)
            if res <= tol or breakdown:
                report.breakdown = bool(breakdown and res > tol)
                done = True
                break
            V[j + 1] = w / hn
        y = np.linalg.solve(np.triu(H[:k, :k]), g[:k]) if k else np.zeros(0)
        if flexible:
            x = x + y @ Z[:k]
        else:
            x = x + y @ V[:k]
        total += k
        if done or total >= max_iter:
            break

    true_r = np.linalg.norm(b - Af(x)) / bnorm
    n_apply += 1
    report.iterations = total
    report.residual_history = [float(h) for h in history]
    report.converged = report.residual_history[-1] <= tol
    report.true_residual = float(true_r)
    report.wall_time = time.perf_counter() - t0
    report.counters = {"apply": n_apply, "precond": n_prec}
    if report.breakdown:
        log.warning("GMRES breakdown after %d iterations (residual %.3e)", total, history[-1])
    return x.reshape(shape), report


def solve_sparsified(C, precond: Callable | None, g, tol: float = 1e-6, max_iter: int = 200,
                     flexible: bool = False):
    """GMRES on the sparsified system ``C u = g`` with the sweeping preconditioner."""
    return gmres(C.matvec, g, precond, tol=tol, max_iter=max_iter, flexible=flexible)


class _InnerSolver:
    """``r -> C^{-1} A r`` approximated by a preconditioned inner GMRES."""

    def __init__(self, A, C, precond, tol, max_iter):
        self.A, self.C, self.precond = A, C, precond
        self.tol, self.max_iter = tol, max_iter
        self.iterations = 0
        self.calls = 0
        self.unconverged = 0

    def __call__(self, r):
        u, rep = solve_sparsified(self.C, self.precond, self.A.matvec(r), self.tol, self.max_iter)
        self.iterations += rep.iterations
        self.calls += 1
        self.unconverged += not rep.converged
        return u


def solve_ls(op, A, C, precond, f, outer_tol: float = 1e-10, inner_tol: float = 1e-3,
             flexible: bool = True, max_outer: int = 200, max_inner: int = 200):
    """Two-level solve of ``H u = f``: outer GMRES on ``op.apply``, each
    preconditioner application an inner GMRES solve of ``C u = A r``.

    ``A`` is the stencil operator, ``C`` the sparsified system and ``precond``
    the sweeping preconditioner of ``C``.
    """
    inner = _InnerSolver(A, C, precond, inner_tol, max_inner)
    n_h = [0]

    def apply_h(u):
        n_h[0] += 1
        return op.apply(u)

    solves_before = getattr(precond, "local_solves", 0) if precond is not None else 0
    u, rep = gmres(apply_h, f, inner, tol=outer_tol, max_iter=max_outer, flexible=flexible)
    rep.inner_iteration_total = inner.iterations
    rep.counters.update({
        "apply_H": n_h[0],
        "inner_solves": inner.calls,
        "inner_unconverged": inner.unconverged,
        "local_solves": (getattr(precond, "local_solves", 0) - solves_before) if precond else 0,
    })
    if inner.unconverged:
        log.warning("%d inner solves did not reach tol %.1e", inner.unconverged, inner_tol)
    return u, rep
