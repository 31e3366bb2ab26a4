"""Small-grid cross-checks against independent references (dense algebra,
direct sparse solves, scipy special functions and adaptive quadrature)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.integrate
import scipy.special

from .grid import incident_plane_wave, make_medium, unit_square_grid
from .kernel import build_kernel, diagonal_weight
from .oracle import dense_H, dense_oracle_solve, sparse_oracle_solve
from .solver import prepare
from .sparsify import assemble_C, compute_stencils, stencil_operator, target_matrix
from .special import bessel_jy
from .sweep import grf_solve


@dataclass
class CheckResult:
    name: str
    value: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tol)


def _rel(a, b):
    return float(np.linalg.norm(np.ravel(a - b)) / np.linalg.norm(np.ravel(b)))


def check_hankel():
    x = np.concatenate([np.linspace(0.01, 8, 200), np.linspace(8, 30, 200), np.geomspace(30, 1e4, 50)])
    j0, y0, j1, y1 = bessel_jy(x)
    ref = [scipy.special.j0(x), scipy.special.y0(x), scipy.special.j1(x), scipy.special.y1(x)]
    err = max(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b))) for a, b in zip((j0, y0, j1, y1), ref))
    return CheckResult("hankel_vs_scipy", float(err), 1e-12)


def check_cell_weight(h=1 / 64, omega=4.0):
    def integrand(r, t):
        return r * scipy.special.hankel1(0, omega * r)

    # polar coordinates over one of the eight triangles of the cell
    re = scipy.integrate.dblquad(lambda r, t: integrand(r, t).real, 0, np.pi / 4,
                                 0, lambda t: 0.5 * h / np.cos(t), epsabs=1e-16)[0]
    im = scipy.integrate.dblquad(lambda r, t: integrand(r, t).imag, 0, np.pi / 4,
                                 0, lambda t: 0.5 * h / np.cos(t), epsabs=1e-16)[0]
    ref = -0.25j * 8 * (re + 1j * im)
    w = diagonal_weight(h, omega, "cell")
    return CheckResult("cell_weight_vs_quadrature", abs(w / ref - 1), 1e-3)


def check_convolution(n=12, trials=20, seed=0):
    rng = np.random.default_rng(seed)
    g = unit_square_grid(n, float(n))
    K = build_kernel(g)
    idx = np.arange(g.N)
    G = K.submatrix(idx, idx)
    err = 0.0
    for _ in range(trials):
        f = rng.standard_normal(g.N) + 1j * rng.standard_normal(g.N)
        err = max(err, _rel(K.convolve(f), G @ f))
    return CheckResult("fft_vs_dense_convolution", err, 1e-12)


def check_apply_H(n=8, seed=0):
    rng = np.random.default_rng(seed)
    g = unit_square_grid(n, float(n))
    med = make_medium({"kind": "smooth_bump", "amplitude": 0.3}, g)
    S = prepare(med, L=1, bidirectional=False)
    u = rng.standard_normal(g.N) + 1j * rng.standard_normal(g.N)
    return CheckResult("apply_H_vs_dense", _rel(S.op.apply(u), dense_H(med, S.kernel) @ u), 1e-12)


def check_sparsifier(n=10):
    g = unit_square_grid(n, float(n))
    med = make_medium({"kind": "smooth_bump", "amplitude": 0.3}, g)
    K = build_kernel(g)
    st = compute_stencils(g, K)
    A = stencil_operator(st, g).to_dense()
    AH = A @ dense_H(med, K)
    C = assemble_C(st, med, K).to_dense()
    mask = A != 0
    err = float(np.max(np.abs(AH - C)[mask]) / np.max(np.abs(AH[mask])))
    err = max(err, float(np.max(np.abs(C[~mask]))))
    return CheckResult("C_vs_pattern_restricted_AH", err, 1e-12)


def check_stencil_residual(n=10):
    g = unit_square_grid(n, float(n))
    K = build_kernel(g)
    st = compute_stencils(g, K)
    err = 0.0
    for name, s in st.classes.items():
        _, M = target_matrix(name, K, st.window_radius)
        sigma = np.linalg.svd(M, compute_uv=False)[-1]
        err = max(err, abs(s.residual - sigma), abs(np.linalg.norm(s.alpha @ M) - sigma))
    return CheckResult("stencil_residual_vs_svd", err, 1e-10)


def check_grf(n=32, L=2, seed=0):
    rng = np.random.default_rng(seed)
    g = unit_square_grid(n, float(n))
    err = 0.0
    for amp in (0.3, -0.3):
        S = prepare(make_medium({"kind": "smooth_bump", "amplitude": amp}, g), L=L, q=4,
                    bidirectional=False)
        rhs = rng.standard_normal(g.N) + 1j * rng.standard_normal(g.N)
        v = sparse_oracle_solve(S.C, rhs).reshape(g.shape)
        G = rhs.reshape(g.shape)
        for s in S.systems_h:
            below = (v[s.lo - 1], v[s.lo]) if s.has_below else None
            above = (v[s.hi], v[s.hi + 1]) if s.has_above else None
            w = grf_solve(s, G, below, above)
            err = max(err, _rel(w[s.a:s.b + 1], v[s.lo:s.hi + 1]))
    return CheckResult("grf_exact_traces", err, 1e-10)


def check_two_level(n=32, omega=10.0, angle=0.4):
    g = unit_square_grid(n, omega)
    err = 0.0
    for amp in (0.3, -0.3):
        med = make_medium({"kind": "smooth_bump", "amplitude": amp}, g)
        S = prepare(med)
        f = S.op.rhs(incident_plane_wave(g, angle))
        u, _ = S.solve(f, outer_tol=1e-10, inner_tol=1e-3)
        err = max(err, _rel(u, dense_oracle_solve(med, S.kernel, f)))
    return CheckResult("solve_ls_vs_dense", err, 1e-8)


ALL_CHECKS = (check_hankel, check_cell_weight, check_convolution, check_apply_H,
              check_sparsifier, check_stencil_residual, check_grf, check_two_level)


def run_checks(checks=ALL_CHECKS) -> list[CheckResult]:
    return [c() for c in checks]
