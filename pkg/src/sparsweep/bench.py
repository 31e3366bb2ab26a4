"""Experiment runners behind the command-line interface.

All outputs are plain CSV.  Column lists are versioned; bump
``SCHEMA_VERSION`` whenever one of them changes.
"""
from __future__ import annotations

import csv
import logging
import math
import os
import statistics
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .config import ExperimentConfig
from .grid import incident_angles, incident_plane_wave, make_medium, unit_square_grid
from .solver import Setup, prepare

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1

WAVE_COLUMNS = ["schema_version", "wave", "angle", "outer_iterations", "inner_iterations",
                "converged", "final_residual", "true_residual", "seconds"]
SUMMARY_COLUMNS = ["schema_version", "N", "n", "omega", "L", "q", "waves",
                   "avg_outer_iterations", "avg_inner_iterations", "avg_seconds",
                   "offline_seconds", "all_converged"]
SPARSE_COLUMNS = ["schema_version", "N", "n", "omega", "L", "sign", "preconditioner",
                  "waves", "avg_iterations", "avg_seconds", "offline_seconds", "all_converged"]
SCALING_COLUMNS = ["schema_version", "N", "n", "omega", "L", "offline_seconds",
                   "online_seconds", "avg_outer_iterations", "avg_inner_iterations",
                   "factor_megabytes"]
FIT_COLUMNS = ["schema_version", "quantity", "slope", "points"]


def write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({c: _fmt(row[c]) for c in columns})


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return v


def dump_field(path, grid, u):
    """Row-major dump of a complex field: a header line, then ``i,j,re,im``."""
    U = np.asarray(u).reshape(grid.shape)
    with open(path, "w") as fh:
        fh.write(f"# nx={grid.nx} nz={grid.nz} omega={grid.omega:.17g} h={grid.h:.17g}\n")
        fh.write("i,j,re,im\n")
        for j in range(grid.nz):
            for i in range(grid.nx):
                v = U[j, i]
                fh.write(f"{i + 1},{j + 1},{v.real:.10e},{v.imag:.10e}\n")


def build_setup(cfg: ExperimentConfig, n: int | None = None, medium_spec=None) -> Setup:
    n = cfg.grid.n if n is None else n
    grid = unit_square_grid(n, cfg.omega_for(n), min_ppw=cfg.grid.min_ppw)
    medium = make_medium(medium_spec or cfg.medium_spec(), grid, cfg.medium.margin)
    p = cfg.partition
    return prepare(medium, L=p.L, q=p.q, shift_strength=p.shift_strength,
                   window_radius=cfg.sparsify.window_radius,
                   diag_rule=cfg.sparsify.diagonal_rule, local_solver=p.local_solver,
                   bidirectional=cfg.solver.bidirectional, L_vertical=p.L_vertical)


def wave_angles(cfg: ExperimentConfig, count: int | None = None):
    return incident_angles(count or cfg.waves.count, cfg.seed, cfg.waves.jitter)


def _map(fn, items, workers):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))   # results come back in input order


def solve_waves(setup: Setup, cfg: ExperimentConfig, angles, keep_fields=False):
    s = cfg.solver

    def one(item):
        k, angle = item
        t0 = time.perf_counter()
        u, rep = setup.scattered(angle, outer_tol=s.outer_tol, inner_tol=s.inner_tol,
                                 flexible=s.flexible, max_outer=s.max_outer,
                                 max_inner=s.max_inner)
        row = {"schema_version": SCHEMA_VERSION, "wave": k, "angle": float(angle),
               "outer_iterations": rep.iterations, "inner_iterations": rep.inner_iteration_total,
               "converged": int(rep.converged), "final_residual": rep.final_residual,
               "true_residual": rep.true_residual, "seconds": time.perf_counter() - t0}
        return row, (u if keep_fields else None)

    return _map(one, list(enumerate(angles)), cfg.workers)


def run_solve(cfg: ExperimentConfig, out_dir: str) -> dict:
    os.makedirs(out_dir, exist_ok=True)
    setup = build_setup(cfg)
    grid = setup.grid
    angles = wave_angles(cfg)
    results = solve_waves(setup, cfg, angles, keep_fields=cfg.output.dump_field)
    rows = [r for r, _ in results]
    write_csv(os.path.join(out_dir, "waves.csv"), WAVE_COLUMNS, rows)
    summary = {
        "schema_version": SCHEMA_VERSION, "N": grid.N, "n": grid.nx, "omega": grid.omega,
        "L": setup.partition_h.L, "q": setup.partition_h.q, "waves": len(rows),
        "avg_outer_iterations": statistics.fmean(r["outer_iterations"] for r in rows),
        "avg_inner_iterations": statistics.fmean(r["inner_iterations"] for r in rows),
        "avg_seconds": statistics.fmean(r["seconds"] for r in rows),
        "offline_seconds": setup.offline_seconds,
        "all_converged": int(all(r["converged"] for r in rows)),
    }
    write_csv(os.path.join(out_dir, "summary.csv"), SUMMARY_COLUMNS, [summary])
    if cfg.output.dump_field:
        u_s = results[0][1]
        total = u_s + incident_plane_wave(grid, angles[0])
        dump_field(os.path.join(out_dir, "total_field.csv"), grid, total)
    if cfg.output.export_matrix:
        setup.C.export(os.path.join(out_dir, "C_triplets.txt"))
    return summary


def run_sparse_bench(cfg: ExperimentConfig, out_dir: str, signs=(1.0, -1.0),
                     preconditioners=("bidirectional", "sweep")) -> list[dict]:
    """Standalone solves of the sparsified system, ``C u = A f`` for each wave."""
    os.makedirs(out_dir, exist_ok=True)
    rows = []
    angles = wave_angles(cfg)
    for sign in signs:
        spec = cfg.medium_spec()
        if "amplitude" in spec:
            spec["amplitude"] = sign * abs(float(spec["amplitude"]))
        elif "inner_amplitude" in spec:
            spec["inner_amplitude"] = sign * abs(float(spec["inner_amplitude"]))
        setup = build_setup(cfg, medium_spec=spec)
        rhs = [setup.A.matvec(setup.op.rhs(incident_plane_wave(setup.grid, a))) for a in angles]
        for name in preconditioners:
            if name == "bidirectional" and setup.vertical is None:
                continue

            def one(g):
                t0 = time.perf_counter()
                _, rep = setup.solve_sparse(g, cfg.solver.sparse_tol, cfg.solver.max_inner, name)
                return rep.iterations, time.perf_counter() - t0, rep.converged

            res = _map(one, rhs, cfg.workers)
            rows.append({
                "schema_version": SCHEMA_VERSION, "N": setup.grid.N, "n": setup.grid.nx,
                "omega": setup.grid.omega, "L": setup.partition_h.L,
                "sign": "+" if sign > 0 else "-", "preconditioner": name, "waves": len(res),
                "avg_iterations": statistics.fmean(r[0] for r in res),
                "avg_seconds": statistics.fmean(r[1] for r in res),
                "offline_seconds": setup.offline_seconds,
                "all_converged": int(all(r[2] for r in res)),
            })
            log.info("sparse-bench %s %s: %.2f iterations", rows[-1]["sign"], name,
                     rows[-1]["avg_iterations"])
    write_csv(os.path.join(out_dir, "sparse_bench.csv"), SPARSE_COLUMNS, rows)
    return rows


def loglog_slope(x, y) -> float:
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    return float(np.polyfit(lx, ly, 1)[0])


def run_scaling(cfg: ExperimentConfig, out_dir: str) -> tuple[list[dict], list[dict]]:
    """Offline and online cost over ``scaling.sizes`` at fixed omega h."""
    os.makedirs(out_dir, exist_ok=True)
    rows = []
    angles = wave_angles(cfg, cfg.scaling.waves)
    for n in cfg.scaling.sizes:
        t0 = time.perf_counter()
        setup = build_setup(cfg, n)
        offline = time.perf_counter() - t0
        online, outer, inner = [], [], []
        for _ in range(cfg.scaling.repeats):
            res = solve_waves(setup, cfg, angles)
            online.append(statistics.fmean(r["seconds"] for r, _ in res))
            outer = [r["outer_iterations"] for r, _ in res]
            inner = [r["inner_iterations"] for r, _ in res]
        rows.append({
            "schema_version": SCHEMA_VERSION, "N": setup.grid.N, "n": n,
            "omega": setup.grid.omega, "L": setup.partition_h.L, "offline_seconds": offline,
            "online_seconds": statistics.median(online),
            "avg_outer_iterations": statistics.fmean(outer),
            "avg_inner_iterations": statistics.fmean(inner),
            "factor_megabytes": setup.factor_bytes() / 1e6,
        })
        log.info("scaling n=%d: offline %.3fs online %.3fs", n, offline, rows[-1]["online_seconds"])
        del setup
    fits = []
    if len(rows) >= 2:
        N = [r["N"] for r in rows]
        for q in ("offline_seconds", "online_seconds"):
            fits.append({"schema_version": SCHEMA_VERSION, "quantity": q,
                         "slope": loglog_slope(N, [r[q] for r in rows]), "points": len(rows)})
    write_csv(os.path.join(out_dir, "scaling.csv"), SCALING_COLUMNS, rows)
    write_csv(os.path.join(out_dir, "scaling_fit.csv"), FIT_COLUMNS, fits)
    return rows, fits


def iteration_spread(values) -> float:
    return max(values) - min(values) if values else math.nan
