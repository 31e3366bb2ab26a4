"""Command-line front end.

Exit codes: 0 success, 1 an oracle check failed, 2 configuration error,
3 a solve did not converge.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import ConfigError, ExperimentConfig, load_config, validate
from .grid import GridError, MediumError
from .layers import LayerError

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_NOT_CONVERGED = 0, 1, 2, 3

log = logging.getLogger("sparsweep")


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="YAML or JSON experiment file")
    common.add_argument("--workers", type=int, metavar="K", help="concurrent incident waves")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--seed", type=int, metavar="S", help="seed for angle jitter and random media")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="sparsweep", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="two-level solves for every incident wave")
    sub.add_parser("scaling", parents=[common], help="offline/online cost over a size list")
    sub.add_parser("sparse-bench", parents=[common],
                   help="sparsified-system solves, both perturbation signs")
    sub.add_parser("oracle-check", parents=[common], help="small-grid cross-checks")
    sub.add_parser("print-config", parents=[common], help="print the effective configuration")
    return p


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.workers is not None:
        cfg.workers = args.workers
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.output.dir = args.out
    return validate(cfg)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "print-config":
        sys.stdout.write(cfg.dump())
        return EXIT_OK

    from . import bench

    out = cfg.output.dir
    try:
        if args.command == "solve":
            s = bench.run_solve(cfg, out)
            print(f"N={s['N']} omega={s['omega']:g} L={s['L']}: "
                  f"{s['avg_outer_iterations']:.2f} outer / {s['avg_inner_iterations']:.2f} inner "
                  f"iterations, {s['avg_seconds']:.3f} s per wave, offline {s['offline_seconds']:.3f} s")
            ok = s["all_converged"]
        elif args.command == "sparse-bench":
            rows = bench.run_sparse_bench(cfg, out)
            for r in rows:
                print(f"N={r['N']} omega={r['omega']:g} L={r['L']} {r['sign']} "
                      f"{r['preconditioner']}: {r['avg_iterations']:.2f} iterations, "
                      f"{r['avg_seconds']:.3f} s")
            ok = all(r["all_converged"] for r in rows)
        elif args.command == "scaling":
            rows, fits = bench.run_scaling(cfg, out)
            for r in rows:
                print(f"n={r['n']}: offline {r['offline_seconds']:.3f} s, online "
                      f"{r['online_seconds']:.3f} s, outer {r['avg_outer_iterations']:.2f}, "
                      f"inner {r['avg_inner_iterations']:.2f}")
            for f in fits:
                print(f"slope {f['quantity']}: {f['slope']:.3f}")
            ok = True
        else:
            from .checks import run_checks
            os.makedirs(out, exist_ok=True)
            results = run_checks()
            rows = []
            for r in results:
                print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.value:.3e} (tol {r.tol:.0e})")
                rows.append({"schema_version": bench.SCHEMA_VERSION, "check": r.name,
                             "value": r.value, "tol": r.tol, "passed": int(r.passed)})
            bench.write_csv(os.path.join(out, "oracle_check.csv"),
                            ["schema_version", "check", "value", "tol", "passed"], rows)
            return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK_FAILED
    except (GridError, MediumError, LayerError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if not ok:
        print("some solves did not converge", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
