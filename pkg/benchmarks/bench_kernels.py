"""Compiled kernels versus the numpy fallback.

    python3 benchmarks/bench_kernels.py [--n 256] [--repeats 5] [--csv out.csv]

Times the Hankel evaluation, the 9-point stencil product and the row
assembly on both backends, checks that they agree, and prints one line per
kernel (median of the repeats).
"""
import argparse
import csv
import statistics
import sys
import time

import numpy as np

from sparsweep import _core_py

try:
    from sparsweep import _core
except ImportError:
    _core = None


def _time(fn, repeats):
    out = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return statistics.median(out)


def cases(n, rng):
    x = np.geomspace(1e-3, 1e4, n * n)
    vals = rng.standard_normal((n, n, 9)) + 1j * rng.standard_normal((n, n, 9))
    f = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    classes = rng.integers(0, 9, size=(n, n)).astype(np.int64)
    alpha = rng.standard_normal((9, 9)) + 1j * rng.standard_normal((9, 9))
    coupling = rng.standard_normal((9, 9)) + 1j * rng.standard_normal((9, 9))
    m = rng.standard_normal((n, n)) + 0j
    return {
        "bessel01": (lambda mod: mod.bessel01(x)),
        "stencil_apply": (lambda mod: mod.stencil_apply(vals, f)),
        "assemble_rows": (lambda mod: mod.assemble_rows(classes, alpha, coupling, m, float(n) ** 2)),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=256, help="grid side (n*n points)")
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--csv", help="also write the table here")
    args = ap.parse_args(argv)
    if _core is None:
        print("compiled extension not built; only the fallback is available", file=sys.stderr)
        return 1
    rng = np.random.default_rng(0)
    rows = []
    for name, fn in cases(args.n, rng).items():
        a, b = fn(_core), fn(_core_py)
        a = a if isinstance(a, tuple) else (a,)
        b = b if isinstance(b, tuple) else (b,)
        diff = max(float(np.max(np.abs(p - q) / np.maximum(1.0, np.abs(q)))) for p, q in zip(a, b))
        tc = _time(lambda: fn(_core), args.repeats)
        tp = _time(lambda: fn(_core_py), args.repeats)
        rows.append({"kernel": name, "n": args.n, "compiled_s": tc, "fallback_s": tp,
                     "speedup": tp / tc, "max_rel_diff": diff})
        print(f"{name:14s} compiled {tc * 1e3:9.2f} ms  fallback {tp * 1e3:9.2f} ms  "
              f"speedup {tp / tc:6.1f}x  max diff {diff:.1e}")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
