"""Time the numba kernels against their numpy twins.

    python benchmarks/bench_kernels.py [--repeat 5] [--quick]

Each kernel runs once untimed first, so JIT compilation is excluded.
The table shows the best of ``--repeat`` runs and the max abs difference
between the two backends' outputs.
"""

import argparse
import time

import numpy as np

from firmmono.kernels import numba_backend, numpy_backend


def _cases(quick):
    rng = np.random.default_rng(0)
    n_pairs = 600 if quick else 2000
    X, U = rng.standard_normal((n_pairs, 2)), rng.standard_normal((n_pairs, 2))
    cyc = rng.standard_normal((2000 if quick else 20000, 5, 2))
    P, V = rng.standard_normal((64, 2)), rng.standard_normal((64, 2))
    Z, W = rng.standard_normal((2000 if quick else 20000, 2)), rng.standard_normal((2000 if quick else 20000, 2))
    d = 100
    G = np.diag((np.arange(1, d + 1) / np.arange(2, d + 2)) ** 2)
    return [
        (f"pair_stats n={n_pairs}", "pair_stats", (X, U)),
        (f"cyclic_sums m={cyc.shape[0]} n=5", "cyclic_sums", (cyc, 0.5 * cyc)),
        (f"min_cross_inner 64x{Z.shape[0]}", "min_cross_inner", (P, V, Z, W)),
        (f"power_iteration d={d}", "power_iteration", (G, 10_000, 1e-12, 16)),
    ]


def _best(fn, args, repeat):
    out = fn(*args)
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def _maxdiff(a, b):
    if isinstance(a, tuple):
        return max(_maxdiff(x, y) for x, y in zip(a, b))
    return float(np.max(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--quick", action="store_true", help="smaller inputs")
    args = p.parse_args(argv)
    if numba_backend is None:
        raise SystemExit("numba is not installed; nothing to compare")
    rows = []
    for label, name, inputs in _cases(args.quick):
        t_np, o_np = _best(getattr(numpy_backend, name), inputs, args.repeat)
        t_nb, o_nb = _best(getattr(numba_backend, name), inputs, args.repeat)
        rows.append((label, t_np, t_nb, t_np / t_nb, _maxdiff(o_np, o_nb)))
    print(f"{'kernel':<32}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}{'max |diff|':>13}")
    for label, t_np, t_nb, sp, diff in rows:
        print(f"{label:<32}{1e3 * t_np:>12.2f}{1e3 * t_nb:>12.2f}{sp:>9.1f}x{diff:>13.2e}")
    return rows


if __name__ == "__main__":
    main()
