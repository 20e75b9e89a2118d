"""Time the numba and numpy kernel backends on representative workloads.

    python benchmarks/bench_kernels.py [--repeat N]

Each workload is run once to warm the JIT cache, then timed; outputs of the
two backends are compared bit for bit.
"""

import argparse
import time

import numpy as np

from fitzlab.kernels import available_backends
from fitzlab.numerics import BoxGrid


def _workloads(rng):
    g2 = BoxGrid(2, 2.0, 41)
    P = np.ascontiguousarray(g2.nodes())
    f = 0.5 * (P**2).sum(axis=1) + rng.uniform(0, 0.1, P.shape[0])
    A = -np.ascontiguousarray(np.add.outer(np.linspace(-2, 2, 201) ** 2, np.zeros(1)).T.repeat(201, axis=0))
    ax = np.linspace(-2, 2, 201)
    X = np.ascontiguousarray(rng.uniform(-2, 2, (600, 2)))
    Xs = np.ascontiguousarray(X + rng.normal(0, 0.1, X.shape))
    Q = np.ascontiguousarray(rng.uniform(-2, 2, (4000, 2)))
    Qs = np.ascontiguousarray(rng.uniform(-2, 2, (4000, 2)))
    line = np.ascontiguousarray(np.linspace(-2.5, 2.5, 51)[:, None])
    W = np.ascontiguousarray(np.linspace(-3, 3, 61)[:, None])
    return {
        "conjugate_brute 1681x1681": ("conjugate_brute", (P, f, P)),
        "legendre_axis 201x201x201": ("legendre_axis", (A, ax, ax)),
        "monotone_scan n=600": ("monotone_scan", (X, Xs, 1e-12)),
        "related_scan 4000x600": ("related_scan", (Q, Qs, X, Xs)),
        "fitzpatrick_eval 4000x600": ("fitzpatrick_eval", (Q, Qs, X, Xs)),
        "ni_eval 4000x600": ("ni_eval", (Q, Qs, X, Xs)),
        "range_hits 61 probes": ("range_hits", (W, line, line.copy(), 1.0, 0.05, 0.1, 5.6, 113, 1)),
        "subgradient_scan 441x441": ("subgradient_scan", (P[::4].copy(), f[::4].copy(), P[::4].copy())),
    }


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = available_backends()
    rng = np.random.default_rng(0)
    work = _workloads(rng)
    print(f"{'workload':32s}" + "".join(f"{b:>12s}" for b in backends) + "   speedup  identical")
    for label, (fn, argv) in work.items():
        times, outs = {}, {}
        for name, mod in backends.items():
            kern = getattr(mod, fn)
            outs[name] = kern(*argv)  # warm-up / compile
            best = np.inf
            for _ in range(args.repeat):
                t0 = time.perf_counter()
                kern(*argv)
                best = min(best, time.perf_counter() - t0)
            times[name] = best
        row = f"{label:32s}" + "".join(f"{times[b] * 1e3:10.2f}ms" for b in backends)
        if "numba" in times:
            row += f"  {times['numpy'] / times['numba']:7.1f}x  {_same(outs['numpy'], outs['numba'])!s:>9s}"
        print(row)


if __name__ == "__main__":
    main()
