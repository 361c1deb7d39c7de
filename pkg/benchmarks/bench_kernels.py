"""Benchmark the hot kernels: numba @njit loop path vs pure-numpy path.

Run:  python3 benchmarks/bench_kernels.py [--size N] [--repeats R]

The same comparison can be forced package-wide by setting CURVEDIM_NUMBA=0
(numpy fallback) before importing curvedim.
"""
import argparse
import time

import numpy as np

from curvedim import _kernels


def timeit(fn, args, repeats):
    fn(*args)  # warm up / JIT compile
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def make_blocks(rng, n):
    edges = np.sort(rng.uniform(0, 10, n + 1))
    w = rng.uniform(0.1, 1.0, n)
    cw = np.cumsum(w / w.sum())
    cw[-1] = 1.0
    return edges[:-1].copy(), edges[1:].copy(), cw


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=512)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()
    n = args.size
    rng = np.random.default_rng(0)

    print(f"numba available and enabled: {_kernels.NUMBA_ENABLED}")
    print(f"{'kernel':<22} {'numpy (ms)':>12} {'loop/njit (ms)':>15} {'speedup':>9}")

    jobs = []

    pts = np.sort(rng.uniform(0, 7, n))
    phi = rng.normal(size=n)
    jobs.append(("hopf_lax_1d", (pts, phi, 0.37, 7.0)))

    wa = rng.uniform(0.1, 1.0, n)
    wb = rng.uniform(0.1, 1.0, n)
    cwa = np.cumsum(wa / wa.sum()); cwa[-1] = 1.0
    cwb = np.cumsum(wb / wb.sum()); cwb[-1] = 1.0
    jobs.append(("merge_quantiles", (cwa, cwb)))

    alo, ahi, cwa2 = make_blocks(rng, n)
    blo, bhi, cwb2 = make_blocks(rng, n)
    L = 12.0
    blo_e = np.concatenate([blo - L, blo, blo + L])
    bhi_e = np.concatenate([bhi - L, bhi, bhi + L])
    cwb_e = np.concatenate([cwb2 - 1, cwb2, cwb2 + 1])
    shifts = np.linspace(-1, 1, 512)
    jobs.append(("scan_shift_costs",
                 (alo, ahi, cwa2, blo_e, bhi_e, cwb_e, shifts, -1.0)))

    for name, a in jobs:
        t_np = timeit(_kernels.numpy_impls[name], a, args.repeats)
        fast = getattr(_kernels, name)
        t_fast = timeit(fast, a, args.repeats)
        print(f"{name:<22} {t_np * 1e3:>12.3f} {t_fast * 1e3:>15.3f} "
              f"{t_np / t_fast:>8.1f}x")


if __name__ == "__main__":
    main()
