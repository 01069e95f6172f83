"""Compare the compiled and pure-numpy elliptic kernels.

Run ``python3 benchmarks/bench_kernels.py [--sizes 64 1024 200000] [--repeat 5]``.  Both
backends are called directly (independent of ``ISOMARTIN_NUMBA``) on the same
random complex arguments; the table reports the best wall time per array
size and the largest relative disagreement.  Small sizes match the contour
quadrature, which calls the kernels on a few hundred nodes at a time.
"""
import argparse
import time

import numpy as np

from isomartin import _kernels
from isomartin._accel import HAVE_NUMBA
from isomartin import elliptic as el


def _best(fn, args, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def _rel(a, b):
    a = np.concatenate([np.ravel(x) for x in (a if isinstance(a, tuple) else (a,))])
    b = np.concatenate([np.ravel(x) for x in (b if isinstance(b, tuple) else (b,))])
    ok = np.isfinite(a) & np.isfinite(b)
    return float(np.max(np.abs(a[ok] - b[ok]) / np.maximum(1.0, np.abs(b[ok]))))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[64, 1024, 16384, 200_000])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--k", type=float, default=0.6)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    ctx = el.make_context(args.k)
    rng = np.random.default_rng(args.seed)
    kargs = el._kargs(ctx)
    alphas = ctx.to_elliptic(np.array([-np.pi / 3, 0.0, np.pi / 3]))
    powers = np.array([3, -2, 5], dtype=np.int64)
    if not HAVE_NUMBA:
        print("numba unavailable; both columns run the numpy code")
    # compile once before timing
    z = np.zeros(4)
    for slot, extra in ((0, ()), (1, ()), (2, (alphas, powers))):
        _kernels.KERNELS["numba"][slot](z, z, *extra, *kargs)
    print(f"k = {args.k}, best of {args.repeat}")
    print(f"{'kernel':<8} {'n':>8} {'numba [s]':>11} {'numpy [s]':>11} {'speedup':>8} {'max rel diff':>13}")
    for n in args.sizes:
        reps = max(args.repeat, int(2e5 // n))
        ur = rng.uniform(-4 * ctx.K, 4 * ctx.K, n)
        ui = rng.uniform(-2 * ctx.K_prime, 2 * ctx.K_prime, n)
        for name, slot, extra in (("jacobi", 0, ()), ("sc", 1, ()), ("expo", 2, (alphas, powers))):
            fargs = (ur, ui) + extra + kargs
            tf, of = _best(_kernels.KERNELS["numba"][slot], fargs, reps)
            ts, os_ = _best(_kernels.KERNELS["numpy"][slot], fargs, reps)
            print(f"{name:<8} {n:>8} {tf:>11.2e} {ts:>11.2e} {ts / tf:>8.1f} {_rel(of, os_):>13.2e}")

if __name__ == "__main__":
    main()
