"""Time the compiled Jacobi kernel against the NumPy fallback.

    python3 benchmarks/bench_jacobi.py --size 256 --iters 200
"""
import argparse
import time

import numpy as np

from matteforge import _backend, _jacobi_py
from matteforge.fgrefine import coupling_weights


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=256)
    ap.add_argument("--iters", type=int, default=200)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--threads", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    n = args.size
    alpha = rng.random((n, n))
    f0 = rng.random((n, n, 3))
    data = alpha[..., None] * (alpha[..., None] * f0)
    w, den = coupling_weights(alpha, 1.0)

    t_py, ref = best_of(lambda: _jacobi_py.jacobi_iterate(f0, data, w, den, args.iters), args.repeats)
    print(f"numpy    {t_py:8.3f} s  ({n}x{n}, {args.iters} sweeps)")
    if _backend.BACKEND != "cython":
        print("compiled kernel unavailable; build with `pip install -e . --no-build-isolation`")
        return
    from matteforge import _jacobi

    t_cy, out = best_of(lambda: _jacobi.jacobi_iterate(f0, data, w, den, args.iters, args.threads), args.repeats)
    print(f"cython   {t_cy:8.3f} s  speedup {t_py / t_cy:5.1f}x  identical={np.array_equal(out, ref)}")


if __name__ == "__main__":
    main()
