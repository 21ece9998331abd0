"""Benchmark the compiled product-mixing kernel against the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [repeats]
"""

import sys
import time

import numpy as np

from qkdlink.kernels import KERNEL_BACKEND, product_mix, product_mix_numpy
from qkdlink.pdte import GRID_SIZE, LOG10_MIN, _DLOG, _LOG_EDGES


def make_inputs(n_a: int, n_b: int, seed: int = 7):
    rng = np.random.default_rng(seed)
    log_a = np.sort(rng.uniform(LOG10_MIN, 0.0, n_a))
    p_a = rng.random(n_a)
    p_a /= p_a.sum()
    log_b = np.sort(rng.uniform(-2.0, 0.0, n_b))
    p_b = rng.random(n_b)
    p_b /= p_b.sum()
    return log_a, p_a, log_b, p_b


def bench(fn, args, repeats: int) -> float:
    fn(*args)  # warm up
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - t0) / repeats


def main() -> None:
    repeats = int(sys.argv[1]) if len(sys.argv) > 1 else 50
    shift = -0.3
    lo = float(_LOG_EDGES[0] + 0.5 * _DLOG)
    print(f"selected backend: {KERNEL_BACKEND}")
    for n_a, n_b in [(2048, 257), (2048, 1024), (4096, 4096)]:
        log_a, p_a, log_b, p_b = make_inputs(n_a, n_b)
        args = (log_a, p_a, log_b, p_b, shift, lo, float(_DLOG), GRID_SIZE)
        t_py = bench(product_mix_numpy, args, repeats)
        if KERNEL_BACKEND == "cython":
            t_cy = bench(product_mix, args, repeats)
            out_cy = np.asarray(product_mix(*args))
            out_py = product_mix_numpy(*args)
            err = float(np.max(np.abs(out_cy - out_py)))
            print(f"{n_a:5d} x {n_b:5d}: numpy {t_py*1e3:8.3f} ms | "
                  f"cython {t_cy*1e3:8.3f} ms | speedup {t_py/t_cy:5.2f}x | "
                  f"max diff {err:.2e}")
        else:
            print(f"{n_a:5d} x {n_b:5d}: numpy {t_py*1e3:8.3f} ms | "
                  "cython unavailable")


if __name__ == "__main__":
    main()
