"""Benchmark the numba kernels against their pure-numpy fallbacks.

Run as ``python benchmarks/bench_kernels.py``.  The selection normally
happens via the ``GAUSSFLOW_NO_NUMBA`` environment variable at import
time; here both implementations are timed directly (after a warm-up call
so numba compilation does not count) and checked to agree.
"""

import time

import numpy as np

from gaussflow._accel import USING_NUMBA
from gaussflow._kernels import (
    _bilinear_jit,
    _memory_convolution_jit,
    _memory_convolution_np,
    _multilinear_np,
)


def timeit(fn, *args, repeat=5):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return out, best


def bench_convolution(n=20000, rng=None):
    kernel = np.cos(np.linspace(0, 30, n))
    f = rng.normal(size=n)
    dt = 1e-3
    np_out, np_t = timeit(_memory_convolution_np, kernel, f, dt)
    if USING_NUMBA:
        _memory_convolution_jit(kernel[:64], f[:64], dt)  # compile
        jit_out, jit_t = timeit(_memory_convolution_jit, kernel, f, dt)
        err = np.max(np.abs(jit_out - np_out)) / np.max(np.abs(np_out))
        print(f"memory_convolution n={n}: numba {jit_t * 1e3:.1f} ms, "
              f"numpy {np_t * 1e3:.1f} ms, speedup {np_t / jit_t:.2f}x, "
              f"rel diff {err:.2e}")
    else:
        print(f"memory_convolution n={n}: numpy {np_t * 1e3:.1f} ms "
              "(numba unavailable or disabled)")


def bench_sampling(n=512, m=400000, rng=None):
    values = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    coords = rng.uniform(-1.0, n, size=(m, 2))
    np_out, np_t = timeit(_multilinear_np, values, coords)
    if USING_NUMBA:
        re = np.ascontiguousarray(values.real)
        im = np.ascontiguousarray(values.imag)
        rows = coords[:, 0].copy()
        cols = coords[:, 1].copy()
        _bilinear_jit(re[:8, :8], im[:8, :8], rows[:8], cols[:8])  # compile

        def jit_call():
            r, i = _bilinear_jit(re, im, rows, cols)
            return r + 1j * i

        jit_out, jit_t = timeit(jit_call)
        err = np.max(np.abs(jit_out - np_out))
        print(f"sample_fractional {n}x{n}, {m} pts: numba "
              f"{jit_t * 1e3:.1f} ms, numpy {np_t * 1e3:.1f} ms, "
              f"speedup {np_t / jit_t:.2f}x, abs diff {err:.2e}")
    else:
        print(f"sample_fractional {n}x{n}, {m} pts: numpy "
              f"{np_t * 1e3:.1f} ms (numba unavailable or disabled)")


if __name__ == "__main__":
    rng = np.random.default_rng(0)
    print(f"numba available: {USING_NUMBA}")
    bench_convolution(rng=rng)
    bench_sampling(rng=rng)
