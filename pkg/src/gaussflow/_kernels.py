"""Numeric inner loops with numba-compiled and pure-numpy implementations.

Each public function dispatches on :data:`gaussflow._accel.USING_NUMBA`.
The two paths are required to agree to floating-point round-off; the
benchmark in ``benchmarks/bench_kernels.py`` compares their speed.
"""

import numpy as np

from ._accel import USING_NUMBA, njit, prange


# ---------------------------------------------------------------------------
# memory convolution  I[i] = int_0^{t_i} K(t_i - s) f(s) ds on a uniform
# grid, K and f sampled on the same grid; composite Simpson quadrature
# (3/8 tail at odd indices) for fourth-order accuracy
# ---------------------------------------------------------------------------

def _quadrature_weights(i, dt):
    """Composite Simpson weights for nodes 0..i, 3/8 tail when i is odd."""
    w = np.zeros(i + 1)
    if i == 0:
        return w
    if i == 1:
        w[0] = w[1] = 0.5 * dt
        return w
    if i % 2 == 0:
        w[0] = w[i] = dt / 3.0
        w[1:i:2] = 4.0 * dt / 3.0
        w[2:i:2] = 2.0 * dt / 3.0
        return w
    # odd i >= 3: Simpson up to i-3, Newton-Cotes 3/8 on the last three
    if i > 3:
        w[0] = w[i - 3] = dt / 3.0
        w[1:i - 3:2] = 4.0 * dt / 3.0
        w[2:i - 3:2] = 2.0 * dt / 3.0
    w[i - 3] += 3.0 * dt / 8.0
    w[i - 2] += 9.0 * dt / 8.0
    w[i - 1] += 9.0 * dt / 8.0
    w[i] += 3.0 * dt / 8.0
    return w


@njit(cache=True, parallel=True, fastmath=True)
def _memory_convolution_jit(kernel, f, dt):
    n = kernel.shape[0]
    out = np.zeros(n)
    for i in prange(1, n):
        if i == 1:
            out[1] = 0.5 * dt * (kernel[1] * f[0] + kernel[0] * f[1])
            continue
        acc = 0.0
        if i % 2 == 0:
            acc += (kernel[i] * f[0] + kernel[0] * f[i]) / 3.0
            for j in range(1, i, 2):
                acc += 4.0 / 3.0 * kernel[i - j] * f[j]
            for j in range(2, i, 2):
                acc += 2.0 / 3.0 * kernel[i - j] * f[j]
        else:
            if i > 3:
                acc += (kernel[i] * f[0] + kernel[3] * f[i - 3]) / 3.0
                for j in range(1, i - 3, 2):
                    acc += 4.0 / 3.0 * kernel[i - j] * f[j]
                for j in range(2, i - 3, 2):
                    acc += 2.0 / 3.0 * kernel[i - j] * f[j]
            acc += 3.0 / 8.0 * (kernel[3] * f[i - 3] + kernel[0] * f[i])
            acc += 9.0 / 8.0 * (kernel[2] * f[i - 2] + kernel[1] * f[i - 1])
        out[i] = acc * dt
    return out


def _memory_convolution_np(kernel, f, dt):
    n = kernel.shape[0]
    out = np.zeros(n)
    for i in range(1, n):
        w = _quadrature_weights(i, dt)
        out[i] = np.dot(kernel[i::-1] * w, f[: i + 1])
    return out


def memory_convolution(kernel: np.ndarray, f: np.ndarray, dt: float) -> np.ndarray:
    """Simpson quadrature of the convolution integral on a uniform grid."""
    kernel = np.ascontiguousarray(kernel, dtype=np.float64)
    f = np.ascontiguousarray(f, dtype=np.float64)
    if kernel.shape != f.shape or kernel.ndim != 1:
        raise ValueError("kernel and f must be 1-d arrays of equal length")
    if USING_NUMBA:
        return _memory_convolution_jit(kernel, f, float(dt))
    return _memory_convolution_np(kernel, f, float(dt))


# ---------------------------------------------------------------------------
# bilinear sampling of a complex 2-d array at fractional indices,
# zero fill outside the grid (hot path of the d=1 Wigner pullback)
# ---------------------------------------------------------------------------

@njit(cache=True)
def _bilinear_jit(re, im, rows, cols):
    n0, n1 = re.shape
    m = rows.shape[0]
    out_re = np.zeros(m)
    out_im = np.zeros(m)
    for k in range(m):
        r = rows[k]
        c = cols[k]
        if r < 0.0 or c < 0.0 or r > n0 - 1.0 or c > n1 - 1.0:
            continue
        i0 = int(np.floor(r))
        j0 = int(np.floor(c))
        if i0 == n0 - 1:
            i0 -= 1
        if j0 == n1 - 1:
            j0 -= 1
        fr = r - i0
        fc = c - j0
        w00 = (1.0 - fr) * (1.0 - fc)
        w01 = (1.0 - fr) * fc
        w10 = fr * (1.0 - fc)
        w11 = fr * fc
        out_re[k] = (w00 * re[i0, j0] + w01 * re[i0, j0 + 1]
                     + w10 * re[i0 + 1, j0] + w11 * re[i0 + 1, j0 + 1])
        out_im[k] = (w00 * im[i0, j0] + w01 * im[i0, j0 + 1]
                     + w10 * im[i0 + 1, j0] + w11 * im[i0 + 1, j0 + 1])
    return out_re, out_im


def _multilinear_np(values: np.ndarray, coords: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of an nd complex array at fractional indices.

    coords has shape (npts, ndim); points outside the grid evaluate to 0.
    """
    ndim = values.ndim
    shape = np.array(values.shape)
    inside = np.all((coords >= 0.0) & (coords <= shape - 1.0), axis=1)
    base = np.floor(coords).astype(np.int64)
    base = np.minimum(base, shape - 2)
    base = np.maximum(base, 0)
    frac = coords - base
    out = np.zeros(coords.shape[0], dtype=np.complex128)
    for corner in range(1 << ndim):
        idx = []
        w = np.ones(coords.shape[0])
        for axis in range(ndim):
            bit = (corner >> axis) & 1
            idx.append(base[:, axis] + bit)
            w = w * (frac[:, axis] if bit else 1.0 - frac[:, axis])
        out += w * values[tuple(idx)]
    out[~inside] = 0.0
    return out


def sample_fractional(values: np.ndarray, coords: np.ndarray) -> np.ndarray:
    """Sample a complex nd array at fractional index coordinates (zero fill)."""
    values = np.ascontiguousarray(values, dtype=np.complex128)
    coords = np.ascontiguousarray(coords, dtype=np.float64)
    if USING_NUMBA and values.ndim == 2:
        re, im = _bilinear_jit(
            np.ascontiguousarray(values.real),
            np.ascontiguousarray(values.imag),
            coords[:, 0].copy(),
            coords[:, 1].copy(),
        )
        return re + 1j * im
    return _multilinear_np(values, coords)
