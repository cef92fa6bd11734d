"""Hot inner loops: stencil application, cumulative quadrature, local
Lagrange interpolation.

Every kernel exists twice: a numba version (``*_numba``) and a vectorised
numpy version (``*_numpy``). The module-level names without suffix point at
whichever one ``_accel.USE_NUMBA`` selects; both are importable directly so
the benchmark and the test-suite can compare them.
"""

import numpy as np

from ._accel import USE_NUMBA, njit


# --- stencil application -----------------------------------------------------

@njit
def apply_stencil_numba(values, interior, left, right):
    # values: (n, d); interior: (2r+1,); left/right: (r, W)
    n, d = values.shape
    r = (interior.shape[0] - 1) // 2
    W = left.shape[1]
    out = np.zeros((n, d))
    for i in range(r, n - r):
        for k in range(2 * r + 1):
            w = interior[k]
            for j in range(d):
                out[i, j] += w * values[i - r + k, j]
    for i in range(r):
        for k in range(W):
            w = left[i, k]
            wr = right[i, k]
            for j in range(d):
                out[i, j] += w * values[k, j]
                out[n - r + i, j] += wr * values[n - W + k, j]
    return out


def apply_stencil_numpy(values, interior, left, right):
    n, d = values.shape
    r = (interior.shape[0] - 1) // 2
    W = left.shape[1]
    out = np.empty((n, d), dtype=values.dtype)
    windows = np.lib.stride_tricks.sliding_window_view(values, 2 * r + 1, axis=0)
    out[r:n - r] = windows @ interior
    out[:r] = left @ values[:W]
    out[n - r:] = right @ values[n - W:]
    return out


# --- cumulative quadrature ---------------------------------------------------
# Per-interval integrals of the local cubic interpolant (exact for cubics).

@njit
def cumulative_cubic_numba(y, h):
    n, d = y.shape
    out = np.zeros((n, d))
    for j in range(d):
        acc = 0.0
        for i in range(n - 1):
            if i == 0:
                seg = 9.0 * y[0, j] + 19.0 * y[1, j] - 5.0 * y[2, j] + y[3, j]
            elif i == n - 2:
                seg = 9.0 * y[n - 1, j] + 19.0 * y[n - 2, j] - 5.0 * y[n - 3, j] + y[n - 4, j]
            else:
                seg = -y[i - 1, j] + 13.0 * y[i, j] + 13.0 * y[i + 1, j] - y[i + 2, j]
            acc += seg * h / 24.0
            out[i + 1, j] = acc
    return out


def cumulative_cubic_numpy(y, h):
    n, d = y.shape
    seg = np.empty((n - 1, d), dtype=y.dtype)
    seg[1:-1] = -y[:-3] + 13.0 * y[1:-2] + 13.0 * y[2:-1] - y[3:]
    seg[0] = 9.0 * y[0] + 19.0 * y[1] - 5.0 * y[2] + y[3]
    seg[-1] = 9.0 * y[-1] + 19.0 * y[-2] - 5.0 * y[-3] + y[-4]
    out = np.zeros((n, d), dtype=y.dtype)
    np.cumsum(seg * (h / 24.0), axis=0, out=out[1:])
    return out


# --- local Lagrange interpolation on a uniform grid --------------------------

@njit
def lagrange_uniform_numba(values, start, h, x, npts):
    n = values.shape[0]
    m = x.shape[0]
    out = np.empty(m)
    for q in range(m):
        t = (x[q] - start) / h
        lo = int(np.floor(t)) - npts // 2 + 1
        if lo < 0:
            lo = 0
        if lo > n - npts:
            lo = n - npts
        acc = 0.0
        for a in range(npts):
            w = 1.0
            for b in range(npts):
                if b != a:
                    w *= (t - (lo + b)) / (a - b)
            acc += w * values[lo + a]
        out[q] = acc
    return out


def lagrange_uniform_numpy(values, start, h, x, npts):
    n = values.shape[0]
    t = (np.asarray(x, dtype=values.dtype) - start) / h
    lo = np.clip(np.floor(t).astype(np.int64) - npts // 2 + 1, 0, n - npts)
    nodes = lo[:, None] + np.arange(npts)[None, :]
    out = np.zeros(t.shape[0], dtype=values.dtype)
    for a in range(npts):
        w = np.ones(t.shape[0], dtype=values.dtype)
        for b in range(npts):
            if b != a:
                w *= (t - nodes[:, b]) / (a - b)
        out += w * values[nodes[:, a]]
    return out


if USE_NUMBA:
    apply_stencil = apply_stencil_numba
    cumulative_cubic = cumulative_cubic_numba
    lagrange_uniform = lagrange_uniform_numba
else:
    apply_stencil = apply_stencil_numpy
    cumulative_cubic = cumulative_cubic_numpy
    lagrange_uniform = lagrange_uniform_numpy
