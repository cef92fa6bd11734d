"""Numerical substrate: uniform grids, high-order finite differences,
cumulative quadrature and an adaptive Dormand-Prince integrator.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import _kernels
from .errors import IntegrationStalled, NumericsError

DEFAULT_ACCURACY = 6
EXTENDED = np.longdouble


def as_real(values):
    """Float array, keeping extended precision when the input has it."""
    arr = np.asarray(values)
    return arr if arr.dtype == EXTENDED else np.asarray(arr, dtype=float)


def _extended(arr):
    return np.asarray(arr).dtype == EXTENDED


@dataclass(frozen=True)
class Grid1D:
    start: float
    end: float
    count: int

    def __post_init__(self):
        if int(self.count) != self.count or self.count < 5:
            raise NumericsError("insufficient samples")
        if not (np.isfinite(self.start) and np.isfinite(self.end)) or self.end <= self.start:
            raise NumericsError("grid must be strictly increasing")

    @property
    def h(self):
        return (self.end - self.start) / (self.count - 1)

    @property
    def nodes(self):
        return np.linspace(self.start, self.end, self.count)

    def nodes_as(self, dtype):
        """Nodes ``start + i*h`` evaluated in ``dtype`` (exactly uniform)."""
        a, b = dtype(self.start), dtype(self.end)
        return a + np.arange(self.count, dtype=dtype) * ((b - a) / dtype(self.count - 1))

    @classmethod
    def parse(cls, text):
        """Build a grid from ``"a:b:n"``."""
        try:
            a, b, n = text.split(":")
            return cls(float(a), float(b), int(n))
        except (ValueError, TypeError) as exc:
            raise NumericsError(f"bad grid spec {text!r}; expected a:b:n") from exc


@dataclass(frozen=True)
class SampledFunction:
    """Samples of a scalar or fixed-dimension vector function on a grid."""

    grid: Grid1D
    values: np.ndarray
    flags: tuple = field(default=(), compare=False)

    def __post_init__(self):
        vals = as_real(self.values)
        if vals.shape[0] != self.grid.count:
            raise NumericsError("sample count does not match grid")
        if not np.all(np.isfinite(vals)):
            raise NumericsError("invalid samples")
        object.__setattr__(self, "values", vals)

    @property
    def s(self):
        return self.grid.nodes

    def __call__(self, x, npts=8):
        """Local Lagrange interpolation (scalar samples only)."""
        if self.values.ndim != 1:
            raise NumericsError("interpolation needs scalar samples")
        x = np.atleast_1d(np.asarray(x, dtype=float))
        npts = min(npts, self.grid.count)
        kern = _kernels.lagrange_uniform_numpy if _extended(self.values) else _kernels.lagrange_uniform
        return kern(self.values, self.grid.start, self.grid.h, x, npts)


# --- stencils ----------------------------------------------------------------

def fornberg_weights(offsets, order, exact=False):
    """Finite-difference weights for derivative ``order`` at 0 using the
    given offsets, by Fornberg's recursion. ``exact=True`` runs the
    recursion in rationals (integer offsets) and returns Fractions."""
    if exact:
        x = [Fraction(int(v)) for v in offsets]
        c = np.full((len(x), order + 1), Fraction(0), dtype=object)
        one = Fraction(1)
    else:
        x = np.asarray(offsets, dtype=float)
        c = np.zeros((len(x), order + 1))
        one = 1.0
    n = len(x)
    c1, c4 = one, x[0]
    c[0, 0] = one
    for i in range(1, n):
        mn = min(i, order)
        c2, c5, c4 = one, c4, x[i]
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


@lru_cache(maxsize=None)
def stencil_tables(order, accuracy, dtype=float):
    """Interior (central) weights and the off-centred boundary tables.

    Weights are exact rationals rounded once to ``dtype``.
    """
    ncentral = 2 * ((order + 1) // 2) - 1 + accuracy
    r = (ncentral - 1) // 2
    width = max(ncentral, order + accuracy)

    def cast(rows):
        return np.array([[dtype(w.numerator) / dtype(w.denominator) for w in row] for row in rows],
                        dtype=dtype).reshape(len(rows), -1)

    interior = cast([fornberg_weights(range(-r, r + 1), order, exact=True)])[0]
    left = cast([fornberg_weights(np.arange(width) - i, order, exact=True) for i in range(r)])
    right = cast([fornberg_weights(np.arange(width) - (width - r + i), order, exact=True)
                  for i in range(r)])
    if r == 0:
        left = right = np.zeros((0, width), dtype=dtype)
    return interior, left, right, width


def diff_array(values, h, order, accuracy=DEFAULT_ACCURACY, axis=0):
    """Derivative of uniformly sampled data along ``axis``."""
    if order not in (1, 2, 3, 4):
        raise NumericsError(f"unsupported derivative order {order}")
    vals = as_real(values)
    if not np.all(np.isfinite(vals)):
        raise NumericsError("invalid samples")
    ext = vals.dtype == EXTENDED
    interior, left, right, width = stencil_tables(order, accuracy, EXTENDED if ext else float)
    n = vals.shape[axis]
    if n < max(width, order + 4):
        raise NumericsError("insufficient samples")
    moved = np.moveaxis(vals, axis, 0)
    flat = np.ascontiguousarray(moved.reshape(n, -1))
    kern = _kernels.apply_stencil_numpy if ext else _kernels.apply_stencil
    out = kern(flat, interior, left, right) / vals.dtype.type(h) ** order
    return np.moveaxis(out.reshape(moved.shape), 0, axis)


def diff(fn, order, accuracy=DEFAULT_ACCURACY):
    """Derivative of a :class:`SampledFunction`, on the same grid."""
    return SampledFunction(fn.grid, diff_array(fn.values, fn.grid.h, order, accuracy))


def quadrature(fn):
    """Running integral, zero at the first node."""
    if fn.grid.count < 5:
        raise NumericsError("insufficient samples")
    vals = fn.values
    flat = np.ascontiguousarray(vals.reshape(vals.shape[0], -1))
    kern = _kernels.cumulative_cubic_numpy if _extended(vals) else _kernels.cumulative_cubic
    out = kern(flat, vals.dtype.type(fn.grid.h))
    return SampledFunction(fn.grid, out.reshape(vals.shape))


def interior_slice(n, margin):
    """Slice dropping ``margin`` nodes at each end (at most a third each)."""
    m = min(margin, (n - 1) // 3)
    return slice(m, n - m)


# --- Dormand-Prince 5(4) -----------------------------------------------------

_F = Fraction
_C = [_F(0), _F(1, 5), _F(3, 10), _F(4, 5), _F(8, 9), _F(1), _F(1)]
_A = [
    [],
    [_F(1, 5)],
    [_F(3, 40), _F(9, 40)],
    [_F(44, 45), _F(-56, 15), _F(32, 9)],
    [_F(19372, 6561), _F(-25360, 2187), _F(64448, 6561), _F(-212, 729)],
    [_F(9017, 3168), _F(-355, 33), _F(46732, 5247), _F(49, 176), _F(-5103, 18656)],
    [_F(35, 384), _F(0), _F(500, 1113), _F(125, 192), _F(-2187, 6784), _F(11, 84)],
]
_B5 = [_F(35, 384), _F(0), _F(500, 1113), _F(125, 192), _F(-2187, 6784), _F(11, 84), _F(0)]
_B4 = [_F(5179, 57600), _F(0), _F(7571, 16695), _F(393, 640), _F(-92097, 339200),
       _F(187, 2100), _F(1, 40)]


@lru_cache(maxsize=None)
def _tableau(dtype):
    def cast(v):
        return np.array([dtype(x.numerator) / dtype(x.denominator) for x in v], dtype=dtype)
    return (cast(_C), [cast(row) for row in _A], cast(_B5),
            cast([b5 - b4 for b5, b4 in zip(_B5, _B4)]))


def _dopri_step(rhs, s, y, h, k0):
    c, a, b5, e = _tableau(y.dtype.type)
    k = np.empty((7, y.size), dtype=y.dtype)
    k[0] = k0
    for i in range(1, 7):
        yi = y + h * (a[i] @ k[:i])
        k[i] = rhs(s + c[i] * h, yi)
    y_new = y + h * (b5 @ k)
    err = h * (e @ k)
    return y_new, err, k[6]


def integrate_ode(rhs, y0, span, tol=1e-10, *, count=401, stop=None, max_steps=1_000_000):
    """Integrate ``y' = rhs(s, y)`` from ``span[0]`` to ``span[1]``.

    Steps are adaptive (Dormand-Prince 5(4), error per step held below
    ``tol`` in mixed absolute/relative norm) and always land on the nodes of
    the uniform output grid, so the sampled trajectory carries a smooth
    global error that survives further finite differencing.

    ``stop(s, y) -> bool`` may end the run early (e.g. at a degeneracy);
    the result is then truncated to the nodes reached and flagged.
    """
    if tol <= 0:
        raise NumericsError("tol must be positive")
    grid = Grid1D(float(span[0]), float(span[1]), count)
    y = np.atleast_1d(as_real(y0)).copy()
    dtype = y.dtype.type
    nodes = grid.nodes_as(dtype)

    def f(s, state):
        out = np.asarray(rhs(s, state), dtype=dtype)
        if not np.all(np.isfinite(out)):
            raise IntegrationStalled(s)
        return out

    out = np.empty((count, y.size), dtype=dtype)
    out[0] = y
    s = nodes[0]
    k0 = f(s, y)
    h_free = nodes[1] - nodes[0]
    hmin = 1e-14 * max(1.0, abs(grid.end), abs(grid.start))
    steps = 0
    for i in range(1, count):
        target = nodes[i]
        while s < target:
            # take the rest of the interval when a free step would leave a sliver
            clipped = 1.1 * h_free >= target - s
            h = target - s if clipped else h_free
            if h < hmin:
                raise IntegrationStalled(s)
            y_new, err, k_last = _dopri_step(f, s, y, h, k0)
            scale = tol * (1.0 + np.maximum(np.abs(y), np.abs(y_new)))
            e = np.sqrt(np.mean((err / scale) ** 2)) if np.all(np.isfinite(err)) else np.inf
            steps += 1
            if steps > max_steps:
                raise IntegrationStalled(s)
            if e <= 1.0:
                s = target if clipped else s + h
                y, k0 = y_new, k_last
                fac = 5.0 if e == 0 else min(5.0, max(0.2, 0.9 * e ** -0.2))
                h_free = max(h_free, h * fac) if clipped else h * fac
            else:
                h_free = h * max(0.1, 0.9 * e ** -0.2)
        out[i] = y
        if stop is not None and stop(s, y):
            if i + 1 < 5:
                raise IntegrationStalled(s)
            g = Grid1D(grid.start, float(nodes[i]), i + 1)
            vals = out[: i + 1, 0] if np.ndim(y0) == 0 else out[: i + 1]
            return SampledFunction(g, vals, flags=(f"stopped at s={s:.12g}",))
    vals = out[:, 0] if np.ndim(y0) == 0 else out
    return SampledFunction(grid, vals)
