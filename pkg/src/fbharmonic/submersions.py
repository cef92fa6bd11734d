"""Riemannian submersions from 3-manifolds given by adapted orthonormal frames.

A model is a chart with three coordinate vector fields ``e1, e2, e3``
(``e3`` vertical). Its integrability data are the scalars of the bracket
relations

    [e1, e3] = k1 e3,   [e2, e3] = k2 e3,   [e1, e2] = f1 e1 + f2 e2 - 2 sigma e3,

extracted numerically from the coordinate components. Everything is
evaluated on a coordinate tensor grid: brackets, directional derivatives
and Laplacians are nested finite differences along the grid axes, carried
out in extended precision so that the third-level derivatives inside
``Laplacian(f k1)`` stay far below verdict tolerances. Pointwise queries
build a small local grid around the point and read off its centre.

Sign conventions. With ``E1, E2`` the horizontal components of the
f-weighted system,

    E1 = -Lap(f k1) - 2 sum_i f_i e_i(f k2) - f k2 sum_i (e_i(f_i) - k_i f_i)
         + f k1 (-K + f1^2 + f2^2)
    E2 = -Lap(f k2) + 2 sum_i f_i e_i(f k1) + f k1 sum_i (e_i(f_i) - k_i f_i)
         + f k2 (-K + f1^2 + f2^2)

and with ``f = 1`` these reduce term by term to the bitension components,
which are coded separately in their unexpanded form. The Sol model
(``k1 = -1, f2 = 1``) fixes the overall signs: its bitension is ``(-2, 0)``
and the weight ``exp(sqrt2 z) + exp(-sqrt2 z)`` makes both lines vanish.
"""

import csv
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, FBHError, FrameError
from .expr import Expression
from .numcore import (DEFAULT_ACCURACY, EXTENDED, Grid1D, SampledFunction, diff_array,
                      integrate_ode, interior_slice)
from .report import PASS, ResidualReport, sup
from .spaceform import get_chart

ORTHONORMAL_TOL = 1e-8
BRACKET_TOL = 1e-6
MARGIN = 12
LOCAL_HALF = 6
LOCAL_STEP = 5e-3
CHART_MARGIN = 0.05


@dataclass(frozen=True)
class AdaptedFrameModel:
    """Frame fields ``e1, e2, e3`` in a 3D chart; ``frame(x0, x1, x2)``
    returns the 3x3 nested components ``[[e1^0, e1^1, e1^2], ...]``.

    ``KN`` is the Gauss curvature of the base when known, ``c`` the
    sectional constant of a space-form source (``None`` otherwise).
    ``default_f`` and ``default_grid`` describe the weight and grid used by
    the catalog run.
    """

    name: str
    chart: object
    frame: Callable
    KN: Optional[float] = None
    c: Optional[float] = None
    default_f: Optional[str] = None
    default_grid: tuple = ()

    def frame_array(self, P):
        P = np.asarray(P)
        x = [P[..., a] for a in range(3)]
        rows = self.frame(*x)
        return np.stack([np.stack([np.broadcast_to(np.asarray(c, dtype=P.dtype), P.shape[:-1])
                                   for c in row], axis=-1) for row in rows], axis=-2)


def _sol_frame(x, y, z):
    o = 0 * z
    return [[o, o, o + 1], [o, np.exp(z), o], [np.exp(-z), o, o]]


def _flatcyl_frame(r, z, t):
    o = 0 * r
    return [[o + 1, o, o], [o, o + 1, o], [o, o, 1 / r]]


def _h3_frame(r, z, t):
    o = 0 * r
    return [[o + 1, o, o], [o, np.exp(r), o], [o, o, np.exp(r)]]


def _s3_frame(r, z, t):
    o = 0 * r
    return [[o + 1, o, o], [o, 1 / np.cos(r), o], [o, o, 1 / np.sin(r)]]


def sol_model():
    return AdaptedFrameModel("sol", get_chart("sol3"), _sol_frame, KN=-1.0, c=None,
                             default_f="exp(sqrt2*z)+exp(-sqrt2*z)",
                             default_grid=(Grid1D(-1, 1, 9), Grid1D(-1, 1, 9), Grid1D(-1, 1, 121)))


def flatcyl_model():
    return AdaptedFrameModel("flatcyl", get_chart("flatcyl3"), _flatcyl_frame, KN=0.0, c=0.0,
                             default_f="rho",
                             default_grid=(Grid1D(0.5, 3, 251), Grid1D(-1, 1, 9), Grid1D(0, 1, 9)))


def h3_model():
    return AdaptedFrameModel("h3", get_chart("hyperbolic3"), _h3_frame, KN=-1.0, c=-1.0,
                             default_f="exp((1+sqrt3)*rho)+exp((1-sqrt3)*rho)",
                             default_grid=(Grid1D(-1, 1, 161), Grid1D(-1, 1, 9), Grid1D(0, 1, 9)))


def s3_model():
    return AdaptedFrameModel("s3", get_chart("sphere3"), _s3_frame, KN=1.0, c=1.0,
                             default_f=None,
                             default_grid=(Grid1D(0.3, 1.2, 181), Grid1D(0, 1, 9), Grid1D(0, 1, 9)))


CATALOG = {"sol": sol_model, "flatcyl": flatcyl_model, "h3": h3_model, "s3": s3_model}


def get_model(name):
    if isinstance(name, AdaptedFrameModel):
        return name
    try:
        return CATALOG[name]()
    except KeyError:
        raise FBHError(f"unknown submersion model {name!r}; choose from {', '.join(CATALOG)}") from None


# --- grid evaluation ----------------------------------------------------------

@dataclass
class IntegrabilityData:
    f1: np.ndarray
    f2: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    sigma: np.ndarray
    bracket_residual: float = 0.0

    def at(self, idx):
        return {k: float(getattr(self, k)[idx]) for k in ("f1", "f2", "k1", "k2", "sigma")}


class FrameGrid:
    """A model sampled on a tensor grid of chart coordinates, with the
    frame calculus (directional derivatives, brackets, Laplacian) as
    finite differences along the grid axes."""

    def __init__(self, model, grids, accuracy=DEFAULT_ACCURACY, check=True):
        self.model = get_model(model)
        self.grids = tuple(grids)
        if len(self.grids) != 3:
            raise FBHError("submersion grids need three axes")
        self.accuracy = accuracy
        axes = [g.nodes_as(EXTENDED) for g in self.grids]
        self.coords = np.meshgrid(*axes, indexing="ij")
        self.P = np.stack(self.coords, axis=-1)
        chart = self.model.chart
        flat = self.P.reshape(-1, 3)
        if not np.all(chart.inside(flat, 0.0)):
            raise DomainError(f"{self.model.name}: grid leaves the chart domain")
        self.shape = self.P.shape[:-1]
        self.g = chart.diag(flat).reshape(self.P.shape)
        self.E = self.model.frame_array(self.P)  # [..., i, k]
        if check:
            err = self.orthonormality_error()
            if err > ORTHONORMAL_TOL:
                raise FrameError(f"frame invalid: orthonormality error {err:.3g}")
        self.inner = tuple(interior_slice(g.count, MARGIN) for g in self.grids)
        self._data = None

    # basic calculus
    def d(self, u, axis):
        return diff_array(u, self.grids[axis].h, 1, self.accuracy, axis=axis)

    def grad(self, u):
        return np.stack([self.d(u, a) for a in range(3)], axis=-1)

    def ip(self, X, Y):
        return np.sum(self.g * X * Y, axis=-1)

    def e(self, i, u):
        """Directional derivative ``e_i(u)`` (``i`` = 1, 2, 3)."""
        return np.sum(self.E[..., i - 1, :] * self.grad(u), axis=-1)

    def vector_derivative(self, X, Y):
        """Componentwise ``X(Y^k)`` for vector arrays ``X, Y``."""
        dY = np.stack([self.grad(Y[..., k]) for k in range(3)], axis=-2)  # [..., k, j]
        return np.einsum("...j,...kj->...k", X, dY)

    def bracket(self, i, j):
        X, Y = self.E[..., i - 1, :], self.E[..., j - 1, :]
        return self.vector_derivative(X, Y) - self.vector_derivative(Y, X)

    def orthonormality_error(self):
        G = np.einsum("...k,...ik,...jk->...ij", self.g, self.E, self.E)
        return float(np.max(np.abs(G - np.eye(3))))

    # integrability data
    @property
    def data(self):
        if self._data is None:
            self._data = self._extract()
        return self._data

    def _extract(self):
        e1, e2, e3 = (self.E[..., i, :] for i in range(3))
        b13, b23, b12 = self.bracket(1, 3), self.bracket(2, 3), self.bracket(1, 2)
        k1, k2 = self.ip(b13, e3), self.ip(b23, e3)
        f1, f2 = self.ip(b12, e1), self.ip(b12, e2)
        sigma = -0.5 * self.ip(b12, e3)
        res = [b13 - k1[..., None] * e3, b23 - k2[..., None] * e3,
               b12 - (f1[..., None] * e1 + f2[..., None] * e2 - 2 * sigma[..., None] * e3)]
        r = max(sup(np.sqrt(self.ip(v, v)), self.inner) for v in res)
        return IntegrabilityData(f1, f2, k1, k2, sigma, r)

    def check_adapted(self, tol=BRACKET_TOL):
        r = self.data.bracket_residual
        if r > tol:
            raise FrameError(f"not an adapted frame: bracket residual {r:.3g}")
        return r

    def gauss_curvature_N(self):
        D = self.data
        return self.e(1, D.f2) - self.e(2, D.f1) - D.f1 ** 2 - D.f2 ** 2

    def KN(self):
        return self.gauss_curvature_N()

    def laplacian(self, u):
        D = self.data
        e1u, e2u = self.e(1, u), self.e(2, u)
        second = sum(self.e(i, self.e(i, u)) for i in (1, 2, 3))
        return second + D.f1 * e2u - D.f2 * e1u - D.k1 * e1u - D.k2 * e2u

    def coordinate_laplacian(self, u):
        """``(1/sqrt g) d_a (sqrt g g^aa d_a u)`` from the chart metric."""
        rg = np.sqrt(np.prod(self.g, axis=-1))
        return sum(self.d(rg / self.g[..., a] * self.d(u, a), a) for a in range(3)) / rg

    def tension(self):
        D = self.data
        return -D.k1, -D.k2

    def bitension(self):
        """Horizontal components of the bitension field, written as the
        unexpanded bracket-data expression (independent of the weighted
        system below)."""
        D = self.data
        K = self.gauss_curvature_N()
        e = self.e
        common = -K + D.f1 ** 2 + D.f2 ** 2
        b1 = (-self.laplacian(D.k1) - D.f1 * e(1, D.k2) - e(1, D.k2 * D.f1)
              - D.f2 * e(2, D.k2) - e(2, D.k2 * D.f2)
              + D.k1 * D.k2 * D.f1 + D.k2 ** 2 * D.f2 + D.k1 * common)
        b2 = (-self.laplacian(D.k2) + D.f1 * e(1, D.k1) + e(1, D.k1 * D.f1)
              + D.f2 * e(2, D.k1) + e(2, D.k1 * D.f2)
              - D.k1 * D.k2 * D.f2 - D.k1 ** 2 * D.f1 + D.k2 * common)
        return b1, b2

    def weighted_system(self, f):
        """The two horizontal lines of the f-biharmonic system."""
        D = self.data
        K = self.gauss_curvature_N()
        fk1, fk2 = f * D.k1, f * D.k2
        drift = (self.e(1, D.f1) - D.k1 * D.f1) + (self.e(2, D.f2) - D.k2 * D.f2)
        common = -K + D.f1 ** 2 + D.f2 ** 2
        E1 = (-self.laplacian(fk1) - 2 * (D.f1 * self.e(1, fk2) + D.f2 * self.e(2, fk2))
              - fk2 * drift + fk1 * common)
        E2 = (-self.laplacian(fk2) + 2 * (D.f1 * self.e(1, fk1) + D.f2 * self.e(2, fk1))
              + fk1 * drift + fk2 * common)
        return E1, E2

    def reduced_system(self, f):
        """The system specialised to ``k2 = 0``."""
        D = self.data
        K = self.gauss_curvature_N()
        fk1 = f * D.k1
        R1 = -self.laplacian(fk1) + fk1 * (-K + D.f1 ** 2 + D.f2 ** 2)
        R2 = (2 * D.f1 * self.e(1, fk1) + 2 * D.f2 * self.e(2, fk1)
              + fk1 * (self.e(1, D.f1) + self.e(2, D.f2)) - fk1 * D.k1 * D.f1)
        return R1, R2

    def space_form_system(self, f, c):
        """The ``k2 = 0`` system between space forms of curvature ``c``,
        plus the bitension certificate ``-Lap k1 + k1(-c + c^2/k1^2)``."""
        D = self.data
        fk1 = f * D.k1
        T1 = -self.laplacian(fk1) + fk1 * (-c + c ** 2 / D.k1 ** 2)
        T2 = c * self.e(2, f)
        T3 = -self.laplacian(D.k1) + D.k1 * (-c + c ** 2 / D.k1 ** 2)
        return T1, T2, T3

    # structure equations
    def levi_civita(self, i, j):
        """``nabla_{e_i} e_j`` from the chart's Christoffel symbols."""
        X, Y = self.E[..., i - 1, :], self.E[..., j - 1, :]
        G = self.model.chart.christoffel(np.asarray(self.P.reshape(-1, 3), dtype=float))
        G = G.reshape(self.shape + (3, 3, 3))
        return self.vector_derivative(X, Y) + np.einsum("...kab,...a,...b->...k", G, X, Y)

    def connection_table(self, i, j):
        """``nabla_{e_i} e_j`` rebuilt from the integrability data."""
        D = self.data
        e1, e2, e3 = (self.E[..., a, :] for a in range(3))
        f1, f2, k1, k2, s = (v[..., None] for v in (D.f1, D.f2, D.k1, D.k2, D.sigma))
        table = {
            (1, 1): -f1 * e2, (1, 2): f1 * e1 - s * e3, (1, 3): s * e2,
            (2, 1): -f2 * e2 + s * e3, (2, 2): f2 * e1, (2, 3): -s * e1,
            (3, 1): -k1 * e3 + s * e2, (3, 2): -s * e1 - k2 * e3, (3, 3): k1 * e1 + k2 * e2,
        }
        return table[(i, j)]

    def structure_errors(self):
        out = {}
        for i in (1, 2, 3):
            for j in (1, 2, 3):
                diff = np.asarray(self.levi_civita(i, j) - self.connection_table(i, j), dtype=float)
                out[(i, j)] = sup(np.sqrt(np.sum(self.g * diff ** 2, axis=-1)), self.inner)
        return out

    def constraint_errors(self, c):
        """Space-form constraints ``k1 f2 = -c`` and ``e1(k1) = k1^2 + c``."""
        D = self.data
        return (sup(D.k1 * D.f2 + c, self.inner),
                sup(self.e(1, D.k1) - D.k1 ** 2 - c, self.inner))


def local_grids(model, point, step=LOCAL_STEP, half=LOCAL_HALF):
    """Small tensor grid centred on ``point`` (shrunk near chart edges)."""
    model = get_model(model)
    p = np.asarray(point, dtype=float)
    h = step * (1 + np.abs(p))
    for _ in range(20):
        corners = np.array(np.meshgrid(*[[x - half * dx, x + half * dx] for x, dx in zip(p, h)],
                                       indexing="ij")).reshape(3, -1).T
        if np.all(model.chart.inside(corners, 0.0)):
            return tuple(Grid1D(x - half * dx, x + half * dx, 2 * half + 1) for x, dx in zip(p, h))
        h = h / 2
    raise DomainError(f"{model.name}: point {tuple(p)} outside the chart domain")


def _local(model, point):
    fg = FrameGrid(model, local_grids(model, point))
    return fg, (LOCAL_HALF,) * 3


def extract_integrability(model, point, tol=BRACKET_TOL):
    """Integrability data at ``point`` as a dict of floats, plus the bracket
    projection residual under ``"bracket_residual"``."""
    fg, c = _local(model, point)
    r = fg.check_adapted(tol)
    out = fg.data.at(c)
    out["bracket_residual"] = r
    return out


def gauss_curvature_N(model, point):
    fg, c = _local(model, point)
    return float(fg.gauss_curvature_N()[c])


def laplacian(model, f, point):
    fg, c = _local(model, point)
    return float(fg.laplacian(weight_field(fg, f))[c])


def tension(model, point):
    fg, c = _local(model, point)
    t1, t2 = fg.tension()
    return np.array([float(t1[c]), float(t2[c])])


def bitension(model, point):
    fg, c = _local(model, point)
    b1, b2 = fg.bitension()
    return np.array([float(b1[c]), float(b2[c])])


def weight_field(fg, f):
    """Sample a weight on the grid of ``fg``.

    ``f`` may be a number, an expression string in the chart coordinates,
    a callable ``f(x0, x1, x2)``, an array of grid shape, or a
    :class:`SampledFunction` of the first coordinate (used directly when its
    grid is the grid's first axis, interpolated otherwise).
    """
    names = fg.model.chart.coords
    if isinstance(f, (int, float, np.floating)):
        vals = np.full(fg.shape, f, dtype=EXTENDED)
    elif isinstance(f, str):
        vals = Expression(f, names)(**dict(zip(names, fg.coords)))
    elif isinstance(f, Expression):
        vals = f(**dict(zip(names, fg.coords)))
    elif isinstance(f, SampledFunction):
        g0 = fg.grids[0]
        if (f.grid.count == g0.count and abs(f.grid.start - g0.start) < 1e-12
                and abs(f.grid.end - g0.end) < 1e-12):
            col = f.values
        else:
            col = f(g0.nodes)
        vals = np.broadcast_to(np.asarray(col, dtype=EXTENDED)[:, None, None], fg.shape).copy()
    elif callable(f):
        vals = np.asarray(f(*fg.coords))
        vals = np.broadcast_to(vals, fg.shape).astype(np.result_type(vals, EXTENDED))
    else:
        vals = np.asarray(f)
        if vals.shape != fg.shape:
            raise FBHError("weight samples do not match the grid shape")
    if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
        raise DomainError("weight f must be positive on the grid")
    return vals


def grid_label(grids):
    return ",".join(f"{g.start:g}:{g.end:g}:{g.count}" for g in grids)


def check_grid_margin(model, grids, margin=CHART_MARGIN):
    model = get_model(model)
    corners = np.array(np.meshgrid(*[[g.start, g.end] for g in grids], indexing="ij")).reshape(3, -1).T
    if not np.all(model.chart.inside(corners, margin)):
        raise DomainError(f"{model.name}: grid must stay {margin} inside the chart domain")


def fbh_submersion_residual(model, f, grids=None, tol=1e-6, accuracy=DEFAULT_ACCURACY):
    """Residual report of the f-biharmonic system on a coordinate grid.

    ``residuals`` holds the two horizontal lines of the full system. When
    the extracted ``k2`` vanishes the ``k2 = 0`` specialisation is reported
    as well, and for space-form models also the constant-curvature form;
    their verdicts appear in ``extra``. ``proper`` requires a passing
    verdict and ``sup|bitension| > 10 tol``.
    """
    model = get_model(model)
    if grids is None:
        grids = model.default_grid
    fg = FrameGrid(model, grids, accuracy)
    fg.check_adapted()
    fv = weight_field(fg, f)
    sl = fg.inner
    D = fg.data
    E1, E2 = fg.weighted_system(fv)
    b1, b2 = fg.bitension()
    bnorm = np.sqrt(b1 ** 2 + b2 ** 2)
    residuals = {"E1 (horizontal e1)": sup(E1, sl), "E2 (horizontal e2)": sup(E2, sl)}
    extra = {"sup|bitension|": sup(bnorm, sl), "bracket residual": D.bracket_residual}
    flags = []
    fields = {"f": fv, "E1": E1, "E2": E2, "|bitension|": bnorm}
    reduced_ok = None
    if sup(D.k2, sl) < tol:
        R1, R2 = fg.reduced_system(fv)
        extra["k2=0 line 1"] = sup(R1, sl)
        extra["k2=0 line 2"] = sup(R2, sl)
        reduced_ok = max(extra["k2=0 line 1"], extra["k2=0 line 2"]) < tol
        if model.c is not None and np.min(np.abs(np.asarray(D.k1[sl], dtype=float))) > tol:
            T1, T2, T3 = fg.space_form_system(fv, model.c)
            extra["space-form line 1"] = sup(T1, sl)
            extra["space-form line 2"] = sup(T2, sl)
            extra["inf|bitension certificate|"] = float(np.min(np.abs(np.asarray(T3[sl], dtype=float))))
            reduced_ok = reduced_ok and max(extra["space-form line 1"], extra["space-form line 2"]) < tol
        extra["reduced verdict"] = PASS if reduced_ok else "FAIL"
    report = ResidualReport(f"fbh-submersion {model.name}", residuals, tol, grid_label(grids),
                            flags, extra, fields)
    if reduced_ok is not None and reduced_ok != report.verdict:
        flags.append("full and reduced systems disagree")
    proper = report.verdict and extra["sup|bitension|"] > 10 * tol
    extra["proper"] = proper
    fields.update({k: getattr(D, k) for k in ("f1", "f2", "k1", "k2", "sigma")})
    report.frame_grid = fg
    return report


def sphere_weight_rhs(rho, y):
    f, df = y[0], y[1]
    s2 = np.sin(2 * rho)
    return np.array([df, -(2 * np.cos(2 * rho) - 4) / s2 * df
                     - (1 + 2 * np.sin(rho) ** 2) / np.sin(rho) ** 2 * f])


def solve_sphere_f(interval=(0.3, 1.2), f0=1.0, df0=0.0, count=181, tol=1e-13):
    """Positive solution of the S^3 weight equation from ``f(rho0) = f0``,
    ``f'(rho0) = df0``, trimmed to the nodes where it stays positive.
    Returns a :class:`SampledFunction` of ``rho`` (extended precision)."""
    a, b = float(interval[0]), float(interval[1])
    if not (0 < a < b < np.pi / 2):
        raise DomainError("interval must lie strictly inside (0, pi/2)")
    if f0 <= 0:
        raise FBHError("no admissible weight found from these initial conditions")
    y0 = np.array([f0, df0], dtype=EXTENDED)
    sol = integrate_ode(sphere_weight_rhs, y0, (a, b), tol, count=count)
    f = sol.values[:, 0]
    bad = np.nonzero(f <= 0)[0]
    n = int(bad[0]) if bad.size else f.size
    if n < 5:
        raise FBHError("no admissible weight found from these initial conditions")
    nodes = sol.grid.nodes_as(EXTENDED)
    g = Grid1D(a, float(nodes[n - 1]), n) if n < f.size else sol.grid
    flags = () if n == f.size else (f"trimmed at rho={float(nodes[n - 1]):.12g}",)
    return SampledFunction(g, f[:n], flags=flags)


def sphere_equation_residual(f, accuracy=DEFAULT_ACCURACY):
    """Sup-norm of the weight equation applied to sampled ``f``."""
    rho = f.grid.nodes_as(f.values.dtype.type)
    d1 = diff_array(f.values, f.grid.h, 1, accuracy)
    d2 = diff_array(f.values, f.grid.h, 2, accuracy)
    r = d2 - sphere_weight_rhs(rho, np.stack([f.values, d1]))[1]
    return sup(r, interior_slice(f.grid.count, MARGIN))


def export_submersion_csv(path, report):
    """Write coordinates, integrability data, f, residuals and |bitension|."""
    fg = report.frame_grid
    names = list(fg.model.chart.coords)
    cols = names + ["f1", "f2", "k1", "k2", "sigma", "f", "E1", "E2", "|bitension|"]
    arrays = [fg.coords[a] for a in range(3)] + [report.fields[k] for k in cols[3:]]
    flat = [np.asarray(a, dtype=float).ravel() for a in arrays]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for row in zip(*flat):
            w.writerow([f"{v:.17g}" for v in row])
