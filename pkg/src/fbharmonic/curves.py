"""Curves in constant-curvature charts: Frenet frames, the chi family of
curvature profiles, the f-biharmonic curve system and the curve builders.

Residual lines are the components of ``f tau_2 + 2 f' D^2 T + f'' D T`` in
the Frenet frame (``T = gamma'``, ``D`` the covariant derivative along the
curve)::

    tangential  f (-3 k1 k1')               - 2 f' k1^2
    F2          f (k1'' - k1 k2^2 - k1^3 + k1 R(F1,F2,F1,F2)) + 2 f' k1' + f'' k1
    F3          f (2 k1' k2 + k1 k2' + k1 R(F1,F2,F1,F3))     + 2 f' k1 k2
    F4          f (k1 k2 k3 + k1 R(F1,F2,F1,F4))
    higher      f k1 R(F1,F2,F1,V),   V orthogonal to F1..F4

with ``R(X,Y,Z,W) = C(<X,Z><Y,W> - <X,W><Y,Z>)``.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .errors import DomainError, FBHError, FrenetDegenerate
from .numcore import (DEFAULT_ACCURACY, EXTENDED, Grid1D, SampledFunction, as_real, diff_array,
                      integrate_ode, interior_slice, quadrature)
from .report import FAIL, PASS, ResidualReport, sup
from .spaceform import covariant_derivative, curvature4, get_chart

FRENET_FLOOR = 1e-8
MARGIN = 12
SPEED_TOL = 1e-6


# --- sampled curves ----------------------------------------------------------

@dataclass
class SampledCurve:
    """Arclength-sampled curve in a chart; unit speed is checked."""

    chart: object
    grid: Grid1D
    points: np.ndarray
    flags: list = field(default_factory=list)
    check_speed: bool = True

    def __post_init__(self):
        self.chart = get_chart(self.chart)
        self.points = as_real(self.points)
        if self.points.shape != (self.grid.count, self.chart.dim):
            raise FBHError(f"points must have shape ({self.grid.count}, {self.chart.dim})")
        if not np.all(np.isfinite(self.points)):
            raise FBHError("invalid samples")
        self.chart.check_domain(self.points)
        if self.check_speed:
            err = self.speed_error()
            if err > SPEED_TOL:
                raise FBHError(f"curve is not unit speed (max deviation {err:.3g})")

    @property
    def s(self):
        return self.grid.nodes_as(self.points.dtype.type)

    def velocity(self, accuracy=DEFAULT_ACCURACY):
        return diff_array(self.points, self.grid.h, 1, accuracy)

    def speed(self):
        return self.chart.norm(self.points, self.velocity())

    def speed_error(self, margin=MARGIN):
        sl = interior_slice(self.grid.count, margin)
        return sup(self.speed() - 1.0, sl)


def pad_embed(curve, n):
    """Zero-pad a Euclidean curve into ``euclidean{n}``."""
    m = curve.chart.dim
    if not curve.chart.name.startswith("euclidean"):
        raise FBHError("pad_embed needs a Euclidean chart")
    if n < m:
        raise FBHError("target dimension smaller than source")
    pts = np.zeros((curve.grid.count, n), dtype=curve.points.dtype)
    pts[:, :m] = curve.points
    return SampledCurve(f"euclidean{n}", curve.grid, pts, list(curve.flags), curve.check_speed)


# --- the chi family ----------------------------------------------------------

@dataclass(frozen=True)
class ChiParams:
    """Constants of the chi family; which ones matter depends on ``sign(C)``.

    C < 0 uses C1, C2 > 0; C = 0 uses C3 > 0, C4; C > 0 uses C4, C5.
    """

    C: float
    c3: float = 0.0
    C1: float = 1.0
    C2: float = 1.0
    C3: float = 4.0
    C4: float = 0.0
    C5: float = 0.0

    def __post_init__(self):
        vals = (self.C, self.c3, self.C1, self.C2, self.C3, self.C4, self.C5)
        if not all(math.isfinite(v) for v in vals):
            raise DomainError("chi parameters must be finite")
        A = self.A
        if self.C < 0:
            if self.C1 <= 0 or self.C2 <= 0:
                raise DomainError("chi with C<0 needs C1>0 and C2>0")
            if 4 * self.C1 * self.C2 + A / self.C <= 0:
                raise DomainError("chi with C<0 needs 4*C1*C2 + (1+c3^2)/C > 0")
        elif self.C == 0 and self.C3 <= 0:
            raise DomainError("chi with C=0 needs C3>0")

    @property
    def A(self):
        return 1.0 + self.c3 ** 2

    @property
    def branch(self):
        """The two free constants of the active branch."""
        if self.C < 0:
            return (self.C1, self.C2)
        if self.C == 0:
            return (self.C3, self.C4)
        return (self.C4, self.C5)

    def with_branch(self, a, b):
        if self.C < 0:
            return ChiParams(self.C, self.c3, C1=a, C2=b)
        if self.C == 0:
            return ChiParams(self.C, self.c3, C3=a, C4=b)
        return ChiParams(self.C, self.c3, C4=a, C5=b)


def _chi_denominator(s, C, A, a, b):
    s = as_real(s)
    if C < 0:
        r = math.sqrt(-C)
        return a * np.exp(2 * r * s) + b * np.exp(-2 * r * s) + np.sqrt(4 * a * b + A / C)
    if C == 0:
        return (16 * A + a ** 2 * (s + b) ** 2) / (4 * a)
    r = math.sqrt(C)
    return a * np.cos(2 * r * s) + b * np.sin(2 * r * s) + math.sqrt(A / C + a * a + b * b)


def chi(s, p):
    """The chi curvature profile (``+`` root) at ``s``."""
    den = _chi_denominator(s, p.C, p.A, *p.branch)
    if not np.all(np.isfinite(den)) or np.any(den <= 0):
        raise DomainError("outside solution domain")
    return 1.0 / den


def verify_curvature_ode(y, A, C, tol=1e-6, accuracy=DEFAULT_ACCURACY, margin=MARGIN):
    """Residual of ``3y'^2 - 2yy'' = 4y^2(Ay^2 - C)`` on sampled ``y``."""
    v = y.values
    d1 = diff_array(v, y.grid.h, 1, accuracy)
    d2 = diff_array(v, y.grid.h, 2, accuracy)
    r = 3 * d1 ** 2 - 2 * v * d2 - 4 * v ** 2 * (A * v ** 2 - C)
    sl = interior_slice(y.grid.count, margin)
    return ResidualReport("curvature ODE", {"3y'^2-2yy''-4y^2(Ay^2-C)": sup(r, sl)}, tol,
                          grid=_grid_text(y.grid), fields={"residual": r})


def _grid_text(g):
    return f"{g.start:g}:{g.end:g}:{g.count}"


# --- weights -----------------------------------------------------------------

@dataclass(frozen=True)
class ScalarWeight:
    """Positive weight ``f(s)`` along a curve.

    kinds: ``"kappa"`` (c1 * k1^(-3/2) with k1 from the Frenet data),
    ``"chi"`` (c1 * chi(s)^(-3/2), closed form), ``"constant"``,
    ``"sampled"`` (a SampledFunction on the curve grid) and ``"callable"``.
    """

    kind: str
    c1: float = 1.0
    chi_params: ChiParams = None
    samples: SampledFunction = None
    fn: object = None

    def __post_init__(self):
        if self.kind not in ("kappa", "chi", "constant", "sampled", "callable"):
            raise FBHError(f"unknown weight kind {self.kind!r}")
        if not (self.c1 > 0):
            raise DomainError("weight constant must be positive")

    @classmethod
    def from_kappa(cls, c1=1.0):
        return cls("kappa", c1)

    @classmethod
    def from_chi(cls, params, c1=1.0):
        return cls("chi", c1, chi_params=params)

    @classmethod
    def constant(cls, value):
        return cls("constant", value)

    @classmethod
    def sampled(cls, samples):
        return cls("sampled", samples=samples)

    @classmethod
    def from_callable(cls, fn):
        return cls("callable", fn=fn)

    def scaled(self, factor):
        if self.kind in ("kappa", "chi", "constant"):
            return ScalarWeight(self.kind, self.c1 * factor, self.chi_params)
        if self.kind == "sampled":
            smp = self.samples
            return ScalarWeight.sampled(SampledFunction(smp.grid, smp.values * factor))
        fn = self.fn
        return ScalarWeight.from_callable(lambda s: factor * np.asarray(fn(s)))

    def values(self, grid, kappa1=None, dtype=float):
        s = grid.nodes_as(dtype)
        if self.kind == "kappa":
            if kappa1 is None:
                raise FBHError("kappa weight needs Frenet curvature")
            with np.errstate(divide="ignore"):
                v = self.c1 * np.asarray(kappa1) ** -1.5
        elif self.kind == "chi":
            v = self.c1 * chi(s, self.chi_params) ** -1.5
        elif self.kind == "constant":
            v = np.full(grid.count, self.c1, dtype=dtype)
        elif self.kind == "sampled":
            if self.samples.grid != grid:
                v = self.samples(s)
            else:
                v = self.samples.values
        else:
            v = np.broadcast_to(as_real(self.fn(s)), s.shape).copy()
        if not np.all(np.isfinite(v)) or np.any(v <= 0):
            raise DomainError("weight must be positive and finite on the span")
        return v


# --- Frenet frames -----------------------------------------------------------

@dataclass
class FrenetData:
    """Frames ``frames[i]`` = F_{i+1} (each (n, dim)) and curvatures
    ``kappas[i]`` = k_{i+1}; curvatures past the truncation point are 0."""

    curve: SampledCurve
    frames: list
    kappas: np.ndarray
    degenerate: int = 0  # index i of the first k_i that is only partly degenerate, 0 if none
    flags: list = field(default_factory=list)

    @property
    def depth(self):
        return len(self.frames)

    def kappa(self, i):
        if i < 1:
            raise FBHError("curvatures are indexed from 1")
        if i > len(self.kappas):
            return np.zeros(self.curve.grid.count, dtype=self.kappas.dtype)
        return self.kappas[i - 1]


def frenet(curve, k=None, floor=FRENET_FLOOR, accuracy=DEFAULT_ACCURACY, margin=MARGIN):
    """Frenet frames by Gram-Schmidt on iterated covariant derivatives.

    ``k`` frames are attempted (default ``min(dim, 4)``). A curvature below
    ``floor`` on all interior nodes truncates the frame cleanly; one that
    falls below it on part of the span truncates with ``degenerate`` set.
    """
    chart = curve.chart
    k = min(chart.dim, 4) if k is None else min(k, chart.dim)
    n = curve.grid.count
    P = curve.points
    sl = interior_slice(n, margin)
    v = curve.velocity(accuracy)
    F1 = v / chart.norm(P, v)[:, None]
    frames = [F1]
    kappas = np.zeros((max(k - 1, 0), n), dtype=P.dtype)
    flags = []
    degenerate = 0
    for i in range(1, k):
        dF = covariant_derivative(chart, curve, frames[-1], accuracy)
        W = dF.copy()
        for Fj in frames:
            W -= chart.inner(P, dF, Fj)[:, None] * Fj
        norm = chart.norm(P, W)
        inner = norm[sl]
        if np.all(inner < floor):
            flags.append(f"kappa{i} vanishes; frame truncated at F{i}")
            break
        kappas[i - 1] = norm
        if np.any(inner < floor):
            s = curve.s[sl][inner < floor]
            flags.append(f"kappa{i} below floor on [{s.min():.6g}, {s.max():.6g}]; "
                         f"frame truncated at F{i}")
            degenerate = i
            break
        Fn = W / norm[:, None]
        kappas[i - 1] = chart.inner(P, dF, Fn)
        frames.append(Fn)
    return FrenetData(curve, frames, kappas, degenerate, flags)


def frenet_system_error(fd, accuracy=DEFAULT_ACCURACY, margin=MARGIN):
    """sup |D F_i + k_{i-1} F_{i-1} - k_i F_{i+1}| over interior nodes."""
    chart, curve = fd.curve.chart, fd.curve
    P = curve.points
    sl = interior_slice(curve.grid.count, margin)
    worst = 0.0
    for i, Fi in enumerate(fd.frames, start=1):
        r = covariant_derivative(chart, curve, Fi, accuracy)
        if i > 1:
            r = r + fd.kappa(i - 1)[:, None] * fd.frames[i - 2]
        if i < fd.depth:
            r = r - fd.kappa(i)[:, None] * fd.frames[i]
        elif i < chart.dim:
            continue  # last frame: its successor is not computed
        worst = max(worst, sup(chart.norm(P, r), sl))
    return worst


def frame_orthonormality_error(fd, margin=MARGIN):
    chart, P = fd.curve.chart, fd.curve.points
    sl = interior_slice(fd.curve.grid.count, margin)
    worst = 0.0
    for i, Fi in enumerate(fd.frames):
        for j, Fj in enumerate(fd.frames[: i + 1]):
            worst = max(worst, sup(chart.inner(P, Fi, Fj) - (i == j), sl))
    return worst


# --- the f-biharmonic curve system -------------------------------------------

def _curvature_vector(chart, P, F1, F2):
    """Vector ``V`` with ``<V, W> = R(F1, F2, F1, W)`` for every ``W``."""
    n, m = P.shape
    g = chart.diag(P)
    out = np.empty((n, m), dtype=P.dtype)
    for a in range(m):
        E = np.zeros((n, m), dtype=P.dtype)
        E[:, a] = 1.0
        out[:, a] = curvature4(chart, P, F1, F2, F1, E) / g[:, a]
    return out


def _orthogonal_part(chart, P, V, frames):
    W = V.copy()
    for F in frames:
        W -= chart.inner(P, V, F)[:, None] * F
    return chart.norm(P, W)


def _curve_lines(fd, f, accuracy, margin):
    chart, curve = fd.curve.chart, fd.curve
    if fd.degenerate == 1:
        raise FrenetDegenerate("Frenet degenerate: kappa1 vanishes on part of the span")
    P, h, n, dim = curve.points, curve.grid.h, curve.grid.count, chart.dim
    d = lambda a, o: diff_array(a, h, o, accuracy)
    k1, k2, k3 = fd.kappa(1), fd.kappa(2), fd.kappa(3)
    f1, f2 = d(f, 1), d(f, 2)
    k1p, k1pp, k2p = d(k1, 1), d(k1, 2), d(k2, 1)
    F = fd.frames
    if len(F) >= 2:
        Rv = _curvature_vector(chart, P, F[0], F[1])
        R = lambda j: (chart.inner(P, Rv, F[j - 1]) if j <= len(F)
                       else _orthogonal_part(chart, P, Rv, F))
    else:
        R = lambda j: np.zeros(n)
    lines = {
        "tangential": f * (-3 * k1 * k1p) - 2 * f1 * k1 ** 2,
        "F2": f * (k1pp - k1 * k2 ** 2 - k1 ** 3 + k1 * R(2)) + 2 * f1 * k1p + f2 * k1,
    }
    skipped = []
    if dim >= 3:
        if fd.degenerate == 2:
            skipped.append("F3")
        else:
            lines["F3"] = f * (2 * k1p * k2 + k1 * k2p + k1 * R(3)) + 2 * f1 * k1 * k2
    if dim >= 4:
        if fd.degenerate in (2, 3):
            skipped.append("F4")
        else:
            lines["F4"] = f * (k1 * k2 * k3 + k1 * R(4))
    if dim > 4:
        if len(F) >= 2:
            rest = _orthogonal_part(chart, P, Rv, F[:4]) if len(F) >= 4 else np.zeros(n)
            lines["higher"] = f * k1 * rest
        else:
            lines["higher"] = np.zeros(n)
    return lines, skipped


def fbh_curve_residual(curve, weight, tol=1e-6, fd=None, accuracy=DEFAULT_ACCURACY,
                       margin=MARGIN, name="f-biharmonic curve"):
    """Sup-norm residuals of the f-biharmonic curve system.

    Also reports the residual of the plain biharmonic system (f = 1) as
    ``sup|tau2|``; the curve is proper when that is not small.
    """
    fd = frenet(curve, accuracy=accuracy, margin=margin) if fd is None else fd
    fvals = weight.values(curve.grid, fd.kappa(1), curve.points.dtype.type)
    lines, skipped = _curve_lines(fd, fvals, accuracy, margin)
    bih, _ = _curve_lines(fd, np.ones_like(fvals), accuracy, margin)
    sl = interior_slice(curve.grid.count, margin)
    res = {k: sup(v, sl) for k, v in lines.items()}
    tau2 = max(sup(v, sl) for v in bih.values())
    flags = list(curve.flags) + list(fd.flags) + [f"line {k} skipped (frame truncated)"
                                                  for k in skipped]
    rep = ResidualReport(name, res, tol, grid=_grid_text(curve.grid), flags=flags,
                         extra={"sup|tau2|": tau2, "proper": bool(tau2 > 10 * tol)},
                         fields=lines)
    rep.fields["f"] = fvals
    return rep


# --- classification ----------------------------------------------------------

@dataclass
class Classification:
    verdict: str  # "not-proper-fbh" | "case-i" | "case-ii"
    params: ChiParams = None
    misfit: float = float("inf")
    weight: ScalarWeight = None
    c3: float = 0.0
    note: str = ""


def _fit_chi(s, k1, C, c3, seeds=9):
    """Least-squares fit of k1 to chi(., c3, C); returns (params, sup misfit)."""
    A = 1.0 + c3 * c3
    s, k1 = np.asarray(s, dtype=float), np.asarray(k1, dtype=float)
    scale = float(np.max(np.abs(k1)))

    if C < 0:
        def unpack(x):
            return math.exp(x[0]), math.exp(x[1])
        starts = [(a, b) for a in np.linspace(-4, 4, seeds) for b in np.linspace(-4, 4, seeds)
                  if 4 * math.exp(a + b) + A / C > 0]
    elif C == 0:
        def unpack(x):
            return math.exp(x[0]), x[1]
        starts = [(a, b) for a in np.linspace(-4, 4, seeds)
                  for b in np.linspace(-abs(s).max(), abs(s).max(), seeds)]
    else:
        def unpack(x):
            return x[0], x[1]
        grid = np.concatenate([-np.logspace(-3, 2, seeds // 2 + 1), [0.0],
                               np.logspace(-3, 2, seeds // 2 + 1)])
        starts = [(a, b) for a in grid for b in grid]

    def resid(x):
        a, b = unpack(x)
        with np.errstate(all="ignore"):
            den = _chi_denominator(s, C, A, a, b)
        r = 1.0 / den - k1
        r[~np.isfinite(r) | (den <= 0)] = 10 * scale + 1.0
        return r / scale

    best = None
    for x0 in starts:
        r0 = resid(np.array(x0, dtype=float))
        if best is not None and np.max(np.abs(r0)) > 1e3:
            continue
        try:
            sol = least_squares(resid, np.array(x0, dtype=float), xtol=1e-15, ftol=1e-15,
                                gtol=1e-15, max_nfev=400)
        except (ValueError, FloatingPointError):
            continue
        m = np.max(np.abs(sol.fun)) * scale
        if best is None or m < best[1]:
            best = (sol.x, m)
    if best is None:
        return None, float("inf")
    a, b = (float(v) for v in unpack(best[0]))
    try:
        p = ChiParams(C, c3).with_branch(a, b)
    except DomainError:
        return None, float("inf")
    return p, best[1]


def classify_curve(fd, C=None, tol=1e-6, margin=MARGIN):
    """Decide whether the curvature data are those of a proper
    f-biharmonic curve and recover the chi constants and the weight."""
    C = fd.curve.chart.curvature if C is None else C
    if C is None:
        raise FBHError("classification needs a constant-curvature chart")
    sl = interior_slice(fd.curve.grid.count, margin)
    s = fd.curve.s[sl]
    k1, k2, k3 = fd.kappa(1)[sl], fd.kappa(2)[sl], fd.kappa(3)[sl]
    if fd.degenerate == 1 or np.min(k1) < FRENET_FLOOR:
        raise FBHError("not classifiable on this span")
    if np.max(np.abs(k2)) < tol:
        verdict, c3 = "case-i", 0.0
    else:
        ratio = k2 / k1
        c3 = float(np.mean(ratio))
        if np.max(np.abs(ratio - c3)) > tol * max(1.0, abs(c3)) or np.max(np.abs(k3)) > tol \
                or fd.degenerate:
            return Classification("not-proper-fbh", note="k2/k1 not constant or k3 nonzero")
        verdict = "case-ii"
    if np.max(k1) - np.min(k1) < tol:
        return Classification("not-proper-fbh", c3=c3,
                              note="constant curvature: f is constant, so not proper")
    p, misfit = _fit_chi(s, k1, float(C), c3)
    misfit = float(misfit)
    if p is None or misfit >= tol:
        return Classification("not-proper-fbh", p, misfit, c3=c3,
                              note="curvature is not of chi form")
    return Classification(verdict, p, misfit, ScalarWeight.from_chi(p), c3)


# --- builders ----------------------------------------------------------------

def _span_grid(span, count):
    if isinstance(span, Grid1D):
        return span
    if isinstance(span, str):
        return Grid1D.parse(span)
    return Grid1D(float(span[0]), float(span[1]), count)


def build_planar_curve(C3, C4=0.0, span=(-5.0, 5.0), count=801, tol=1e-12):
    """Planar curve with curvature 4C3/(16 + C3^2 (s+C4)^2)."""
    if not C3 > 0:
        raise DomainError("C3 must be positive")
    g = _span_grid(span, count)
    if C4 == 0:
        s, c = g.nodes_as(EXTENDED), EXTENDED(C3)
        r = np.sqrt(16 + c ** 2 * s ** 2)
        pts = np.stack([4 * np.log(r + c * s) / c - 4 * np.log(c) / c, r / c], axis=1)
        return SampledCurve("euclidean2", g, pts, ["closed form"])
    x, y, _ = _helix_profile(math.pi / 2, C3, C4, g, tol)
    return SampledCurve("euclidean2", g, np.stack([x, y], axis=1), ["integrated (x'' equation)"])


def _helix_profile(omega, C3, C4, g, tol):
    """Integrate x'' = -sqrt(sin^2 w - x'^2)/sin w * chi and y = int sqrt(...).

    The initial slope is taken on the branch theta = atan(C3 (s+C4) sin w / 4)
    + pi/2 of x' = sin w cos theta, which keeps the root positive on all of R.
    """
    sw = math.sin(omega)
    p = ChiParams(0.0, math.cos(omega) / sw, C3=C3, C4=C4)
    s0 = g.start
    theta0 = math.atan(C3 * (s0 + C4) * sw / 4) + math.pi / 2

    def rhs(s, y):
        root = np.sqrt(np.maximum(sw * sw - y[1] * y[1], 0))
        return np.array([y[1], -root / sw * chi(s, p)])

    y0 = np.array([0.0, sw * math.cos(theta0)], dtype=EXTENDED)
    sol = integrate_ode(rhs, y0, (g.start, g.end), tol, count=g.count)
    x, xp = sol.values[:, 0], sol.values[:, 1]
    yp = np.sqrt(np.maximum(sw * sw - xp ** 2, 0.0))
    y = quadrature(SampledFunction(g, yp)).values
    return x, y, p


def build_helix(omega=math.pi / 4, C3=4.0, C4=0.0, span=(-5.0, 5.0), count=801, tol=1e-12):
    """General helix with k2/k1 = cot(omega) and chi curvature."""
    sw, cw = math.sin(omega), math.cos(omega)
    if abs(sw * cw) < 1e-12:
        raise DomainError("omega must satisfy sin(omega) cos(omega) != 0")
    if not C3 > 0:
        raise DomainError("C3 must be positive")
    g = _span_grid(span, count)
    s = g.nodes_as(EXTENDED)
    if math.isclose(omega, math.pi / 4) and C4 == 0:
        c, rt2 = EXTENDED(C3), np.sqrt(EXTENDED(2))
        r = np.sqrt(64 + 2 * c ** 2 * s ** 2)
        x = 4 * np.log(r + rt2 * c * s) / c - 4 * np.log(c) / c
        pts = np.stack([x, r / (2 * c), s * rt2 / 2], axis=1)
        return SampledCurve("euclidean3", g, pts, ["closed form"])
    x, y, _ = _helix_profile(omega, C3, C4, g, tol)
    return SampledCurve("euclidean3", g, np.stack([x, y, s * np.cos(EXTENDED(omega))], axis=1),
                        ["integrated (helix equation)"])


def _stop_near_unit_slope(eps=1e-6):
    return lambda s, y: 1.0 - y[1] ** 2 < eps


def build_spherical_curve(C4=1.0, C5=0.0, rho0=-0.5, drho0=0.5, span=(-1.5, 1.5), count=801,
                          tol=1e-12):
    """Curve on (S^2, d rho^2 + cos^2 rho d phi^2) with geodesic curvature chi(s, 0, 1)."""
    if abs(drho0) >= 1:
        raise DomainError("initial slope must satisfy |rho'| < 1")
    p = ChiParams(1.0, C4=C4, C5=C5)

    def rhs(s, y):
        q = np.sqrt(np.maximum(1 - y[1] ** 2, 0))
        return np.array([y[1], -(1 - y[1] ** 2) * np.tan(y[0]) - q * chi(s, p)])

    return _chart_curve("sphere2", rhs, rho0, drho0, span, count, tol,
                        lambda r, rp: np.sqrt(np.maximum(1 - rp ** 2, 0)) / np.cos(r))


def build_hyperbolic_curve(C1=1.0, C2=1.0, u0=0.0, du0=0.0, span=(-1.0, 1.0), count=801,
                           tol=1e-12):
    """Curve on (H^2, du^2 + e^{2u} dv^2) with geodesic curvature chi(s, 0, -1)."""
    if abs(du0) >= 1:
        raise DomainError("initial slope must satisfy |u'| < 1")
    p = ChiParams(-1.0, C1=C1, C2=C2)

    def rhs(s, y):
        q = np.sqrt(np.maximum(1 - y[1] ** 2, 0))
        return np.array([y[1], (1 - y[1] ** 2) - q * chi(s, p)])

    return _chart_curve("hyperbolic2", rhs, u0, du0, span, count, tol,
                        lambda u, up: np.sqrt(np.maximum(1 - up ** 2, 0)) / np.exp(u))


def _chart_curve(chart, rhs, a0, da0, span, count, tol, second):
    g = _span_grid(span, count)
    ch = get_chart(chart)

    def stop(s, y):
        return 1.0 - y[1] ** 2 < 1e-6 or not ch.inside(np.array([[y[0], 0.0]]), 1e-3)[0]

    y0 = np.array([a0, da0], dtype=EXTENDED)
    sol = integrate_ode(rhs, y0, (g.start, g.end), tol, count=g.count, stop=stop)
    a, ap = sol.values[:, 0], sol.values[:, 1]
    b = quadrature(SampledFunction(sol.grid, second(a, ap))).values
    return SampledCurve(chart, sol.grid, np.stack([a, b], axis=1), list(sol.flags))


# --- export ------------------------------------------------------------------

def export_curve_csv(path, curve, fd=None, weight=None):
    """Columns s, x1..xn, kappa1, kappa2, f (17 significant digits)."""
    fd = frenet(curve) if fd is None else fd
    n = curve.grid.count
    fvals = weight.values(curve.grid, fd.kappa(1), curve.points.dtype.type) if weight is not None else np.full(n, np.nan)
    header = ["s"] + [f"x{i + 1}" for i in range(curve.chart.dim)] + ["kappa1", "kappa2", "f"]
    rows = np.column_stack([curve.s, curve.points, fd.kappa(1), fd.kappa(2), fvals])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([f"{v:.17g}" for v in row])


__all__ = [
    "SampledCurve", "FrenetData", "ChiParams", "ScalarWeight", "Classification", "chi",
    "verify_curvature_ode", "frenet", "frenet_system_error", "frame_orthonormality_error",
    "fbh_curve_residual", "classify_curve", "build_planar_curve", "build_helix",
    "build_spherical_curve", "build_hyperbolic_curve", "pad_embed", "export_curve_csv",
    "PASS", "FAIL",
]
