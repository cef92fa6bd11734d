"""Ruled surfaces in R^3 (cylinders, cones, tangent surfaces), their
fundamental forms and mean curvature, the f-biharmonic hypersurface
residual, and the cone and tangent-surface nonexistence probes.

Geometry is computed on a tensor grid in the (s, v) parametrization by
finite differences of the embedding. The f-biharmonic system for a surface
in R^3 with unit normal xi, shape operator A and mean curvature H is::

    Delta(fH) - fH |A|^2 = 0
    A(grad(fH)) + fH grad H = 0

with Delta the (positive) trace of the Hessian of the induced metric.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .curves import (MARGIN, ChiParams, SampledCurve, chi, frenet, _grid_text)
from .errors import DomainError, FBHError
from .numcore import (DEFAULT_ACCURACY, EXTENDED, Grid1D, as_real, diff_array, integrate_ode,
                      interior_slice)
from .report import FAIL, IMPOSSIBLE, MINIMAL, PASS, ResidualReport, sup

SINGULAR_FLOOR = 1e-10


def _grid(g, default):
    if g is None:
        g = default
    if isinstance(g, Grid1D):
        return g
    if isinstance(g, str):
        return Grid1D.parse(g)
    return Grid1D(float(g[0]), float(g[1]), int(g[2]))


# --- surfaces ----------------------------------------------------------------

@dataclass
class Cylinder:
    """X(s, v) = a(s) + v b with a planar unit-speed directrix and b = e3."""

    directrix: SampledCurve
    kind = "cylinder"

    def __post_init__(self):
        if self.directrix.chart.name != "euclidean2":
            raise FBHError("cylinder directrix must be a curve in euclidean2")

    @property
    def sgrid(self):
        return self.directrix.grid

    def embed(self, v):
        a = self.directrix.points
        X = np.zeros((len(a), len(v), 3), dtype=EXTENDED)
        X[:, :, 0] = a[:, 0][:, None]
        X[:, :, 1] = a[:, 1][:, None]
        X[:, :, 2] = v[None, :]
        return X

    @classmethod
    def from_curvature(cls, kappa, sgrid, tol=1e-15):
        """Directrix with signed curvature ``kappa(s)``: theta = int kappa,
        a = int (cos theta, sin theta), starting at the origin along e1."""
        sgrid = _grid(sgrid, None)

        def rhs(s, y):
            return np.array([kappa(s), np.cos(y[0]), np.sin(y[0])])

        sol = integrate_ode(rhs, np.zeros(3, dtype=EXTENDED), (sgrid.start, sgrid.end), tol,
                            count=sgrid.count)
        return cls(SampledCurve("euclidean2", sgrid, sol.values[:, 1:],
                                ["directrix integrated from curvature"]))


@dataclass
class Cone:
    """X(s, v) = apex + v b(s), b a unit-speed curve on the unit sphere."""

    directrix: SampledCurve  # in euclidean3, |b| = 1
    apex: tuple = (0.0, 0.0, 0.0)
    kind = "cone"

    def __post_init__(self):
        b = self.directrix.points
        if self.directrix.chart.dim != 3:
            raise FBHError("cone directrix must be a curve in euclidean3")
        err = float(np.max(np.abs(np.sum(b * b, axis=1) - 1)))
        if err > 1e-8:
            raise FBHError(f"cone directrix must lie on the unit sphere (deviation {err:.3g})")

    @property
    def sgrid(self):
        return self.directrix.grid

    def embed(self, v):
        b = self.directrix.points
        return np.asarray(self.apex, dtype=EXTENDED) + v[None, :, None] * b[:, None, :]

    def w(self, accuracy=DEFAULT_ACCURACY):
        """w(s) = b'' . (b' x b)."""
        b, h = self.directrix.points, self.sgrid.h
        b1 = diff_array(b, h, 1, accuracy)
        b2 = diff_array(b, h, 2, accuracy)
        return np.einsum("ni,ni->n", b2, np.cross(b1, b))

    @classmethod
    def circular(cls, alpha, sgrid=None):
        """Directrix (sin a cos(s/sin a), sin a sin(s/sin a), cos a)."""
        if not 0 < alpha < math.pi:
            raise DomainError("cone angle must lie in (0, pi)")
        sa = math.sin(alpha)
        sgrid = _grid(sgrid, (0.0, 0.95 * 2 * math.pi * sa, 201))
        s = sgrid.nodes_as(EXTENDED)
        a = EXTENDED(alpha)
        t = s / np.sin(a)
        b = np.stack([np.sin(a) * np.cos(t), np.sin(a) * np.sin(t),
                      np.full_like(s, np.cos(a))], axis=1)
        return cls(SampledCurve("euclidean3", sgrid, b, [f"circular directrix alpha={alpha:g}"]))

    @classmethod
    def from_sphere_chart(cls, curve):
        """Map a unit-speed curve in the (rho, phi) chart of S^2 into R^3."""
        if curve.chart.name != "sphere2":
            raise FBHError("expected a sphere2 curve")
        r, p = curve.points[:, 0], curve.points[:, 1]
        b = np.stack([np.cos(r) * np.cos(p), np.cos(r) * np.sin(p), np.sin(r)], axis=1)
        return cls(SampledCurve("euclidean3", curve.grid, b, list(curve.flags)))


@dataclass
class TangentSurface:
    """X(s, v) = a(s) + v a'(s) for a unit-speed edge a with curvature > 0."""

    edge: SampledCurve
    kind = "tangent"

    def __post_init__(self):
        if self.edge.chart.name != "euclidean3":
            raise FBHError("tangent-surface edge must be a curve in euclidean3")

    @property
    def sgrid(self):
        return self.edge.grid

    def embed(self, v):
        a = self.edge.points
        t = diff_array(a, self.sgrid.h, 1)
        return a[:, None, :] + v[None, :, None] * t[:, None, :]

    @classmethod
    def helix(cls, a=1.0, b=1.0, sgrid=None):
        """Edge (a cos t, a sin t, b t), t = s / sqrt(a^2 + b^2)."""
        sgrid = _grid(sgrid, (0.0, 2 * math.pi, 241))
        s = sgrid.nodes_as(EXTENDED)
        t = s / np.sqrt(EXTENDED(a * a + b * b))
        pts = np.stack([a * np.cos(t), a * np.sin(t), b * t], axis=1)
        return cls(SampledCurve("euclidean3", sgrid, pts, [f"helix edge a={a:g} b={b:g}"]))

    @classmethod
    def planar(cls, radius=1.0, sgrid=None):
        sgrid = _grid(sgrid, (0.0, 2 * math.pi, 241))
        s = sgrid.nodes_as(EXTENDED)
        pts = np.stack([radius * np.cos(s / radius), radius * np.sin(s / radius),
                        np.zeros_like(s)], axis=1)
        return cls(SampledCurve("euclidean3", sgrid, pts, ["planar circle edge"]))

    @classmethod
    def from_curvatures(cls, kappa, tau, sgrid, tol=1e-15):
        """Edge from curvature and torsion by integrating the Frenet-Serret
        equations from the standard frame at the origin."""
        sgrid = _grid(sgrid, None)

        def rhs(s, y):
            T, N, B = y[3:6], y[6:9], y[9:12]
            k, t = kappa(s), tau(s)
            return np.concatenate([T, k * N, -k * T + t * B, -t * N])

        y0 = np.zeros(12, dtype=EXTENDED)
        y0[3], y0[7], y0[11] = 1, 1, 1
        sol = integrate_ode(rhs, y0, (sgrid.start, sgrid.end), tol, count=sgrid.count)
        return cls(SampledCurve("euclidean3", sgrid, sol.values[:, :3],
                                ["edge integrated from curvature and torsion"]))


# --- geometry ----------------------------------------------------------------

@dataclass
class SurfaceGeometry:
    """Fundamental forms, shape operator and mean curvature on a grid.

    Arrays are indexed ``[i_s, i_v, ...]``. ``A`` is the (1,1) shape
    operator ``I^{-1} II`` in coordinate components.
    """

    s: np.ndarray
    v: np.ndarray
    hs: float
    hv: float
    I: np.ndarray
    II: np.ndarray
    A: np.ndarray
    H: np.ndarray
    normal: np.ndarray
    accuracy: int = DEFAULT_ACCURACY

    @property
    def Iinv(self):
        E, F, G = self.I[..., 0, 0], self.I[..., 0, 1], self.I[..., 1, 1]
        det = E * G - F * F
        out = np.empty_like(self.I)
        out[..., 0, 0], out[..., 1, 1] = G / det, E / det
        out[..., 0, 1] = out[..., 1, 0] = -F / det
        return out

    @property
    def sqrt_det(self):
        return np.sqrt(self.I[..., 0, 0] * self.I[..., 1, 1] - self.I[..., 0, 1] ** 2)

    @property
    def A_norm2(self):
        return np.einsum("...ij,...ji->...", self.A, self.A)

    def partials(self, u):
        return (diff_array(u, self.hs, 1, self.accuracy, axis=0),
                diff_array(u, self.hv, 1, self.accuracy, axis=1))

    def grad(self, u):
        us, uv = self.partials(u)
        return np.einsum("...ij,...j->...i", self.Iinv, np.stack([us, uv], axis=-1))

    def laplacian(self, u):
        """(1/sqrt g) d_i (sqrt g g^{ij} d_j u)."""
        r = self.sqrt_det
        gu = self.grad(u)
        return (diff_array(r * gu[..., 0], self.hs, 1, self.accuracy, axis=0)
                + diff_array(r * gu[..., 1], self.hv, 1, self.accuracy, axis=1)) / r

    def frame_components(self, V):
        """Components of a coordinate vector field in the orthonormal frame
        e1 = d_s/|d_s|, e2 = unit vector orthogonal to e1."""
        E, F, G = self.I[..., 0, 0], self.I[..., 0, 1], self.I[..., 1, 1]
        sE = np.sqrt(E)
        c1 = (E * V[..., 0] + F * V[..., 1]) / sE
        c2 = V[..., 1] * np.sqrt(E * G - F * F) / sE
        return c1, c2


def surface_geometry(surface, vgrid, accuracy=DEFAULT_ACCURACY):
    vgrid = _grid(vgrid, None)
    sgrid = surface.sgrid
    s, v = sgrid.nodes_as(EXTENDED), vgrid.nodes_as(EXTENDED)
    X = surface.embed(v)
    hs, hv = sgrid.h, vgrid.h
    Xs = diff_array(X, hs, 1, accuracy, axis=0)
    Xv = diff_array(X, hv, 1, accuracy, axis=1)
    Xss = diff_array(X, hs, 2, accuracy, axis=0)
    Xvv = diff_array(X, hv, 2, accuracy, axis=1)
    Xsv = diff_array(Xs, hv, 1, accuracy, axis=1)
    cr = np.cross(Xs, Xv)
    nrm = np.sqrt(np.sum(cr * cr, axis=-1))
    bad = nrm < SINGULAR_FLOOR
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise DomainError(f"parametrization singular at (s,v)=({float(s[i]):.6g}, {float(v[j]):.6g})")
    xi = cr / nrm[..., None]
    dot = lambda a, b: np.sum(a * b, axis=-1)
    I = np.empty(X.shape[:2] + (2, 2), dtype=X.dtype)
    I[..., 0, 0], I[..., 1, 1] = dot(Xs, Xs), dot(Xv, Xv)
    I[..., 0, 1] = I[..., 1, 0] = dot(Xs, Xv)
    II = np.empty_like(I)
    II[..., 0, 0], II[..., 1, 1] = dot(Xss, xi), dot(Xvv, xi)
    II[..., 0, 1] = II[..., 1, 0] = dot(Xsv, xi)
    geo = SurfaceGeometry(s, v, hs, hv, I, II, None, None, xi, accuracy)
    geo.A = np.einsum("...ij,...jk->...ik", geo.Iinv, II)
    geo.H = 0.5 * (geo.A[..., 0, 0] + geo.A[..., 1, 1])
    return geo


# --- weights on the grid -----------------------------------------------------

def _field_values(f, geo):
    if callable(f):
        S, V = np.meshgrid(geo.s, geo.v, indexing="ij")
        vals = np.broadcast_to(as_real(f(S, V)), S.shape).copy()
    else:
        vals = as_real(f)
        if vals.shape != geo.H.shape:
            raise FBHError(f"weight samples must have shape {geo.H.shape}")
    if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
        raise DomainError("weight must be positive and finite on the grid")
    return vals


def _slice2(geo, margin):
    return (interior_slice(len(geo.s), margin), interior_slice(len(geo.v), margin))


# --- residuals ---------------------------------------------------------------

def fbh_hypersurface_residual(surface, f, vgrid, tol=1e-6, accuracy=DEFAULT_ACCURACY,
                              margin=MARGIN, geo=None, name=None):
    """Sup-norm residuals of the f-biharmonic surface system on the grid."""
    geo = surface_geometry(surface, vgrid, accuracy) if geo is None else geo
    fv = _field_values(f, geo)
    H = geo.H
    fH = fv * H
    r1 = geo.laplacian(fH) - fH * geo.A_norm2
    V = np.einsum("...ij,...j->...i", geo.A, geo.grad(fH)) + fH[..., None] * geo.grad(H)
    r2, r3 = geo.frame_components(V)
    sl = _slice2(geo, margin)
    res = {"Delta(fH)-fH|A|^2": sup(r1[sl]), "A grad(fH)+fH grad H [e1]": sup(r2[sl]),
           "A grad(fH)+fH grad H [e2]": sup(r3[sl])}
    vg = _grid(vgrid, None)
    return ResidualReport(name or f"f-biharmonic {surface.kind}", res, tol,
                          grid=f"{_grid_text(surface.sgrid)},{_grid_text(vg)}",
                          extra={"sup|H|": sup(H[sl])},
                          fields={"H": H, "f": fv, "r1": r1, "r2": r2, "r3": r3})


def cylinder_cross_residual(cyl, f, vgrid, tol=1e-6, accuracy=DEFAULT_ACCURACY, margin=MARGIN):
    """The cylinder system written through the directrix curvature k and
    ln f, scaled by f/2 so it is comparable with the surface residual::

        (f/2) (k^2 (ln f)_s + 3/2 k k')
        (f/2) (k'' - k^3 + k[(ln f)_ss + (ln f)_vv + (ln f)_s^2 + (ln f)_v^2] + 2 (ln f)_s k')
    """
    vg = _grid(vgrid, None)
    fd = frenet(cyl.directrix, accuracy=accuracy, margin=margin)
    k = fd.kappa(1)
    hs = cyl.sgrid.h
    k1 = diff_array(k, hs, 1, accuracy)[:, None]
    k2 = diff_array(k, hs, 2, accuracy)[:, None]
    k = k[:, None]
    s, v = cyl.sgrid.nodes_as(EXTENDED), vg.nodes_as(EXTENDED)
    S, V = np.meshgrid(s, v, indexing="ij")
    fv = np.broadcast_to(as_real(f(S, V)), S.shape) if callable(f) else as_real(f)
    if np.any(fv <= 0):
        raise DomainError("weight must be positive and finite on the grid")
    L = np.log(fv)
    Ls = diff_array(L, hs, 1, accuracy, axis=0)
    Lv = diff_array(L, vg.h, 1, accuracy, axis=1)
    Lss = diff_array(L, hs, 2, accuracy, axis=0)
    Lvv = diff_array(L, vg.h, 2, accuracy, axis=1)
    c1 = 0.5 * fv * (k ** 2 * Ls + 1.5 * k1 * k)
    c2 = 0.5 * fv * (k2 - k ** 3 + k * (Lss + Lvv + Ls ** 2 + Lv ** 2) + 2 * Ls * k1)
    sl = (interior_slice(len(s), margin), interior_slice(len(v), margin))
    return ResidualReport("cylinder system via directrix curvature",
                          {"ln f first-order line": sup(c1[sl]), "second-order line": sup(c2[sl])},
                          tol, grid=f"{_grid_text(cyl.sgrid)},{_grid_text(vg)}",
                          fields={"c1": c1, "c2": c2})


# --- the psi / kappa_N families ----------------------------------------------

@dataclass(frozen=True)
class PsiParams:
    """psi(v, K): d1 e^{sqrt K v} + d2 e^{-sqrt K v} (K>0), d3 v + d4 (K=0),
    d5 sin(sqrt(-K) v) + d6 cos(sqrt(-K) v) (K<0)."""

    K: float
    d1: float = 1.0
    d2: float = 1.0
    d3: float = 1.0
    d4: float = 1.0
    d5: float = 1.0
    d6: float = 1.0


def psi(v, p):
    v = as_real(v)
    if p.K > 0:
        r = math.sqrt(p.K)
        return p.d1 * np.exp(r * v) + p.d2 * np.exp(-r * v)
    if p.K == 0:
        return p.d3 * v + p.d4
    r = math.sqrt(-p.K)
    return p.d5 * np.sin(r * v) + p.d6 * np.cos(r * v)


def kappaN(s, K, C1=1.0, C2=1.0, C3=4.0, C4=0.0, C5=0.0):
    """chi(s, 0, K): the directrix curvature of an f-biharmonic cylinder."""
    return chi(s, ChiParams(K, 0.0, C1, C2, C3, C4, C5))


def build_fbh_cylinder(chi_params, psi_params, sgrid, vgrid):
    """Cylinder whose directrix has signed curvature kappa_N(s, K) and the
    weight f(s, v) = psi(v, K) kappa_N(s, K)^(-3/2)."""
    if chi_params.c3 != 0:
        raise DomainError("cylinder directrix needs c3 = 0")
    if chi_params.C != psi_params.K:
        raise DomainError("kappa_N and psi must share the separation constant K")
    sgrid, vgrid = _grid(sgrid, None), _grid(vgrid, None)
    kn = chi(sgrid.nodes_as(EXTENDED), chi_params)
    if np.any(kn <= 0):
        raise DomainError("kappa_N must stay positive on the s-span")
    if np.any(psi(vgrid.nodes_as(EXTENDED), psi_params) <= 0):
        raise DomainError("psi must stay positive on the v-span")
    cyl = Cylinder.from_curvature(lambda s: chi(s, chi_params), sgrid)

    def f(S, V):
        return psi(V, psi_params) * chi(S, chi_params) ** -1.5

    return cyl, f


def separation_residuals(chi_params, psi_params, sgrid, vgrid, accuracy=DEFAULT_ACCURACY,
                         margin=MARGIN):
    """sup|3k'^2 - 2kk'' - 4k^2(k^2 - K)| on the s-grid and sup|psi'' - K psi|
    on the v-grid, both by finite differences of the closed forms."""
    sgrid, vgrid = _grid(sgrid, None), _grid(vgrid, None)
    K = chi_params.C
    k = chi(sgrid.nodes_as(EXTENDED), chi_params)
    d1 = diff_array(k, sgrid.h, 1, accuracy)
    d2 = diff_array(k, sgrid.h, 2, accuracy)
    rk = 3 * d1 ** 2 - 2 * k * d2 - 4 * k ** 2 * (k ** 2 - K)
    ps = psi(vgrid.nodes_as(EXTENDED), psi_params)
    rp = diff_array(ps, vgrid.h, 2, accuracy) - K * ps
    return (sup(rk, interior_slice(sgrid.count, margin)),
            sup(rp, interior_slice(vgrid.count, margin)))


# --- nonexistence probes -----------------------------------------------------

def _probe_status(sup_H, sup_probe, tol):
    if sup_H < tol:
        return MINIMAL
    return IMPOSSIBLE if sup_probe > tol else FAIL


def cone_probe(cone, vgrid=None, tol=1e-6, margin=MARGIN):
    """|H dH/dv| over the grid; it equals w^2/(4 v^3) and does not involve
    f. Nonzero anywhere means no weight makes the cone f-biharmonic."""
    vg = _grid(vgrid, (0.5, 2.0, 121))
    if vg.start <= 0:
        raise DomainError("cone probe needs v > 0")
    geo = surface_geometry(cone, vg)
    H = geo.H
    dHv = diff_array(H, vg.h, 1, axis=1)
    probe = np.abs(H * dHv)
    w = cone.w()
    closed = (w ** 2)[:, None] / (4 * geo.v[None, :] ** 3)
    sl = _slice2(geo, margin)
    sH, sp = sup(H[sl]), sup(probe[sl])
    rep = ResidualReport("cone probe |H dH/dv|", {"|H dH/dv|": sp}, tol,
                         grid=f"{_grid_text(cone.sgrid)},{_grid_text(vg)}",
                         extra={"inf|H dH/dv|": float(np.min(probe[sl])), "sup|H|": sH,
                                "inf w^2/(4v^3)": float(np.min(closed[sl])),
                                "sup|probe - w^2/(4v^3)|": sup((probe - closed)[sl]),
                                "sup|H - w/(2v)|": sup((np.abs(H) - np.abs(w)[:, None]
                                                        / (2 * geo.v[None, :]))[sl])},
                         fields={"H": H, "probe": probe},
                         status=_probe_status(sH, sp, tol))
    return rep


def tangent_probe(tsurf, vgrid=None, tol=1e-6, margin=MARGIN):
    """tau^2 v^2 + [(tau/k)^2]' v + (tau/k)^2 over the grid (no f enters).

    Also reports |H dH/dv| from the surface geometry, whose vanishing is
    the same condition, and the agreement of |H| with |tau|/(2 v k)."""
    vg = _grid(vgrid, (0.5, 2.0, 121))
    if vg.start <= 0:
        raise DomainError("tangent-surface probe needs v > 0")
    fd = frenet(tsurf.edge, margin=margin)
    k, tau = fd.kappa(1), fd.kappa(2)
    if np.any(k[interior_slice(len(k), margin)] <= 0):
        raise DomainError("tangent surface needs edge curvature > 0")
    q = (tau / k) ** 2
    dq = diff_array(q, tsurf.sgrid.h, 1)
    geo = surface_geometry(tsurf, vg)
    v = geo.v[None, :]
    lhs = (tau ** 2)[:, None] * v ** 2 + dq[:, None] * v + q[:, None]
    H = geo.H
    probe = np.abs(H * diff_array(H, vg.h, 1, axis=1))
    sl = _slice2(geo, margin)
    sH, sl_lhs = sup(H[sl]), sup(lhs[sl])
    rep = ResidualReport("tangent-surface probe", {"tau^2 v^2+[(tau/k)^2]' v+(tau/k)^2": sl_lhs},
                         tol, grid=f"{_grid_text(tsurf.sgrid)},{_grid_text(vg)}",
                         extra={"inf|lhs|": float(np.min(np.abs(lhs[sl]))), "sup|H|": sH,
                                "sup|H dH/dv|": sup(probe[sl]),
                                "sup|H - tau/(2vk)|": sup((np.abs(H) - (tau / k)[:, None]
                                                           / (2 * v))[sl])},
                         fields={"H": H, "lhs": lhs, "probe": probe},
                         status=_probe_status(sH, sl_lhs, tol))
    return rep


# --- export ------------------------------------------------------------------

def export_surface_csv(path, report):
    """Columns s, v, H, f, residual1, residual2, residual3 (17 significant
    digits); missing fields are written as nan."""
    H = report.fields["H"]
    ns, nv = H.shape
    s0, v0 = report.grid.split(",")
    S, V = np.meshgrid(Grid1D.parse(s0).nodes, Grid1D.parse(v0).nodes, indexing="ij")
    cols = [S, V, H] + [report.fields.get(k, np.full(H.shape, np.nan))
                        for k in ("f", "r1", "r2", "r3")]
    if "probe" in report.fields:
        cols[4] = report.fields.get("lhs", report.fields["probe"])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s", "v", "H", "f", "residual1", "residual2", "residual3"])
        for row in np.stack([np.asarray(c, dtype=float).ravel() for c in cols], axis=1):
            w.writerow([f"{x:.17g}" for x in row])


__all__ = ["Cylinder", "Cone", "TangentSurface", "SurfaceGeometry", "PsiParams",
           "surface_geometry", "fbh_hypersurface_residual", "cylinder_cross_residual", "psi",
           "kappaN", "build_fbh_cylinder", "separation_residuals", "cone_probe", "tangent_probe",
           "export_surface_csv", "PASS", "FAIL", "IMPOSSIBLE", "MINIMAL"]
