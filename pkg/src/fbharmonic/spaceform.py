"""Coordinate charts of the model geometries.

All built-in charts have diagonal metrics ``g = diag(g_1(p), ..., g_n(p))``.
Each chart carries the diagonal entries and their partial derivatives in
closed form; the Christoffel symbols follow from the diagonal-metric
identity

    Gamma^k_ij = (d_ik d_j g_kk + d_jk d_i g_kk - d_ij d_k g_ii) / (2 g_kk).

Curvature sign convention: for an orthonormal pair ``X, Y`` in a chart of
constant curvature ``C``, ``curvature4(X, Y, X, Y) == C``.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, FBHError
from .numcore import DEFAULT_ACCURACY, diff_array


@dataclass(frozen=True)
class SpaceFormChart:
    name: str
    dim: int
    curvature: Optional[float]
    coords: tuple
    diag: Callable  # (n, dim) -> (n, dim)
    ddiag: Callable  # (n, dim) -> (n, dim, dim): [., i, k] = d_k g_ii
    inside: Callable  # (n, dim), margin -> bool mask

    def _pts(self, P):
        P = np.atleast_2d(np.asarray(P, dtype=float))
        if P.shape[-1] != self.dim:
            raise FBHError(f"{self.name}: expected points of dimension {self.dim}")
        return P

    def metric(self, P):
        d = self.diag(self._pts(P))
        return d[:, :, None] * np.eye(self.dim)[None]

    def christoffel(self, P):
        """``Gamma[n, k, i, j]`` (upper index first)."""
        P = self._pts(P)
        g = self.diag(P)
        dg = self.ddiag(P)
        n, m = g.shape
        G = np.zeros((n, m, m, m))
        for k in range(m):
            for i in range(m):
                G[:, k, i, k] += 0.5 * dg[:, k, i] / g[:, k]
                G[:, k, k, i] += 0.5 * dg[:, k, i] / g[:, k]
                G[:, k, i, i] -= 0.5 * dg[:, i, k] / g[:, k]
        return G

    def inner(self, P, X, Y):
        """Metric inner product of (n, dim) vector arrays at (n, dim) points."""
        return np.einsum("ni,ni,ni->n", self.diag(self._pts(P)), np.atleast_2d(X), np.atleast_2d(Y))

    def norm(self, P, X):
        return np.sqrt(self.inner(P, X, X))

    def check_domain(self, P, margin=0.0):
        P = self._pts(P)
        ok = self.inside(P, margin)
        if not np.all(ok):
            bad = P[~ok][0]
            raise DomainError(f"{self.name}: point {tuple(np.round(bad, 6))} outside the chart domain "
                              f"(margin {margin})")
        return P


def _ones(P):
    return np.ones_like(P)


def _zeros3(P):
    n, m = P.shape
    return np.zeros((n, m, m))


def _everywhere(P, margin):
    return np.all(np.isfinite(P), axis=1)


def _euclidean(n):
    return SpaceFormChart(f"euclidean{n}", n, 0.0, ("x", "y", "z")[:n] if n <= 3
                          else tuple(f"x{i + 1}" for i in range(n)),
                          _ones, _zeros3, _everywhere)


def _sphere2_diag(P):
    return np.stack([np.ones(len(P)), np.cos(P[:, 0]) ** 2], axis=1)


def _sphere2_ddiag(P):
    d = _zeros3(P)
    d[:, 1, 0] = -np.sin(2 * P[:, 0])
    return d


def _hyp2_diag(P):
    return np.stack([np.ones(len(P)), np.exp(2 * P[:, 0])], axis=1)


def _hyp2_ddiag(P):
    d = _zeros3(P)
    d[:, 1, 0] = 2 * np.exp(2 * P[:, 0])
    return d


def _sol_diag(P):
    z = P[:, 2]
    return np.stack([np.exp(2 * z), np.exp(-2 * z), np.ones(len(P))], axis=1)


def _sol_ddiag(P):
    z = P[:, 2]
    d = _zeros3(P)
    d[:, 0, 2] = 2 * np.exp(2 * z)
    d[:, 1, 2] = -2 * np.exp(-2 * z)
    return d


def _flatcyl_diag(P):
    return np.stack([np.ones(len(P)), np.ones(len(P)), P[:, 0] ** 2], axis=1)


def _flatcyl_ddiag(P):
    d = _zeros3(P)
    d[:, 2, 0] = 2 * P[:, 0]
    return d


def _hyp3_diag(P):
    w = np.exp(-2 * P[:, 0])
    return np.stack([np.ones(len(P)), w, w], axis=1)


def _hyp3_ddiag(P):
    d = _zeros3(P)
    d[:, 1, 0] = d[:, 2, 0] = -2 * np.exp(-2 * P[:, 0])
    return d


def _sphere3_diag(P):
    r = P[:, 0]
    return np.stack([np.ones(len(P)), np.cos(r) ** 2, np.sin(r) ** 2], axis=1)


def _sphere3_ddiag(P):
    d = _zeros3(P)
    d[:, 1, 0] = -np.sin(2 * P[:, 0])
    d[:, 2, 0] = np.sin(2 * P[:, 0])
    return d


CHARTS = {
    "euclidean2": _euclidean(2),
    "euclidean3": _euclidean(3),
    "sphere2": SpaceFormChart("sphere2", 2, 1.0, ("rho", "phi"), _sphere2_diag, _sphere2_ddiag,
                              lambda P, m: np.abs(P[:, 0]) < np.pi / 2 - m),
    "hyperbolic2": SpaceFormChart("hyperbolic2", 2, -1.0, ("u", "v"), _hyp2_diag, _hyp2_ddiag,
                                  _everywhere),
    "sol3": SpaceFormChart("sol3", 3, None, ("x", "y", "z"), _sol_diag, _sol_ddiag, _everywhere),
    "flatcyl3": SpaceFormChart("flatcyl3", 3, 0.0, ("rho", "z", "theta"), _flatcyl_diag,
                               _flatcyl_ddiag, lambda P, m: P[:, 0] > m),
    "hyperbolic3": SpaceFormChart("hyperbolic3", 3, -1.0, ("rho", "z", "theta"), _hyp3_diag,
                                  _hyp3_ddiag, _everywhere),
    "sphere3": SpaceFormChart("sphere3", 3, 1.0, ("rho", "z", "theta"), _sphere3_diag,
                              _sphere3_ddiag,
                              lambda P, m: (P[:, 0] > m) & (P[:, 0] < np.pi / 2 - m)),
}


def get_chart(name):
    if isinstance(name, SpaceFormChart):
        return name
    if name in CHARTS:
        return CHARTS[name]
    if name.startswith("euclidean") and name[9:].isdigit() and int(name[9:]) >= 2:
        return _euclidean(int(name[9:]))
    raise FBHError(f"unknown chart {name!r}; choose from {', '.join(CHARTS)}")


def curvature4(chart, P, X, Y, Z, W):
    """``C (<X,Z><Y,W> - <X,W><Y,Z>)`` at the points ``P``."""
    chart = get_chart(chart)
    if chart.curvature is None:
        raise FBHError("curvature4 unavailable; use frame computations")
    ip = chart.inner
    return chart.curvature * (ip(P, X, Z) * ip(P, Y, W) - ip(P, X, W) * ip(P, Y, Z))


def curvature4_numeric(chart, P, X, Y, Z, W, h=1e-4):
    """Same quantity assembled from finite differences of the Christoffel
    symbols; independent of the constant-curvature assumption."""
    chart = get_chart(chart)
    P = chart._pts(P)
    n, m = P.shape
    G = chart.christoffel(P)
    dG = np.zeros((n, m, m, m, m))  # [n, a, k, i, j] = d_a Gamma^k_ij
    for a in range(m):
        e = np.zeros(m)
        e[a] = h
        dG[:, a] = (8 * (chart.christoffel(P + e) - chart.christoffel(P - e))
                    - (chart.christoffel(P + 2 * e) - chart.christoffel(P - 2 * e))) / (12 * h)
    # R^l_{ijk} d_l = R(d_i, d_j) d_k
    R = (np.einsum("niljk->nlijk", dG) - np.einsum("njlik->nlijk", dG)
         + np.einsum("nlim,nmjk->nlijk", G, G) - np.einsum("nljm,nmik->nlijk", G, G))
    RZ = np.einsum("nlijk,ni,nj,nk->nl", R, X, Y, Z)
    return -chart.inner(P, RZ, W)


def covariant_derivative(chart, curve, V, accuracy=DEFAULT_ACCURACY):
    """``D V / ds`` along a sampled curve: component derivative plus the
    Christoffel correction ``Gamma(gamma', V)``."""
    chart = get_chart(chart)
    h = curve.grid.h
    vel = diff_array(curve.points, h, 1, accuracy)
    dV = diff_array(V, h, 1, accuracy)
    G = chart.christoffel(curve.points)
    return dV + np.einsum("nkij,ni,nj->nk", G, vel, V)
