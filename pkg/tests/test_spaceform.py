import math

import numpy as np
import pytest

from fbharmonic.curves import SampledCurve
from fbharmonic.errors import DomainError, FBHError
from fbharmonic.numcore import Grid1D, diff_array, interior_slice
from fbharmonic.spaceform import (CHARTS, covariant_derivative, curvature4, curvature4_numeric,
                                  get_chart)

CONSTANT = ["euclidean2", "euclidean3", "sphere2", "hyperbolic2", "flatcyl3", "hyperbolic3",
            "sphere3"]


def random_points(chart, n, rng):
    P = rng.uniform(-1, 1, (n, chart.dim))
    if chart.name in ("sphere2",):
        P[:, 0] *= 1.2
    if chart.name in ("flatcyl3",):
        P[:, 0] = rng.uniform(0.3, 3, n)
    if chart.name == "sphere3":
        P[:, 0] = rng.uniform(0.2, 1.35, n)
    return P


def orthonormal_pair(chart, P):
    g = chart.diag(P)
    X = np.zeros_like(P)
    Y = np.zeros_like(P)
    X[:, 0] = 1 / np.sqrt(g[:, 0])
    Y[:, 1] = 1 / np.sqrt(g[:, 1])
    return X, Y


@pytest.mark.parametrize("name,C", [("euclidean3", 0), ("sphere2", 1), ("hyperbolic2", -1),
                                    ("sphere3", 1), ("hyperbolic3", -1), ("flatcyl3", 0)])
def test_sectional_curvature_sign(name, C):
    chart = get_chart(name)
    P = random_points(chart, 5, np.random.default_rng(1))
    X, Y = orthonormal_pair(chart, P)
    assert np.allclose(curvature4(chart, P, X, Y, X, Y), C, atol=1e-14)


def test_flat_chart_curvature_vanishes():
    rng = np.random.default_rng(2)
    V = rng.standard_normal((4, 4, 3))
    assert np.all(curvature4("euclidean3", np.zeros((4, 3)), *V) == 0)


def test_sol_has_no_constant_curvature():
    with pytest.raises(FBHError, match="curvature4 unavailable"):
        curvature4("sol3", np.zeros((1, 3)), *np.eye(3)[[0, 1, 0, 1]])


@pytest.mark.parametrize("name", CONSTANT)
def test_numeric_riemann_matches_closed_form(name):
    chart = get_chart(name)
    rng = np.random.default_rng(3)
    P = random_points(chart, 10, rng)
    X, Y, Z, W = (rng.standard_normal(P.shape) for _ in range(4))
    num = curvature4_numeric(chart, P, X, Y, Z, W)
    assert np.max(np.abs(num - curvature4(chart, P, X, Y, Z, W))) < 1e-6


@pytest.mark.parametrize("name", list(CHARTS))
def test_christoffel_symmetric(name):
    chart = get_chart(name)
    P = random_points(chart, 6, np.random.default_rng(4))
    G = chart.christoffel(P)
    assert np.allclose(G, np.swapaxes(G, 2, 3))
    g = chart.metric(P)
    assert np.all(np.linalg.eigvalsh(g) > 0)


def test_flat_christoffels_vanish():
    assert np.all(get_chart("euclidean3").christoffel(np.ones((3, 3))) == 0)


def test_sphere_christoffel_closed_form():
    # metric d rho^2 + cos^2 rho d phi^2: Gamma^rho_phiphi = sin rho cos rho
    r = 0.4
    G = get_chart("sphere2").christoffel([[r, 0.0]])
    assert G[0, 0, 1, 1] == pytest.approx(math.sin(r) * math.cos(r))
    assert G[0, 1, 0, 1] == pytest.approx(-math.tan(r))


def circle(n=401):
    g = Grid1D(0, 2 * math.pi, n)
    s = g.nodes
    return SampledCurve("euclidean2", g, np.stack([np.cos(s), np.sin(s)], axis=1))


def test_covariant_derivative_line_and_circle():
    g = Grid1D(0, 3, 101)
    s = g.nodes
    line = SampledCurve("euclidean3", g, np.stack([s / 3, 2 * s / 3, 2 * s / 3], axis=1))
    assert np.max(np.abs(covariant_derivative("euclidean3", line, line.velocity()))) < 1e-9
    c = circle()
    acc = covariant_derivative("euclidean2", c, c.velocity())
    assert np.max(np.abs(acc + c.points)) < 1e-9


def test_equator_is_geodesic():
    g = Grid1D(0, 2, 201)
    eq = SampledCurve("sphere2", g, np.stack([np.zeros(201), g.nodes], axis=1))
    assert np.max(np.abs(covariant_derivative("sphere2", eq, eq.velocity()))) < 1e-9


def test_metric_compatibility():
    g = Grid1D(0, 1, 401)
    s = g.nodes
    pts = np.stack([0.3 * np.sin(s), s], axis=1)
    c = SampledCurve("sphere2", g, pts, check_speed=False)
    V = np.stack([np.cos(s), s ** 2], axis=1)
    W = np.stack([s, np.exp(s)], axis=1)
    ch = get_chart("sphere2")
    lhs = diff_array(ch.inner(pts, V, W), g.h, 1)
    rhs = ch.inner(pts, covariant_derivative(ch, c, V), W) + ch.inner(pts, V, covariant_derivative(ch, c, W))
    assert np.max(np.abs(lhs - rhs)[interior_slice(401, 5)]) < 1e-7


def test_chart_domain_checks():
    with pytest.raises(DomainError):
        get_chart("sphere3").check_domain([[0.0, 0, 0]])
    with pytest.raises(FBHError, match="unknown chart"):
        get_chart("torus")
    assert get_chart("euclidean5").dim == 5
