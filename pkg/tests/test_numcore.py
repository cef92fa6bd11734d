import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fbharmonic.errors import IntegrationStalled, NumericsError
from fbharmonic.numcore import (EXTENDED, Grid1D, SampledFunction, diff, diff_array,
                                fornberg_weights, integrate_ode, interior_slice, quadrature)


def sample(fn, a, b, n, dtype=float):
    g = Grid1D(a, b, n)
    return SampledFunction(g, fn(g.nodes_as(dtype)))


def test_diff_sin():
    f = sample(np.sin, 0, math.pi, 801)
    assert np.max(np.abs(diff(f, 1).values - np.cos(f.s))) < 1e-9


def test_diff_cubic_third_derivative():
    f = sample(lambda s: s ** 3, -1, 1, 41)
    assert np.max(np.abs(diff(f, 3).values - 6)) < 1e-9


def test_diff_chi_second_derivative():
    # 16/(16+16 s^2) = 1/(1+s^2); second derivative (6s^2-2)/(1+s^2)^3 by hand
    f = sample(lambda s: 16 / (16 + 16 * s ** 2), -5, 5, 801)
    exact = (6 * f.s ** 2 - 2) / (1 + f.s ** 2) ** 3
    assert np.max(np.abs(diff(f, 2).values - exact)) < 1e-8


def test_diff_errors():
    with pytest.raises(NumericsError, match="insufficient samples"):
        diff_array(np.ones(6), 0.1, 3)
    with pytest.raises(NumericsError, match="invalid samples"):
        diff_array(np.array([0, 1, np.nan, 3, 4, 5, 6, 7.0]), 0.1, 1)
    with pytest.raises(NumericsError, match="insufficient samples"):
        Grid1D(0, 1, 4)


def test_grid_parse():
    g = Grid1D.parse("-5:5:801")
    assert (g.start, g.end, g.count) == (-5.0, 5.0, 801)
    assert g.h == pytest.approx(0.0125)
    with pytest.raises(NumericsError):
        Grid1D.parse("1:2")
    with pytest.raises(NumericsError):
        Grid1D(1, 0, 10)


def test_nodes_as_extended_uniform():
    x = Grid1D(-1, 2, 301).nodes_as(EXTENDED)
    assert x.dtype == EXTENDED
    assert np.max(np.abs(np.diff(x) - EXTENDED(3) / 300)) < 1e-18


def test_repeated_first_derivative_matches_second():
    f = sample(lambda s: np.exp(np.sin(s)), 0, 3, 401)
    twice = diff(diff(f, 1), 1).values
    once = diff(f, 2).values
    assert np.max(np.abs(twice - once)) < 1e-8


def test_quadrature_examples():
    one = SampledFunction(Grid1D(0, 2, 101), np.ones(101))
    assert quadrature(one).values[-1] == pytest.approx(2, abs=1e-14)
    f = sample(np.cos, 0, math.pi / 2, 401)
    q = quadrature(f)
    assert q.values[0] == 0
    assert np.max(np.abs(q.values - np.sin(f.s))) < 1e-9


def test_quadrature_inverts_diff():
    f = sample(lambda s: np.exp(np.sin(s)), 0, 3, 401)
    back = quadrature(diff(f, 1)).values
    assert np.max(np.abs(back - (f.values - f.values[0]))) < 1e-8


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=1, max_size=6))
def test_stencils_exact_on_polynomials(coeffs):
    p = np.polynomial.Polynomial(coeffs)
    f = sample(p, -1, 1, 21)
    for k in (1, 2):
        assert np.max(np.abs(diff(f, k).values - p.deriv(k)(f.s))) < 1e-8 * (1 + np.abs(coeffs).max())


def test_fornberg_exact_weights():
    w = fornberg_weights([-1, 0, 1], 2, exact=True)
    assert [str(x) for x in w] == ["1", "-2", "1"]


def test_interior_slice_caps_margin():
    assert interior_slice(100, 12) == slice(12, 88)
    assert interior_slice(10, 12) == slice(3, 7)


def test_integrate_exponential():
    sol = integrate_ode(lambda s, y: y, 1.0, (0, 1), 1e-10, count=11)
    assert abs(sol.values[-1] - math.e) < 1e-9


def test_integrate_extended_precision():
    y0 = np.array([0, 1], dtype=EXTENDED)
    sol = integrate_ode(lambda s, y: np.array([y[1], -y[0]]), y0, (0, 3), 1e-16, count=301)
    assert sol.values.dtype == EXTENDED
    s = sol.grid.nodes_as(EXTENDED)
    assert np.max(np.abs(sol.values[:, 0] - np.sin(s))) < 1e-14


def test_integrate_convergence_order():
    def err(tol):
        sol = integrate_ode(lambda s, y: -2 * s * y, 1.0, (0, 3), tol, count=5)
        return abs(sol.values[-1] - math.exp(-9))
    for tol in (1e-5, 1e-6, 1e-7, 1e-8):
        assert err(tol) / err(tol / 16) >= 8


def test_integrate_stalls_at_blowup():
    with pytest.raises(IntegrationStalled, match="integration stalled at s="):
        integrate_ode(lambda s, y: y * y, 1.0, (0, 2), 1e-10, count=21)


def test_integrate_stop_truncates():
    sol = integrate_ode(lambda s, y: np.ones(1), [0.0], (0, 2), 1e-10, count=21,
                        stop=lambda s, y: y[0] > 1.0)
    assert sol.grid.end == pytest.approx(1.1)
    assert sol.flags and "stopped" in sol.flags[0]


def test_slope_bounded_profile():
    # x'' = -sqrt(1 - x'^2) chi with x'(0) = 1: the slope never exceeds one
    def rhs(s, y):
        return np.array([y[1], -np.sqrt(np.maximum(1 - y[1] ** 2, 0)) * 16 / (16 + 16 * s * s)])
    sol = integrate_ode(rhs, [0.0, 1.0], (0, 5), 1e-10, count=201)
    assert np.max(sol.values[:, 1] ** 2) <= 1 + 1e-12


def test_sampled_function_validation():
    with pytest.raises(NumericsError, match="invalid samples"):
        SampledFunction(Grid1D(0, 1, 5), [0, 1, np.inf, 2, 3])
    f = sample(np.sin, 0, 3, 301)
    assert f(1.2345)[0] == pytest.approx(math.sin(1.2345), abs=1e-12)


def test_integrate_no_sliver_stall():
    # a free step landing within roundoff of an output node must not stall
    y0 = np.zeros(3, dtype=EXTENDED)
    rhs = lambda s, y: np.array([1 + 0 * s, np.cos(y[0]), np.sin(y[0])])
    sol = integrate_ode(rhs, y0, (0, 4), 1e-15, count=401)
    s = sol.grid.nodes_as(EXTENDED)
    assert np.max(np.abs(sol.values[:, 1] - np.sin(s))) < 1e-14
