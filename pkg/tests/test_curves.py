import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fbharmonic.curves import (ChiParams, SampledCurve, ScalarWeight, build_helix,
                               build_hyperbolic_curve, build_planar_curve, build_spherical_curve,
                               chi, classify_curve, export_curve_csv, fbh_curve_residual, frenet,
                               frame_orthonormality_error, frenet_system_error, pad_embed,
                               verify_curvature_ode)
from fbharmonic.errors import DomainError, FBHError, FrenetDegenerate
from fbharmonic.numcore import EXTENDED, Grid1D, SampledFunction, interior_slice
from fbharmonic.surfaces import Cylinder

INNER = interior_slice(801, 12)


def unit_circle(n=401):
    g = Grid1D(0, 2 * math.pi, n)
    s = g.nodes_as(EXTENDED)
    return SampledCurve("euclidean2", g, np.stack([np.cos(s), np.sin(s)], axis=1))


def classical_helix(a=1.0, b=1.0, n=601):
    g = Grid1D(0, 6, n)
    t = g.nodes_as(EXTENDED) / math.sqrt(a * a + b * b)
    return SampledCurve("euclidean3", g, np.stack([a * np.cos(t), a * np.sin(t), b * t], axis=1))


# chi and the curvature ODE

def test_chi_direct_values():
    assert chi(2.0, ChiParams(0.0, C3=4, C4=0)) == pytest.approx(0.2)
    assert chi(0.0, ChiParams(1.0, C4=1, C5=0)) == pytest.approx(1 / (1 + math.sqrt(2)))
    assert chi(0.0, ChiParams(-1.0, C1=1, C2=1)) == pytest.approx(1 / (2 + math.sqrt(3)))


def test_chi_parameter_validation():
    with pytest.raises(DomainError):
        ChiParams(-1.0, C1=0.1, C2=0.1)
    with pytest.raises(DomainError):
        ChiParams(0.0, C3=0)
    with pytest.raises(DomainError):
        ChiParams(-1.0, C1=-1, C2=1)


def test_chi_keeps_extended_precision():
    s = np.linspace(-1, 1, 5).astype(EXTENDED)
    assert chi(s, ChiParams(1.0)).dtype == EXTENDED


@pytest.mark.parametrize("p", [ChiParams(-1.0, 0.5, C1=1, C2=2), ChiParams(0.0, -0.3, C3=3, C4=0.2),
                               ChiParams(2.0, 0.7, C4=0.4, C5=-0.3)])
def test_chi_solves_curvature_ode(p):
    g = Grid1D(-1, 1, 801)
    y = SampledFunction(g, chi(g.nodes_as(EXTENDED), p))
    assert verify_curvature_ode(y, p.A, p.C).max_residual < 1e-6


def test_constant_solution_of_curvature_ode():
    y = SampledFunction(Grid1D(0, 1, 101), np.ones(101))
    assert verify_curvature_ode(y, 1.0, 1.0).max_residual < 1e-12


def test_curvature_ode_detects_non_solution():
    g = Grid1D(-1, 1, 201)
    s = g.nodes
    rep = verify_curvature_ode(SampledFunction(g, s ** 2), 1.0, 0.0)
    # 3(2s)^2 - 2 s^2 (2) - 4 s^4 s^4 = 8 s^2 - 4 s^8
    expected = np.max(np.abs(8 * s ** 2 - 4 * s ** 8)[interior_slice(201, 12)])
    assert rep.max_residual == pytest.approx(expected, rel=1e-8)
    assert rep.status == "FAIL"


# Frenet data

def test_frenet_circle():
    fd = frenet(unit_circle())
    sl = interior_slice(401, 12)
    assert np.max(np.abs(fd.kappa(1)[sl] - 1)) < 1e-8
    assert np.all(fd.kappa(2) == 0)


def test_frenet_classical_helix():
    fd = frenet(classical_helix())
    sl = interior_slice(601, 12)
    assert np.max(np.abs(fd.kappa(1)[sl] - 0.5)) < 1e-8
    assert np.max(np.abs(fd.kappa(2)[sl] - 0.5)) < 1e-8
    assert frame_orthonormality_error(fd) < 1e-6
    assert frenet_system_error(fd) < 1e-6


def test_planar_family_curvature():
    # x' = 4/r, y' = C3 s/r with r = sqrt(16 + C3^2 s^2) gives |x'y'' - y'x''| = 4 C3 / r^2
    c3 = 4.0
    curve = build_planar_curve(c3)
    fd = frenet(curve)
    s = curve.s
    oracle = 4 * c3 / (16 + c3 ** 2 * s ** 2)
    assert np.max(np.abs(fd.kappa(1) / oracle - 1)[INNER]) < 1e-6
    assert fd.kappa(1)[400] == pytest.approx(1.0, abs=1e-9)
    assert curve.speed_error() < 1e-7


def test_helix_family_curvatures_and_slope():
    curve = build_helix()
    fd = frenet(curve)
    s = curve.s
    oracle = 16 / (32 + 16 * s ** 2)
    assert np.max(np.abs(fd.kappa(1) - oracle)[INNER]) < 1e-6
    assert np.max(np.abs(fd.kappa(2) - oracle)[INNER]) < 1e-6
    zslope = np.asarray(curve.velocity()[:, 2], dtype=float)
    assert np.max(np.abs(zslope - math.cos(math.pi / 4))) < 1e-10


def test_unit_speed_is_checked():
    g = Grid1D(0, 1, 51)
    with pytest.raises(FBHError, match="not unit speed"):
        SampledCurve("euclidean2", g, np.stack([2 * g.nodes, 0 * g.nodes], axis=1))


# residuals

def test_straight_line_residual_vanishes():
    g = Grid1D(0, 3, 301)
    s = g.nodes
    line = SampledCurve("euclidean3", g, np.stack([0.6 * s, 0.8 * s, 0 * s], axis=1))
    rep = fbh_curve_residual(line, ScalarWeight.constant(1.0))
    assert rep.max_residual == 0 and rep.verdict


def test_circle_with_constant_weight_fails_by_kappa_cubed():
    rep = fbh_curve_residual(unit_circle(), ScalarWeight.constant(1.0))
    assert rep.residuals["F2"] == pytest.approx(1.0, abs=1e-8)
    assert rep.status == "FAIL"


def test_planar_family_is_proper():
    rep = fbh_curve_residual(build_planar_curve(4.0), ScalarWeight.from_kappa())
    assert rep.verdict and rep.extra["proper"]


def test_closed_form_weight_matches_kappa_weight():
    p = ChiParams(0.0, C3=4.0)
    curve = build_planar_curve(4.0)
    a = fbh_curve_residual(curve, ScalarWeight.from_chi(p))
    assert a.max_residual < 1e-6


@settings(max_examples=5, deadline=None)
@given(st.floats(1.0, 6.0), st.floats(-0.5, 0.5))
def test_planar_family_random_constants(c3, c4):
    curve = build_planar_curve(c3, c4, (-3, 3), 481)
    assert fbh_curve_residual(curve, ScalarWeight.from_kappa()).max_residual < 1e-6


def test_weight_homogeneity():
    curve = build_helix()
    fd = frenet(curve)
    a = fbh_curve_residual(curve, ScalarWeight.from_kappa(1.0), fd=fd)
    b = fbh_curve_residual(curve, ScalarWeight.from_kappa(2.0), fd=fd)
    for k, v in a.residuals.items():
        assert b.residuals[k] == pytest.approx(2 * v, rel=1e-10, abs=1e-300)
    assert a.verdict == b.verdict


def test_padding_leaves_residuals_unchanged():
    curve = build_helix()
    a = fbh_curve_residual(curve, ScalarWeight.from_kappa())
    b = fbh_curve_residual(pad_embed(curve, 5), ScalarWeight.from_kappa())
    for k, v in a.residuals.items():
        assert abs(b.residuals[k] - v) < 1e-12


def test_spherical_and_hyperbolic_builds():
    for curve in (build_spherical_curve(), build_hyperbolic_curve()):
        rep = fbh_curve_residual(curve, ScalarWeight.from_kappa())
        assert rep.max_residual < 1e-5, rep.format()


def test_partial_degeneracy_rejected():
    kappa = lambda s: np.where(s > 0, s ** 3, 0 * s)
    curve = Cylinder.from_curvature(kappa, Grid1D(-2, 2, 401)).directrix
    with pytest.raises(FrenetDegenerate, match="Frenet degenerate"):
        fbh_curve_residual(curve, ScalarWeight.constant(1.0))


def test_weight_must_be_positive():
    with pytest.raises(DomainError):
        ScalarWeight.constant(-1.0)
    w = ScalarWeight.from_callable(lambda s: s)
    with pytest.raises(DomainError):
        fbh_curve_residual(build_planar_curve(4.0), w)


def test_builder_parameter_errors():
    with pytest.raises(DomainError):
        build_planar_curve(0.0)
    with pytest.raises(DomainError):
        build_helix(omega=math.pi / 2)


# classification

def test_classify_planar_family():
    out = classify_curve(frenet(build_planar_curve(4.0)))
    assert out.verdict == "case-i"
    assert out.params.C3 == pytest.approx(4.0, rel=1e-6)
    assert out.weight.kind == "chi"


def test_classify_helix_family():
    out = classify_curve(frenet(build_helix()))
    assert out.verdict == "case-ii"
    assert out.c3 == pytest.approx(1.0, abs=1e-6)


def test_classify_constant_curvature_not_proper():
    assert classify_curve(frenet(unit_circle())).verdict == "not-proper-fbh"
    assert classify_curve(frenet(classical_helix())).verdict == "not-proper-fbh"


def test_classify_rejects_non_chi_curvature():
    curve = Cylinder.from_curvature(lambda s: 1 + 0.3 * np.sin(s), Grid1D(0, 4, 401)).directrix
    assert classify_curve(frenet(curve)).verdict == "not-proper-fbh"


def test_csv_export(tmp_path):
    curve = build_planar_curve(4.0, span=(-1, 1), count=101)
    path = tmp_path / "c.csv"
    export_curve_csv(path, curve, weight=ScalarWeight.from_kappa())
    lines = path.read_text().splitlines()
    assert lines[0] == "s,x1,x2,kappa1,kappa2,f"
    assert len(lines) == 102
    assert float(lines[51].split(",")[3]) == pytest.approx(1.0, abs=1e-8)
