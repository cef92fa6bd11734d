import math

import numpy as np
import pytest

from fbharmonic.curves import ChiParams, SampledCurve, build_spherical_curve
from fbharmonic.errors import DomainError
from fbharmonic.numcore import EXTENDED, Grid1D
from fbharmonic.report import FAIL, IMPOSSIBLE, MINIMAL, PASS
from fbharmonic.surfaces import (Cone, Cylinder, PsiParams, TangentSurface, build_fbh_cylinder,
                                 cone_probe, cylinder_cross_residual, export_surface_csv,
                                 fbh_hypersurface_residual, kappaN, psi, separation_residuals,
                                 surface_geometry, tangent_probe)

VG = Grid1D(-1, 1, 81)


def unit_cylinder(radius=1.0):
    return Cylinder.from_curvature(lambda s: 0 * s + 1 / radius,
                                   Grid1D(0, 2 * math.pi * radius, 241))


def cosh2(S, V):
    return np.exp(V) + np.exp(-V)


def test_cylinder_mean_curvature_and_laplacian():
    geo = surface_geometry(unit_cylinder(2.0), VG)
    assert np.max(np.abs(np.abs(geo.H) - 0.25)) < 1e-10
    # arclength coordinates are flat: Lap(s^2 + v^2) = 4
    S, V = np.meshgrid(geo.s, geo.v, indexing="ij")
    lap = geo.laplacian(S ** 2 + V ** 2)
    assert np.max(np.abs(lap[12:-12, 12:-12] - 4)) < 1e-8


def test_unit_cylinder_weighted_passes_and_constant_fails():
    cyl = unit_cylinder()
    assert fbh_hypersurface_residual(cyl, cosh2, VG).max_residual < 1e-6
    # f = 1: H = 1/2, |A|^2 = 1, so Lap(fH) - fH|A|^2 = -1/2
    rep = fbh_hypersurface_residual(cyl, lambda S, V: 1 + 0 * S, VG)
    assert rep.residuals["Delta(fH)-fH|A|^2"] == pytest.approx(0.5, abs=1e-8)
    assert rep.status == FAIL


def test_cross_formulation_agrees_on_cylinder():
    cyl = unit_cylinder()
    for f in (cosh2, lambda S, V: 1 + 0 * S, lambda S, V: 2 + np.sin(S) * V):
        a = fbh_hypersurface_residual(cyl, f, VG)
        b = cylinder_cross_residual(cyl, f, VG)
        assert a.verdict == b.verdict


def test_psi_family():
    v = np.array([0.3])
    assert psi(v, PsiParams(4.0, d1=1, d2=2))[0] == pytest.approx(math.exp(0.6) + 2 * math.exp(-0.6))
    assert psi(v, PsiParams(0.0, d3=2, d4=1))[0] == pytest.approx(1.6)
    assert psi(v, PsiParams(-1.0, d5=1, d6=1))[0] == pytest.approx(math.sin(0.3) + math.cos(0.3))
    assert kappaN(0.0, 0.0, C3=4) == pytest.approx(1.0)


CYLINDERS = [
    (ChiParams(0.0, C3=4.0), PsiParams(0.0), Grid1D(-3, 3, 481), Grid1D(0.1, 3, 117), 1e-6),
    (ChiParams(1.0, C4=1.0), PsiParams(1.0), Grid1D(-1.5, 1.5, 481), Grid1D(-1, 1, 81), 1e-5),
    (ChiParams(-1.0, C1=1.0, C2=1.0), PsiParams(-1.0), Grid1D(-1, 1, 161), Grid1D(0.1, 2, 77), 1e-5),
]


@pytest.mark.parametrize("cp,pp,sg,vg,tol", CYLINDERS)
def test_weighted_cylinder_families(cp, pp, sg, vg, tol):
    cyl, f = build_fbh_cylinder(cp, pp, sg, vg)
    rep = fbh_hypersurface_residual(cyl, f, vg, tol)
    assert rep.verdict, rep.format()
    assert cylinder_cross_residual(cyl, f, vg, tol).verdict
    rk, rp = separation_residuals(cp, pp, sg, vg)
    assert rk < 1e-6 and rp < 1e-10


def test_cylinder_family_positivity_checks():
    with pytest.raises(DomainError):
        build_fbh_cylinder(ChiParams(0.0), PsiParams(0.0, d3=1, d4=-1), Grid1D(-1, 1, 41),
                           Grid1D(0, 2, 41))
    with pytest.raises(DomainError):
        build_fbh_cylinder(ChiParams(1.0), PsiParams(0.0), Grid1D(-1, 1, 41), Grid1D(0, 2, 41))


def test_circular_cone_probe():
    alpha = 0.5
    cone = Cone.circular(alpha)
    # a circle of spherical radius alpha has geodesic curvature cot(alpha)
    assert np.max(np.abs(np.abs(cone.w()) - 1 / math.tan(alpha))[12:-12]) < 1e-8
    rep = cone_probe(cone)
    assert rep.status == IMPOSSIBLE
    assert rep.extra["inf|H dH/dv|"] >= 0.01
    assert rep.extra["sup|probe - w^2/(4v^3)|"] < 1e-6
    assert rep.extra["sup|H - w/(2v)|"] < 1e-8


def test_great_circle_cone_is_minimal():
    assert cone_probe(Cone.circular(math.pi / 2)).status == MINIMAL


def test_cone_from_sphere_curve():
    cone = Cone.from_sphere_chart(build_spherical_curve(span=(-1, 1), count=401))
    rep = cone_probe(cone)
    assert rep.extra["sup|probe - w^2/(4v^3)|"] < 1e-6


def test_tangent_surface_probes():
    rep = tangent_probe(TangentSurface.helix())
    assert rep.status == IMPOSSIBLE
    assert rep.extra["inf|lhs|"] >= 0.01
    assert rep.extra["sup|H - tau/(2vk)|"] < 1e-8
    assert tangent_probe(TangentSurface.planar()).status == MINIMAL


def test_tangent_probe_twisted_edge():
    # k = 1, tau = s: lhs = s^2 v^2 + 2 s v + s^2; at s = v = 1 it is 4
    ts = TangentSurface.from_curvatures(lambda s: 1 + 0 * s, lambda s: s, Grid1D(0.5, 1.5, 201))
    rep = tangent_probe(ts, Grid1D(0.5, 1.5, 101))
    lhs = rep.fields["lhs"]
    assert float(lhs[100, 50]) == pytest.approx(4.0, abs=1e-8)


def test_singular_parametrization_rejected():
    with pytest.raises(DomainError, match="parametrization singular"):
        surface_geometry(TangentSurface.helix(), Grid1D(-1, 1, 21))
    with pytest.raises(DomainError):
        cone_probe(Cone.circular(0.5), Grid1D(-1, 1, 21))


def test_weight_must_be_positive_on_grid():
    with pytest.raises(DomainError):
        fbh_hypersurface_residual(unit_cylinder(), lambda S, V: V, VG)


def test_weight_homogeneity_on_surface():
    cyl = unit_cylinder()
    f = lambda S, V: 1.5 + np.sin(S) * V
    a = fbh_hypersurface_residual(cyl, f, VG)
    b = fbh_hypersurface_residual(cyl, lambda S, V: 2 * f(S, V), VG)
    for k, v in a.residuals.items():
        assert b.residuals[k] == pytest.approx(2 * v, rel=1e-10)


def test_surface_csv(tmp_path):
    rep = fbh_hypersurface_residual(unit_cylinder(), cosh2, VG)
    path = tmp_path / "s.csv"
    export_surface_csv(path, rep)
    lines = path.read_text().splitlines()
    assert lines[0] == "s,v,H,f,residual1,residual2,residual3"
    assert len(lines) == 1 + 241 * 81
