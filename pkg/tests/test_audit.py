import numpy as np
import pytest

from quaddomains.audit import (
    NotInHardySpace,
    boundary_b,
    build_F,
    build_u,
    cauchy_orthogonality,
    format_report,
    gradient_and_normal_checks,
    quadrature_defects,
    quadrature_residuals,
    rigidity_verdict,
    run_audit,
    weak_serrin_residual,
    weinberger_identities,
)
from quaddomains.conformal import disk_map, geometry, map_from_taylor
from quaddomains.disk_ops import PolarGrid

GRID = PolarGrid.gauss(64, 512)


@pytest.fixture(scope="module")
def disk_parts():
    rec = disk_map()
    Fb = build_F(rec, 0.5)
    U = build_u(rec, Fb, 0.5, GRID)
    return rec, Fb, U


def test_disk_quadrature_residuals():
    assert max(quadrature_residuals(disk_map(), 0.5, 32, GRID)) <= 1e-12
    wrong = quadrature_residuals(disk_map(), 0.6, 4, GRID)
    assert wrong[0] == pytest.approx(0.2, abs=1e-14)


def test_boundary_function_on_disk():
    assert np.max(np.abs(boundary_b(disk_map(), 0.5))) < 1e-14
    assert np.allclose(np.abs(boundary_b(disk_map(), 0.25)), 0.5, atol=1e-14)


def test_orthogonality_on_disk():
    assert np.max(np.abs(cauchy_orthogonality(disk_map(), 0.5))) <= 1e-13
    # A = (1 - 2c) e^{-it}, so O_0 = i (1 - 2c)
    O = cauchy_orthogonality(disk_map(), 0.4)
    assert O[0] == pytest.approx(0.2j, abs=1e-14)


def test_build_F_refused_off_quadrature():
    with pytest.raises(NotInHardySpace, match="non-Smirnov"):
        build_F(disk_map(), 0.3)


def test_disk_u(disk_parts):
    rec, Fb, U = disk_parts
    assert np.max(np.abs(Fb.F_phi.taylor)) < 1e-14
    r = GRID.radii[:, None]
    assert np.allclose(U.field.values, (1 - r**2) / 4 + 0 * U.field.values, atol=1e-14)
    assert U.C0 == pytest.approx(0.25)
    assert np.all(U.field.values > 0)
    assert U.boundary_sup < 1e-14


def test_disk_gradient_and_normal(disk_parts):
    rec, Fb, _ = disk_parts
    checks = gradient_and_normal_checks(rec, Fb, 0.5, GRID)
    assert checks["grad_bound_excess"] == 0
    assert checks["grad_sup_half"] == pytest.approx(GRID.radii.max() / 2)
    assert checks["normal_deriv_dev"] < 1e-14


def test_disk_weinberger(disk_parts):
    rec, _, U = disk_parts
    ids = weinberger_identities(rec, U, 0.5, GRID)
    assert ids["I"] == pytest.approx(np.pi / 8, abs=1e-13)
    assert ids["M"] == pytest.approx(np.pi / 2, abs=1e-13)
    assert ids["B"] == pytest.approx(2 * np.pi, abs=1e-13)
    assert ids["area"] == pytest.approx(np.pi, abs=1e-13)
    for key in ("id1_defect", "id2_defect", "volume_defect"):
        assert ids[key] <= 1e-12


def test_weak_serrin_on_disk(disk_parts):
    rec, _, U = disk_parts
    res = weak_serrin_residual(rec, U, 0.5, {"r2": {(2, 0): 1.0, (0, 2): 1.0}}, GRID)
    assert abs(res["r2"]) <= 1e-10
    allres = weak_serrin_residual(rec, U, 0.5, 4, GRID)
    assert len(allres) == 15
    assert max(abs(v) for v in allres.values()) <= 1e-10


def test_weak_serrin_harmonic_is_quadrature_defect(singular_maps):
    rec = singular_maps[0.02]
    c = rec.c
    U = build_u(rec, build_F(rec, c), c, GRID)
    # x^3 - 3 x y^2 = Re z^3 and 3 x^2 y - y^3 = Im z^3
    polys = {"re": {(3, 0): 1.0, (1, 2): -3.0}, "im": {(2, 1): 3.0, (0, 3): -1.0}}
    res = weak_serrin_residual(rec, U, c, polys, GRID)
    q = quadrature_defects(rec, c, 3, GRID, 4096)[3]
    assert res["re"] == pytest.approx(np.pi * q.real, abs=1e-12)
    assert res["im"] == pytest.approx(np.pi * q.imag, abs=1e-12)


def test_weak_serrin_constant_test_function():
    rec = map_from_taylor([0, 1, 0, 0, 0, 0.05], C=1.0)
    Fless = run_audit(rec, c=0.5, grid=GRID)
    assert Fless.F_defect > 1e-9 and Fless.I is None
    # for a disk, the constant test function gives area - c * perimeter
    rec = disk_map(0.7)
    U = build_u(rec, build_F(rec, 0.35), 0.35, GRID)
    res = weak_serrin_residual(rec, U, 0.35, {"one": {(0, 0): 1.0}}, GRID)
    geo = geometry(rec)
    assert res["one"] == pytest.approx(geo.area - 0.35 * geo.perimeter_true, abs=1e-13)


def test_quadrature_implies_orthogonality(singular_maps, consistent_maps):
    for rec in list(singular_maps.values()) + list(consistent_maps.values()):
        tol = max(quadrature_residuals(rec, rec.c, 32, GRID))
        assert max(np.abs(cauchy_orthogonality(rec, rec.c, 32))) <= 10 * max(tol, 1e-15)


def test_built_F_reproduces_b(consistent_maps):
    for rec in consistent_maps.values():
        Fb = build_F(rec, rec.c)
        assert Fb.boundary_dev <= 10 * 1e-9


def test_mode_dichotomy(singular_maps, consistent_maps):
    for a, rec in consistent_maps.items():
        assert rigidity_verdict(rec)[0] == "DISK"
    for a, rec in singular_maps.items():
        assert rigidity_verdict(rec)[0] == ("NON_DISK" if a > 0 else "DISK")


def test_singular_report_localizes_failure(singular_maps):
    report = run_audit(singular_maps[0.05], grid=GRID)
    assert max(report.quad_residuals) <= 1e-9
    assert report.id1_defect <= 1e-9
    assert report.grad_bound_excess > 1e-3
    assert report.volume_defect > 1e-3
    assert report.verdict == "NON_DISK"
    assert "singular" in report.convention
    text = format_report(report)
    assert "NON_DISK" in text and "gradient excess" in text


def test_report_fields_nonnegative():
    report = run_audit(disk_map(), grid=GRID)
    d = report.as_dict()
    for key, val in d.items():
        if key.endswith("defect") or key.endswith("excess") or key.endswith("dev"):
            assert val >= 0
    assert report.resolution == {"Nr": 64, "M": 512, "M_b": 4096, "N_s": 65}
    assert len(report.map_hash) == 16
