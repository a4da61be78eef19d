import numpy as np
import pytest

from isodt import cylinder as cy
from isodt import quaternion as qt
from isodt import surface as sf
from isodt.errors import GridError, NonConformalError, NotClosedError
from isodt.surface import SurfaceGrid


@pytest.fixture(scope="module")
def cyl():
    return cy.cylinder(64, 128)


def test_grid_validation():
    with pytest.raises(GridError):
        SurfaceGrid(np.zeros((3, 8, 4)), (0, 1), 8)
    with pytest.raises(GridError):
        SurfaceGrid(np.zeros((8, 9, 4)), (0, 1), 8)
    with pytest.raises(GridError):
        SurfaceGrid(np.zeros((8, 8, 4)), (1, 0), 8)
    with pytest.raises(GridError):
        SurfaceGrid.from_function(lambda X, Y: np.stack([0 * X, X, Y, 0 * X], -1), 8, 8, (0, 1))


def test_grid_geometry(cyl):
    assert cyl.nx == 64 and cyl.m == 128
    assert np.isclose(cyl.hx, 4 / 63)
    assert np.isclose(cyl.hy, 2 * np.pi / 128)
    assert cyl.n_cover == 129
    assert np.allclose(cyl.cover_values()[:, -1], cyl.values[:, 0])
    assert cyl.is_imaginary()
    assert cyl.closure_residual() == 0.0


def test_wraps_repeat():
    g = cy.cylinder(8, 16, wraps=2)
    assert g.m == 32
    bad = g.values.copy()
    bad[0, 20, 1] += 1.0
    with pytest.raises(GridError):
        g.with_values(bad)


def test_cylinder_mean_curvature_and_gauss_map(cyl):
    H = sf.mean_curvature(cyl)
    assert np.abs(H - 1.0).max() < 1e-6
    N = sf.gauss_map(sf.discrete_diff(cyl))
    assert np.allclose(qt.qnorm(N), 1.0)


def test_dual_has_mean_curvature_minus_quarter():
    assert np.abs(sf.mean_curvature(cy.cylinder_dual_grid(64, 128)) + 0.25).max() < 1e-6


def test_conformality(cyl):
    assert sf.conformality_residual(cyl) < 1e-9
    X, Y = cyl.mesh()
    sheared = cyl.with_values(cyl.values + qt.qscale(qt.I, 0.5 * np.sin(Y)))
    assert sf.conformality_residual(sheared) > 0.1


def test_non_conformal_gauss_map_raises():
    g = SurfaceGrid.from_function(
        lambda X, Y: np.stack([0 * X, 3 * X, np.cos(Y), np.sin(Y)], -1), 16, 32, (0, 1))
    with pytest.raises(NonConformalError):
        sf.gauss_map(sf.discrete_diff(g))


def test_christoffel_dual_of_cylinder(cyl):
    fd = sf.christoffel_dual(cyl, anchor=cy.cylinder_dual(np.array(-2.0), np.array(0.0)))
    assert fd.periodic_y
    assert np.abs(fd.values - cy.cylinder_dual_grid(64, 128).values).max() < 1e-6
    # dual of the dual is the surface again, up to translation
    fdd = sf.christoffel_dual(fd, anchor=cyl.values[0, 0])
    assert np.abs(fdd.values - cyl.values).max() < 1e-5


def test_closedness_detects_non_isothermic():
    g = SurfaceGrid.from_function(
        lambda X, Y: np.stack([0 * X, X * (1 + 0.3 * np.cos(Y)), np.cos(Y), np.sin(Y)], -1),
        32, 64, (0.5, 1.5))
    with pytest.raises((NotClosedError, NonConformalError)):
        sf.christoffel_dual(g)
    assert sf.closedness_residual(cy.cylinder(32, 64)) < 1e-6


def test_csv_roundtrip(tmp_path, cyl):
    path = tmp_path / "f.csv"
    sf.write_csv(cyl, path)
    back = sf.read_csv(path)
    assert np.array_equal(back.values, cyl.values)
    assert back.x_range == cyl.x_range and back.ny == cyl.ny


def test_obj_export(tmp_path):
    g = cy.cylinder(5, 8, wraps=2)
    path = tmp_path / "c.obj"
    mask = np.zeros((5, 16), bool)
    mask[2, 3] = True
    welded = sf.write_obj(g, path, mask, {"rho": 0.75, "mode": "onestep"})
    assert welded
    lines = path.read_text().splitlines()
    assert sum(l.startswith("v ") for l in lines) == 5 * 16
    assert sum(l.startswith("f ") for l in lines) == 4 * 16
    flags = (tmp_path / "c.obj.mask").read_text().split()
    assert len(flags) == 80 and flags.count("1") == 1
    assert (tmp_path / "c.obj.meta").read_text() == "mode = onestep\nrho = 0.75\n"


def test_obj_open_seam(tmp_path):
    g = cy.cylinder(5, 8)
    vals = np.concatenate([g.values, g.values[:, :1] + 0.5], axis=1)
    open_grid = SurfaceGrid(vals, g.x_range, 8, 1, periodic_y=False)
    assert not sf.write_obj(open_grid, tmp_path / "o.obj")
    faces = [l for l in (tmp_path / "o.obj").read_text().splitlines() if l.startswith("f ")]
    assert len(faces) == 4 * 7
