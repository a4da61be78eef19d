import io

import numpy as np
import pytest

from isodt import connection as cn
from isodt import cylinder as cy
from isodt import quaternion as qt
from isodt.errors import GridError
from isodt.quaternion import HVector2
from isodt.surface import SurfaceGrid

from conftest import RHO, X0


def test_eta_shape_checked(coarse):
    s = coarse.fam.surface
    with pytest.raises(GridError):
        cn.GridRetractionForm(s, np.zeros((2, 2, 2, 2, 4)), np.zeros((2, 2, 2, 2, 4)))
    with pytest.raises(GridError):
        cn.build_eta(s, cy.cylinder_dual_grid(32, 128))


def test_sampled_eta_matches_closed_form(coarse):
    ex, ey = cy.cylinder_eta(*coarse.fam.surface.mesh())
    assert np.abs(coarse.fam.eta.eta_x - ex).max() < 1e-4
    assert np.abs(coarse.fam.eta.eta_y - ey).max() < 1e-8


def test_transport_at_zero_is_identity(coarse, rng):
    v = rng.normal(size=(2, 4))
    path = [(0, 0), (1, 0), (1, 1), (0, 1), (0, 0)]
    assert np.allclose(cn.parallel_transport(coarse.fam, 0.0, v, path), v)


def test_transport_rejects_diagonal_step(coarse):
    with pytest.raises(GridError):
        cn.parallel_transport(coarse.fam, RHO, np.ones((2, 4)), [(0, 0), (1, 1)])


def test_transport_one_period_matches_oracle(fine):
    p = cy.CylinderSectionParams(RHO)
    start = cy.analytic_seed(p, X0)
    path = [(0, j) for j in range(fine.ny + 1)]
    end = cn.parallel_transport(fine.fam, RHO, start, path)
    exact = cy.analytic_seed(p, X0, 2 * np.pi)
    assert isinstance(end, HVector2)
    assert np.abs(end.array - exact.array).max() < 1e-8


def test_integrated_section_matches_oracle(fine):
    exact = cy.analytic_section(fine.p1, fine.fam.surface)
    err = np.abs(fine.phi1.raw - exact.raw).max() / np.abs(exact.raw).max()
    assert err < 1e-7


def test_integration_orders_agree(coarse):
    seed = cy.analytic_seed(coarse.p1, X0)
    a = cn.integrate_section(coarse.fam, RHO, seed, order="row-first")
    b = cn.integrate_section(coarse.fam, RHO, seed, order="columns-first")
    assert np.abs(a.raw - b.raw).max() / np.abs(a.raw).max() < 1e-6
    with pytest.raises(ValueError):
        cn.integrate_section(coarse.fam, RHO, seed, order="diagonal")
    with pytest.raises(ValueError):
        cn.integrate_section(coarse.fam, RHO, np.zeros((2, 4)))


def test_integration_deterministic(coarse):
    seed = cy.analytic_seed(coarse.p1, X0)
    a = cn.integrate_section(coarse.fam, RHO, seed, ix0=5)
    b = cn.integrate_section(coarse.fam, RHO, seed, ix0=5)
    assert np.array_equal(a.raw, b.raw)


def test_parallelism_residual_negative_control(coarse):
    phi = coarse.phi1
    wrong = cn.SectionField.from_raw(phi.raw, 2.0, phi.surface)
    assert cn.parallelism_residual(coarse.fam, phi) < 1e-4
    assert cn.parallelism_residual(coarse.fam, wrong) > 1e-2


def test_multiplier_estimate(coarse):
    h, res = coarse.phi1.estimate_multiplier()
    assert abs(h - cy.section_multiplier(coarse.p1)) < 1e-6
    assert res < 1e-6


def test_curvature_trivial_and_flat(coarse):
    assert cn.curvature_residual(coarse.fam, 0.0) < 1e-12
    assert cn.curvature_residual(coarse.fam, RHO) < 1e-6


def test_curvature_detects_non_closed_eta(coarse):
    bad = cn.ConnectionFamily(coarse.fam.surface, coarse.fam.eta.perturbed(0.1))
    assert cn.curvature_residual(bad, RHO) > 1e-2


def test_curvature_extended_agrees_on_coarse_grid(coarse):
    a = cn.curvature_residual(coarse.fam, RHO)
    b = cn.curvature_residual(coarse.fam, RHO, extended=True)
    assert abs(a - b) < 1e-2 * a


def test_sampled_eta_curvature_converges_above_round_off(coarse, medium):
    """Sampled forms converge until the difference-noise floor near 1e-11."""
    r = cn.curvature_residual(coarse.fam, 2.0) / cn.curvature_residual(medium.fam, 2.0)
    assert r >= 4.0


def test_holonomy_requires_periodic_grid(coarse):
    s = coarse.fam.surface
    open_grid = SurfaceGrid(s.cover_values(), s.x_range, s.ny, 1, periodic_y=False)
    fam = cn.ConnectionFamily(open_grid, cn.GridRetractionForm(
        open_grid, coarse.fam.eta.nodes_on_cover(s.n_cover)[0], coarse.fam.eta.nodes_on_cover(s.n_cover)[1]))
    with pytest.raises(GridError):
        cn.holonomy_matrix(fam, RHO)


def test_holonomy_object(coarse):
    H = cn.holonomy(coarse.fam, RHO)
    ev = np.linalg.eigvals(H.complexify())
    assert np.allclose(ev, -1.0, atol=1e-6)


@pytest.mark.parametrize("grid", [(8, 64), (16, 512)])
@pytest.mark.parametrize("lam, kind", [
    (-0.5, "two-real"), (-0.25, "defective-real"), (0.0, "trivial"), (0.25, "circle-pair"),
    (0.75, "resonance"), (2.0, "resonance"), (3.75, "resonance"), (0.7501, "circle-pair"),
])
def test_spectrum_kinds(grid, lam, kind):
    fam = cy.cylinder_family(*grid)
    assert cn.classify_spectrum(fam, lam).kind == kind


def test_jordan_block_nullity():
    ms = cn.multipliers(cy.cylinder_family(16, 512), -0.25)
    (c,) = ms.clusters
    assert c.multiplicity == 4 and c.nullity == 2 and ms.defective


def test_eigenline_seeds_are_eigenvectors():
    fam = cy.cylinder_family(16, 512)
    ms = cn.multipliers(fam, -0.5)
    for c in ms.clusters:
        v = qt.complexify_vec(c.seeds[0].array)
        assert np.abs(ms.matrix @ v - c.h * v).max() < 1e-8 * np.abs(ms.matrix).max()


def test_scan_csv_to_stream():
    rows = cn.scan_spectrum(cy.cylinder_family(8, 64), [-0.5, 0.25])
    buf = io.StringIO()
    cn.write_scan_csv(rows, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0].split(",") == cn.SCAN_HEADER
    assert [l.split(",")[1] for l in lines[1:]] == ["two-real", "circle-pair"]
