import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from isodt import connection as cn
from isodt import cylinder as cy
from isodt import quaternion as qt
from isodt.surface import SurfaceGrid


def test_surface_and_dual_values():
    f = cy.cylinder_f(np.array(0.0), np.array(0.0))
    assert np.allclose(f, 0.5 * qt.J)
    w = cy.cylinder_omega(np.array(0.0), np.array(0.0))
    assert np.allclose(w[0], -2 * qt.I)


def test_eta_example_at_origin():
    ex, _ = cy.cylinder_eta(np.array(0.0), np.array(0.0))
    want = np.array([[qt.K, 0.5 * qt.I], [-2 * qt.I, qt.K]])
    assert np.allclose(ex, want)


def test_eta_is_nilpotent_and_kills_psi():
    fam = cy.cylinder_family(16, 32)
    for eta in (fam.eta.eta_x, fam.eta.eta_y):
        assert np.abs(qt.matmul(eta, eta)).max() < 1e-10
        psi = fam.psi(fam.surface.m)
        assert np.abs(qt.matvec(eta, psi)).max() < 1e-10


@pytest.mark.parametrize("params", [
    cy.CylinderSectionParams(0.75),
    cy.CylinderSectionParams(2.0, 1.0, -0.5j),
    cy.CylinderSectionParams(-0.5, 0, 0, 1, 1),
    cy.CylinderSectionParams(0.3, 1, 2, 0.5, -1j),
])
def test_analytic_section_is_parallel(params):
    fam = cy.cylinder_family(64, 128, analytic=True)
    phi = cy.analytic_section(params, fam.surface)
    # nodal residual is the truncation error of the difference stencils
    assert cn.parallelism_residual(fam, phi) < 1e-4
    wrong = cy.analytic_section(params.with_rho(params.rho + 0.7), fam.surface)
    wrong = cn.SectionField.from_raw(wrong.raw, params.rho, fam.surface)
    assert cn.parallelism_residual(fam, wrong) > 1e-2


@given(st.floats(-3.0, 5.0).filter(lambda r: abs(r) > 1e-3 and abs(r + 0.25) > 1e-3))
def test_multiplier_formula_pairing(rho):
    hp, hm = cy.multiplier_formula(rho)
    t = cmath.sqrt(1 + 4 * rho)
    assert cmath.isclose(hp * hm, 1.0, abs_tol=1e-9)
    assert cmath.isclose(hp, -cmath.exp(1j * math.pi * t))


def test_section_multiplier_matches_transport():
    p = cy.CylinderSectionParams(0.75)
    g = cy.cylinder(32, 64)
    phi = cy.analytic_section(p, g)
    end = phi.raw[:, -1]
    h = qt.from_complex(cy.section_multiplier(p))
    assert np.allclose(end, qt.vec_scale(phi.raw[:, 0], h), atol=1e-10)


def test_resonance_points():
    assert cy.resonance_points(4) == [0.75, 2.0, 3.75]
    with pytest.raises(ValueError):
        cy.resonance_points(1)


@pytest.mark.parametrize("rho, kind", [(-1.0, "two-cylinders"), (-0.25, "single"), (0.75, "resonance"),
                                       (3.75, "resonance"), (1.0, "cp1-rotational"), (-0.1, "cp1-rotational")])
def test_classify(rho, kind):
    assert cy.classify(rho).kind == kind


def test_rotation_angle_closed_form():
    assert math.isclose(cy.rotation_angle(-0.5), -math.pi / 2, abs_tol=1e-15)
    assert math.isclose(cy.classify(-0.25).theta, math.pi)


def test_measured_rotation_angle(medium):
    theta, spread = cy.measured_rotation_angle(medium.fam, -1.0)
    assert abs(theta - cy.rotation_angle(-1.0)) < 1e-7
    assert spread < 1e-6


def test_measured_rotation_angle_needs_real_pair(coarse):
    from isodt.errors import DegenerateError

    with pytest.raises(DegenerateError):
        cy.measured_rotation_angle(coarse.fam, 1.0)


def test_one_step_explicit_is_conformal():
    from isodt.surface import conformality_residual

    g = SurfaceGrid.from_function(cy.explicit_one_step, 128, 256, (-2.0, 2.0))
    assert conformality_residual(g) < 1e-5


def test_sym_rotational_spot_value():
    y = np.linspace(0, 2 * np.pi, 7)
    T = cy.sym_rotational_T(np.zeros_like(y), y)
    assert np.allclose(T, 3 * qt.qmul(qt.J, qt.cexp_i(-y)))


def test_nonrotational_denominator_positive():
    x, y = np.meshgrid(np.linspace(-2, 2, 41), np.linspace(0, 2 * np.pi, 41))
    assert np.abs(cy.nonrotational_denominator(x, y, 50.0)).min() > 1e6


def test_zero_rho_rejected():
    with pytest.raises(ValueError):
        cy.CylinderSectionParams(0.0)
    with pytest.raises(ValueError):
        cy.multiplier_formula(0.0)
