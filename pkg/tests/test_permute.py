import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from isodt import connection as cn
from isodt import cylinder as cy
from isodt import darboux as db
from isodt import permute as pm
from isodt import quaternion as qt
from isodt.errors import DegenerateError, NotParallelError

from conftest import RHO, X0

RHO2 = 2.0
quats = arrays(float, (4,), elements=st.floats(-5, 5, allow_nan=False))


@pytest.fixture(scope="module")
def pair(medium):
    phi2 = cn.integrate_section(medium.fam, RHO2, cy.analytic_seed(cy.CylinderSectionParams(RHO2), X0))
    b12 = pm.bianchi_two_step(medium.fam, medium.phi1, phi2, first=medium.r1)
    b21 = pm.bianchi_two_step(medium.fam, phi2, medium.phi1)
    return phi2, b12, b21


def test_permutability_is_symmetric(pair):
    _, b12, b21 = pair
    assert np.abs(b12.transform.surface.values - b21.transform.surface.values).max() < 1e-8


def test_chi_solves_differential_equation(medium, pair):
    phi2, b12, _ = pair
    assert pm.chi_residual(medium.phi1, phi2, b12.chi) < 1e-4


def test_phi12_parallel_with_unit_multiplier(pair):
    _, b12, _ = pair
    assert b12.info["parallelism_residual"] < 1e-3
    h, res = b12.phi12.estimate_multiplier()
    assert abs(h - 1.0) < 1e-6 and res < 1e-6


def test_cross_ratio_medium(medium, pair):
    phi2, b12, _ = pair
    r2 = db.darboux_transform(medium.fam, phi2)
    f = medium.fam.surface.cover_values(b12.transform.surface.m)
    re, im = pm.similarity_class(pm.cross_ratio(f, medium.r1.surface.values, b12.transform.surface.values,
                                                r2.surface.values))
    assert np.abs(re - RHO2 / RHO).max() < 1e-5 and im.max() < 1e-5


def test_equal_parameters_return_the_base(medium):
    b = pm.bianchi_two_step(medium.fam, medium.phi1, medium.phi_second, first=medium.r1)
    f = medium.fam.surface.cover_values(b.transform.surface.m)
    assert np.abs(b.transform.surface.values - f).max() < 1e-6


def test_bianchi_type_section(medium):
    D = medium.dressed
    bt = medium.phi12
    assert cn.parallelism_residual(D.family, bt) < 1e-4
    with pytest.raises(DegenerateError):
        pm.bianchi_type_section(medium.phi1.scaled(qt.J), D)


def test_chi_rejects_unrelated_field(medium, rng):
    noise = cn.SectionField.from_raw(rng.normal(size=medium.phi1.raw.shape), RHO2, medium.phi1.surface)
    with pytest.raises(NotParallelError):
        pm.chi(medium.phi1, noise)


def test_chi_shape_mismatch(medium, coarse):
    with pytest.raises(ValueError):
        pm.chi(medium.phi1, coarse.phi1)


def test_cross_ratio_known_value():
    a, b, c, d = (qt.from_complex(z) for z in (0, 1, 3, 2j))
    expect = (0 - 1) / (1 - 3) * (3 - 2j) / (2j - 0)
    assert np.allclose(pm.cross_ratio(a, b, c, d), qt.from_complex(expect))


def test_cross_ratio_coincident_points():
    with pytest.raises(DegenerateError):
        pm.cross_ratio(qt.ONE, qt.I, qt.I, qt.J)


@given(quats, quats)
def test_similarity_class_is_conjugation_invariant(q, g):
    if qt.qnorm(g) < 1e-2:
        return
    conj = qt.qmul(qt.qmul(g, q), qt.qinv(g))
    re1, im1 = pm.similarity_class(q)
    re2, im2 = pm.similarity_class(conj)
    assert np.isclose(re1, re2, atol=1e-9) and np.isclose(im1, im2, atol=1e-8)


@given(quats, quats, quats, quats, quats)
def test_cross_ratio_moebius_invariant(a, b, c, g, t):
    """Rigid motions ``x -> g x g^-1 + t`` preserve the cross-ratio up to conjugation."""
    pts = [a, b, c, a + b + c + 1.0]
    gaps = [qt.qnorm(pts[i] - pts[(i + 1) % 4]) for i in range(4)]
    if min(gaps) < 1e-1 or qt.qnorm(g) < 1e-1:
        return
    moved = [qt.qmul(qt.qmul(g, p), qt.qinv(g)) + t for p in pts]
    re1, im1 = pm.similarity_class(pm.cross_ratio(*pts))
    re2, im2 = pm.similarity_class(pm.cross_ratio(*moved))
    scale = 1 + abs(re1) + im1
    assert np.isclose(re1, re2, atol=1e-7 * scale) and np.isclose(im1, im2, atol=1e-7 * scale)
