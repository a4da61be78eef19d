"""Shared fixtures.  Expensive pipelines are built once per session."""
import os

os.environ.setdefault("OMP_NUM_THREADS", "1")
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")

import numpy as np
import pytest
from hypothesis import settings

from isodt import connection as cn
from isodt import cylinder as cy
from isodt import darboux as db
from isodt import permute as pm
from isodt import quaternion as qt
from isodt import sym

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

X0 = -2.0
RHO = 0.75

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def record():
    """Append one ``PASS``/``FAIL`` line per acceptance criterion."""

    def _record(number, title, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  criterion {number}: {title} ({detail})"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return _record


class Pipeline:
    """Cylinder pipeline at ``rho = 3/4`` on one grid; attributes built lazily."""

    def __init__(self, nx, ny):
        self.nx, self.ny = nx, ny
        self.p1 = cy.CylinderSectionParams(RHO)
        self.p_second = cy.CylinderSectionParams(RHO, *cy.SECOND_SECTION_M)
        self._c = {}

    def _get(self, key, build):
        if key not in self._c:
            self._c[key] = build()
        return self._c[key]

    @property
    def fam(self):
        return self._get("fam", lambda: cy.cylinder_family(self.nx, self.ny))

    @property
    def fd(self):
        return self._get("fd", lambda: cy.cylinder_dual_grid(self.nx, self.ny))

    @property
    def phi1(self):
        return self._get("phi1", lambda: cn.integrate_section(self.fam, RHO, cy.analytic_seed(self.p1, X0)))

    @property
    def phi_second(self):
        seed = qt.vec_scale(cy.analytic_seed(self.p_second, X0).array, qt.J)
        return self._get("phit", lambda: cn.integrate_section(self.fam, RHO, seed))

    @property
    def r1(self):
        return self._get("r1", lambda: db.darboux_transform(self.fam, self.phi1))

    @property
    def dressed(self):
        return self._get("D", lambda: db.dress_family(self.fam, self.r1))

    def lam_family(self, rule="oracle"):
        return self._get(("L", rule), lambda: sym.extend_section(
            self.fam, self.phi1, RHO, rule, seed_fn=lambda lam: cy.analytic_seed(self.p1.with_rho(lam), X0)))

    def phi11(self, rule="oracle"):
        return self._get(("phi11", rule), lambda: sym.sym_section(
            self.phi1, sym.lambda_derivative(self.lam_family(rule)), self.dressed))

    @property
    def phi12(self):
        return self._get("phi12", lambda: pm.bianchi_type_section(self.phi_second, self.dressed))

    @property
    def sym_rotational(self):
        return self._get("symrot", lambda: sym.sym_two_step(self.r1, self.phi11()))

    @property
    def sym_nonrotational(self):
        def build():
            g = sym.general_two_step(self.phi11(), self.phi12, 1, 50j)
            return sym.sym_two_step(self.r1, g)

        return self._get("symnonrot", build)


@pytest.fixture(scope="session")
def fine():
    """256 x 512 pipeline, the resolution of the oracle criteria."""
    return Pipeline(256, 512)


@pytest.fixture(scope="session")
def medium():
    return Pipeline(128, 256)


@pytest.fixture(scope="session")
def coarse():
    return Pipeline(64, 128)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
