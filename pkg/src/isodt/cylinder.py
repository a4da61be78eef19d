"""Closed-form ground truth for the round cylinder ``f = (i x + j e^{-iy}) / 2``.

The dual surface is ``f^d = -2 (i x - j e^{-iy})``, normalised so that
``df^d = f_x^{-1} dx - f_y^{-1} dy``.  With this scaling the spectral
parameters below are those of the family ``d + lam eta``; in particular the
Jordan point of the holonomy sits at ``rho = -1/4``.  Rescaling the dual
rescales every ``rho``.

Parallel sections of ``d + rho eta`` are ``phi = e alpha + psi beta`` with
``psi = (f, 1)`` and, for ``s = +1, -1``,

    alpha_s = e^{iy/2} (c0 + j c1) e^{s i t y/2}
    beta_s  = e^{iy/2} (c1 (s t - 1) + j c0 (1 + s t)) e^{s i t y/2}
    c0 = -2 i sqrt(rho) (m0 e^{sqrt(rho) x} - m1 e^{-sqrt(rho) x})
    c1 = (1 + s t) (m0 e^{sqrt(rho) x} + m1 e^{-sqrt(rho) x})

with ``t = sqrt(1 + 4 rho)``; square roots use the principal branch (for
negative arguments ``+i sqrt|.|``).  The multipliers are ``-e^{+-i pi t}``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import quaternion as qt
from .connection import AnalyticRetractionForm, ConnectionFamily, SectionField, eta_from_omega
from .surface import SurfaceGrid

SQ3 = math.sqrt(3.0)

#: (m0+, m1+) of the second section used by the non-rotational and
#: bubbleton examples; the section actually used is this one times ``j``.
SECOND_SECTION_M = (1j, -1j)


# ----------------------------------------------------------------------------
# the cylinder and its dual
# ----------------------------------------------------------------------------

def _real_q(a):
    """Real array as quaternions along 1."""
    return qt.from_complex(np.asarray(a, dtype=float) + 0j)


def cylinder_f(X, Y):
    return 0.5 * (qt.qmul(qt.I, _real_q(X)) + qt.qmul(qt.J, qt.cexp_i(-np.asarray(Y, float))))


def cylinder_dual(X, Y):
    return -2.0 * (qt.qmul(qt.I, _real_q(X)) - qt.qmul(qt.J, qt.cexp_i(-np.asarray(Y, float))))


def cylinder_omega(X, Y):
    """Exact ``(df^d(d/dx), df^d(d/dy)) = (-2 i, 2 k e^{-iy})``."""
    Y = np.asarray(Y, dtype=float)
    wx = np.broadcast_to(-2.0 * qt.I, Y.shape + (4,)).copy()
    wy = 2.0 * qt.qmul(qt.K, qt.cexp_i(-Y))
    return wx, wy


def cylinder_eta(X, Y):
    f = cylinder_f(X, Y)
    wx, wy = cylinder_omega(X, Y)
    return eta_from_omega(f, wx), eta_from_omega(f, wy)


def cylinder(nx: int, ny: int, x_range=(-2.0, 2.0), wraps: int = 1) -> SurfaceGrid:
    return SurfaceGrid.from_function(cylinder_f, nx, ny, x_range, wraps)


def cylinder_dual_grid(nx: int, ny: int, x_range=(-2.0, 2.0), wraps: int = 1) -> SurfaceGrid:
    return SurfaceGrid.from_function(cylinder_dual, nx, ny, x_range, wraps)


def cylinder_family(nx: int, ny: int, x_range=(-2.0, 2.0), wraps: int = 1, analytic: bool = False):
    """Associated family of the sampled cylinder.

    With ``analytic=False`` the retraction form is built numerically from the
    sampled surface and its sampled dual; otherwise the exact closure is used.
    """
    f = cylinder(nx, ny, x_range, wraps)
    if analytic:
        return ConnectionFamily(f, AnalyticRetractionForm(f, cylinder_eta))
    return ConnectionFamily.from_surfaces(f, cylinder_dual_grid(nx, ny, x_range, wraps))


# ----------------------------------------------------------------------------
# parallel sections
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class CylinderSectionParams:
    """Parameters ``rho`` and ``m0+, m1+, m0-, m1-`` of a cylinder section."""

    rho: float
    m0p: complex = 1.0
    m1p: complex = 1.0
    m0m: complex = 0.0
    m1m: complex = 0.0

    def __post_init__(self):
        if self.rho == 0:
            raise ValueError("rho must be nonzero")

    @property
    def t(self) -> complex:
        return cmath.sqrt(complex(1.0 + 4.0 * self.rho, 0.0))

    @property
    def sqrt_rho(self) -> complex:
        return cmath.sqrt(complex(self.rho, 0.0))

    def with_rho(self, rho: float) -> "CylinderSectionParams":
        return CylinderSectionParams(rho, self.m0p, self.m1p, self.m0m, self.m1m)


def section_components(p: CylinderSectionParams, X, Y):
    """``(alpha, beta)`` of ``phi = e alpha + psi beta`` as quaternion arrays."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    t, sr = p.t, p.sqrt_rho
    alpha = np.zeros(np.broadcast(X, Y).shape + (4,))
    beta = np.zeros_like(alpha)
    left = qt.cexp_i(Y / 2.0)
    for s, m0, m1 in ((1, p.m0p, p.m1p), (-1, p.m0m, p.m1m)):
        if m0 == 0 and m1 == 0:
            continue
        ep, em = np.exp(sr * X), np.exp(-sr * X)
        c0 = -2j * sr * (m0 * ep - m1 * em)
        c1 = (1 + s * t) * (m0 * ep + m1 * em)
        right = qt.cexp_i(s * t * Y / 2.0)
        a = qt.from_complex_pair(c0, c1)
        b = qt.from_complex(c1 * (s * t - 1)) + qt.qmul(qt.J, qt.from_complex(c0 * (1 + s * t)))
        alpha = alpha + qt.qmul(qt.qmul(left, a), right)
        beta = beta + qt.qmul(qt.qmul(left, b), right)
    return alpha, beta


def analytic_phi(p: CylinderSectionParams, X, Y):
    """The section ``e alpha + psi beta`` as an array (..., 2, 4)."""
    alpha, beta = section_components(p, X, Y)
    f = cylinder_f(X, Y)
    return np.stack([alpha + qt.qmul(f, beta), beta], axis=-2)


def analytic_seed(p: CylinderSectionParams, x: float, y: float = 0.0) -> qt.HVector2:
    return qt.HVector2.from_array(analytic_phi(p, np.asarray(x), np.asarray(y)))


def section_multiplier(p: CylinderSectionParams):
    """Multiplier of the section, or None if it has none."""
    hp, hm = multiplier_formula(p.rho)
    plus = p.m0p != 0 or p.m1p != 0
    minus = p.m0m != 0 or p.m1m != 0
    if plus and minus:
        return hp if abs(hp - hm) < 1e-12 else None
    return hp if plus else hm


def analytic_section(p: CylinderSectionParams, surface: SurfaceGrid, right=None) -> SectionField:
    """Closed-form section sampled on the inclusive cover of ``surface``.

    ``right`` is an optional quaternion multiplying the section on the right.
    """
    x = surface.x
    y = surface.hy * np.arange(surface.n_cover)
    X, Y = np.meshgrid(x, y, indexing="ij")
    raw = analytic_phi(p, X, Y)
    h = section_multiplier(p)
    if right is not None:
        raw = qt.vec_scale(raw, np.asarray(right, dtype=float))
        if h is not None and np.abs(np.asarray(right)[2:]).max() > 0:
            h = np.conj(h) if np.abs(np.asarray(right)[:2]).max() == 0 else None
    return SectionField.from_raw(raw, p.rho, surface, h, {"source": "cylinder closed form"})


def multiplier_formula(rho: float):
    """``(h+, h-) = (-e^{i pi t}, -e^{-i pi t})`` with ``t = sqrt(1 + 4 rho)``."""
    if rho == 0:
        raise ValueError("rho must be nonzero")
    t = cmath.sqrt(complex(1.0 + 4.0 * rho, 0.0))
    return -cmath.exp(1j * math.pi * t), -cmath.exp(-1j * math.pi * t)


def resonance_points(k_max: int):
    """``rho_k = (k^2 - 1) / 4`` for ``k = 2 .. k_max``."""
    if k_max < 2:
        raise ValueError("k_max must be at least 2")
    return [(k * k - 1) / 4.0 for k in range(2, k_max + 1)]


@dataclass(frozen=True)
class CylinderClass:
    """Closed-form classification of the Darboux transforms at ``rho``.

    ``kind`` is ``single`` (``rho = -1/4``), ``two-cylinders`` (``rho < -1/4``),
    ``resonance`` (``rho = rho_k``) or ``cp1-rotational``.  ``theta`` is the
    rotation angle of the transformed cylinders where defined.
    """

    rho: float
    kind: str
    t: complex
    theta: float = None
    k: int = None

    #: matching kind of :func:`isodt.connection.classify_spectrum`
    @property
    def spectrum_kind(self) -> str:
        return {
            "single": "defective-real",
            "two-cylinders": "two-real",
            "resonance": "resonance",
            "cp1-rotational": "circle-pair",
        }[self.kind]


def rotation_angle(rho: float) -> float:
    """Angle ``theta`` with ``e^{i theta} = -(1 + t) / (1 - t)``."""
    t = cmath.sqrt(complex(1.0 + 4.0 * rho, 0.0))
    return cmath.phase(-(1 + t) / (1 - t))


def measured_rotation_angle(fam: ConnectionFamily, rho: float):
    """Rotation angle between the two transforms of the holonomy eigenlines.

    For ``rho < -1/4`` the holonomy at ``x_0`` has two real multipliers.  Their
    eigenlines are integrated, transformed, and ``theta`` is read off as the
    phase of ``-T_-^{-1} T_+`` (``T_+`` belongs to the multiplier of smaller
    modulus).  Returns ``(theta, spread)`` where ``spread`` is the largest
    sample deviation of ``-T_-^{-1} T_+`` from its mean.

    Raises
    ------
    DegenerateError
        If the spectrum does not consist of two real double multipliers.
    """
    from .connection import integrate_section, multipliers
    from .darboux import darboux_transform
    from .errors import DegenerateError

    ms = multipliers(fam, rho)
    cl = ms.clusters
    if len(cl) != 2 or any(c.multiplicity != 2 or abs(c.h.imag) > 1e-9 * abs(c.h) for c in cl):
        raise DegenerateError(f"no two real multipliers at rho={rho}")
    plus, minus = sorted(cl, key=lambda c: abs(c.h))
    T = [darboux_transform(fam, integrate_section(fam, rho, c.seeds[0], ix0=0), rho).T for c in (plus, minus)]
    q = -qt.qmul(qt.qinv(T[1]), T[0])
    mean = q.reshape(-1, 4).mean(axis=0)
    spread = float(qt.qnorm(q - mean).max())
    return math.atan2(float(mean[1]), float(mean[0])), spread


def classify(rho: float, tol: float = 1e-12) -> CylinderClass:
    if rho == 0:
        raise ValueError("rho must be nonzero")
    t = cmath.sqrt(complex(1.0 + 4.0 * rho, 0.0))
    if abs(rho + 0.25) <= tol:
        return CylinderClass(rho, "single", t, math.pi)
    if rho < -0.25:
        return CylinderClass(rho, "two-cylinders", t, rotation_angle(rho))
    k = round(t.real)
    if k >= 2 and abs(t.real - k) <= tol * max(1.0, k):
        return CylinderClass(rho, "resonance", t, None, k)
    return CylinderClass(rho, "cp1-rotational", t)


def rotated_cylinder_T(rho: float, sign: int, X, Y):
    """``T = -j e^{-iy} / (1 - s t)`` for ``rho <= -1/4`` (independent of the m's)."""
    t = cmath.sqrt(complex(1.0 + 4.0 * rho, 0.0))
    c = 1.0 / (1.0 - sign * t)
    return -qt.qmul(qt.qmul(qt.J, qt.from_complex(c)), qt.cexp_i(-np.asarray(Y, float) + 0 * np.asarray(X)))


# ----------------------------------------------------------------------------
# explicit transforms at rho = 3/4 with m0+ = m1+ = 1
# ----------------------------------------------------------------------------

def _surface_of_revolution(p, q, Y):
    return qt.qmul(qt.I, _real_q(p)) + qt.qmul(qt.J, qt.qmul(_real_q(q), qt.cexp_i(-Y)))


def one_step_profile(x):
    """``(p(x), q(x))`` of the one-step transform ``i p + j q e^{-iy}``."""
    x = np.asarray(x, dtype=float)
    c = np.cosh(SQ3 * x)
    p = x / 2 + 2 * SQ3 * np.sinh(SQ3 * x) / (3 - 6 * c)
    q = 1 / (2 * c - 1) + 0.5
    return p, q


def explicit_one_step(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float) + 0 * x
    p, q = one_step_profile(x)
    return _surface_of_revolution(p, q, y)


def explicit_m(x, y):
    """``m = rho (alpha^-1 alpha' - beta^-1 beta')`` for the oracle extension."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float) + 0 * x
    D = 2 * np.cosh(2 * SQ3 * x) + 1
    real = (4 * SQ3 * x * np.sinh(SQ3 * x) + 3 * np.cosh(SQ3 * x)) / D + 2
    z = np.exp(2j * y) * (SQ3 * np.sinh(SQ3 * x) - 12 * x * np.cosh(SQ3 * x)) / D
    return -0.25 * (_real_q(real) + qt.qmul(qt.qmul(qt.J, qt.I), qt.from_complex(z)))


def sym_rotational_T(x, y):
    """``T`` of the rotational Sym-type transform, ``T1 i + j T2 e^{-iy}``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float) + 0 * x
    c1, c2, s1 = np.cosh(SQ3 * x), np.cosh(2 * SQ3 * x), np.sinh(SQ3 * x)
    den = (2 * c1 - 1) * (48 * x**2 - 16 * SQ3 * x * s1 - 12 * c1 + 8 * c2 + 7)
    T1 = 2 * (SQ3 * s1 * (48 * x**2 - 8 * c2 - 7) + 72 * x * c1) / (3 * den)
    T2 = (-48 * x**2 + 16 * SQ3 * x * np.sinh(2 * SQ3 * x) + 4 * c2 + 5) / den
    return _surface_of_revolution(T1, T2, y)


def explicit_sym_rotational(x, y):
    return explicit_one_step(x, y) + sym_rotational_T(x, y)


def nonrotational_denominator(x, y, r: float = 50.0):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    R = 256.0 * r * r
    c1, c2, s1 = np.cosh(SQ3 * x), np.cosh(2 * SQ3 * x), np.sinh(SQ3 * x)
    return 3 * (1 - 2 * c1) ** 2 * (2 * c1 + 1) * (
        48 * x**2 - 16 * SQ3 * x * s1 - 12 * c1 + 8 * c2
        + 32 * r * SQ3 * (1 - 2 * c1) * np.sin(2 * y) + R + 7
    )


def sym_nonrotational_T(x, y, r: float = 50.0):
    """``T = (T1, T2, T3) / d`` of the non-rotational Sym-type transform.

    The second section is ``phi~ j`` with ``phi~`` the section of
    :data:`SECOND_SECTION_M`, combined as ``phi11 + pi(phi~ j) (r i)``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float) + 0 * x
    R = 256.0 * r * r
    c1, c2 = np.cosh(SQ3 * x), np.cosh(2 * SQ3 * x)
    s1, s2 = np.sinh(SQ3 * x), np.sinh(2 * SQ3 * x)
    A = 48 * x**2 - 16 * SQ3 * x * s2 - 4 * c2 + R - 5
    d = nonrotational_denominator(x, y, r)
    T1 = 2 / d * (2 * c2 + 1) * (SQ3 * s1 * (48 * x**2 - 8 * c2 + R - 7) + 72 * x * c1)
    T2 = 1 / d * (4 * c1**2 - 1) * (-3 * A * np.cos(y) - 64 * r * SQ3 * (2 * c2 + 1) * np.sin(y) ** 3)
    T3 = -1 / d * (2 * c2 + 1) * (
        3 * A * np.sin(y) + 48 * r * SQ3 * (2 * c2 + 1) * np.cos(y) + 16 * r * SQ3 * (2 * c2 + 1) * np.cos(3 * y)
    )
    return np.stack([np.zeros_like(T1), T1, T2, T3], axis=-1)


def explicit_sym_nonrotational(x, y, r: float = 50.0):
    return explicit_one_step(x, y) + sym_nonrotational_T(x, y, r)


def bubbleton(x, y):
    """CMC bubbleton, the transform of ``phi + phi~ j`` (components along i, j, k).

    The third component reads
    ``sin(y)/2 + (sin(y)/2) / ((sqrt3 cosh(sqrt3 x) + 3) / (cos 2y + 2) - 3/2)``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float) + 0 * x
    c = np.cosh(SQ3 * x)
    f1 = x / 2 + 2 * np.sinh(SQ3 * x) / (3 * np.cos(2 * y) - 2 * SQ3 * c)
    f2 = np.cos(y) / 2 + (3 * np.cos(y) - np.cos(3 * y)) / (6 * np.cos(2 * y) - 4 * SQ3 * c)
    f3 = np.sin(y) / 2 + (0.5 * np.sin(y)) / ((SQ3 * c + 3) / (np.cos(2 * y) + 2) - 1.5)
    return np.stack([np.zeros_like(f1), f1, f2, f3], axis=-1)
