"""Bianchi permutability, Bianchi-type sections and the quaternionic cross-ratio.

For ``d_rho_i``-parallel sections ``phi_i`` the differentials lie in ``L``,
``d phi_i = psi w_i``, so ``chi = w_1^{-1} w_2`` solves ``d phi_2 = d phi_1
chi``.  Then ``phi_12 = phi_2 - phi_1 chi`` is parallel for the family of
``f_1`` at ``rho_2`` and ``f_12 = phi_12 H`` is the common transform of
``f_1`` and ``f_2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import quaternion as qt
from ._numerics import derivative
from .connection import ConnectionFamily, SectionField, parallelism_residual
from .darboux import DarbouxResult, DressedFamily, darboux_transform, dress_family, transform_from_line
from .errors import DegenerateError, NotParallelError

__all__ = [
    "chi",
    "chi_residual",
    "BianchiResult",
    "bianchi_two_step",
    "bianchi_type_section",
    "cross_ratio",
    "similarity_class",
]


def _diffs(phi: SectionField):
    s = phi.surface
    raw = phi.raw
    return derivative(raw, s.hx, 0, False), derivative(raw, s.hy, 1, False)


def chi(phi1: SectionField, phi2: SectionField, tol: float = 1e-3, degenerate_tol: float = 1e-8):
    """``chi`` with ``d phi_2 = d phi_1 chi``, shape (nx, nc, 4).

    Computed per direction from the bottom entries of the differentials and
    averaged where both directions are nondegenerate.

    Raises
    ------
    DegenerateError
        If ``d phi_1`` vanishes in both directions at a sample.
    NotParallelError
        If the two directions disagree by more than ``tol`` (relative).
    """
    if phi1.values.shape != phi2.values.shape:
        raise ValueError("sections live on different grids")
    d1 = _diffs(phi1)
    d2 = _diffs(phi2)
    ests, oks = [], []
    for a, b in zip(d1, d2):
        w1, w2 = a[..., 1, :], b[..., 1, :]
        n1 = qt.qnorm(w1)
        ok = n1 > degenerate_tol * n1.max()
        w1s = np.where(ok[..., None], w1, qt.ONE)
        ests.append(qt.qmul(qt.qinv(w1s), w2))
        oks.append(ok)
    okx, oky = oks
    if np.any(~okx & ~oky):
        raise DegenerateError("d phi_1 vanishes at a sample")
    both = okx & oky
    cx, cy = ests
    scale = np.maximum(qt.qnorm(cx), qt.qnorm(cy))
    mismatch = np.where(both, qt.qnorm(cx - cy) / np.maximum(scale, 1e-300), 0.0)
    if mismatch.max() > tol:
        raise NotParallelError(f"chi differs between directions ({mismatch.max():.3g})")
    out = np.where(both[..., None], 0.5 * (cx + cy), np.where(okx[..., None], cx, cy))
    return out


def chi_residual(phi1: SectionField, phi2: SectionField, c) -> float:
    """``max_s |d_s phi_2 - d_s phi_1 chi| / max |d_s phi_1|``."""
    worst = 0.0
    for a, b in zip(_diffs(phi1), _diffs(phi2)):
        r = b - qt.vec_scale(a, c)
        worst = max(worst, float(qt.vec_norm(r).max() / qt.vec_norm(a).max()))
    return worst


@dataclass(eq=False)
class BianchiResult:
    """Output of :func:`bianchi_two_step`.

    Attributes
    ----------
    phi12 : SectionField
        ``phi_2 - phi_1 chi`` on the lattice of ``f_1``.
    first : DarbouxResult
        The transform ``f_1`` of ``f``.
    transform : DarbouxResult
        ``f_12`` written as a transform of ``f_1``.
    chi : ndarray
    dressed : DressedFamily
        Family of ``f_1`` used to check ``phi_12``.
    """

    phi12: SectionField
    first: DarbouxResult
    transform: DarbouxResult
    chi: np.ndarray
    dressed: DressedFamily
    info: dict = field(default_factory=dict)


def bianchi_two_step(fam: ConnectionFamily, phi1: SectionField, phi2: SectionField, rho1: float = None,
                     rho2: float = None, check_tol: float = 1e-2, envelope_tol: float = 1e-8,
                     first: DarbouxResult = None) -> BianchiResult:
    """Common transform ``f_12`` of ``f_1`` and ``f_2`` by Bianchi permutability.

    ``phi_12`` is checked for parallelism against the family of ``f_1`` at
    ``rho_2`` (nodal residual below ``check_tol``).

    Raises
    ------
    DegenerateError
        If ``rho_1 != rho_2`` and ``f_1`` meets ``f_2`` somewhere.
    NotParallelError
        If ``phi_12`` fails the parallelism check.
    """
    rho1 = phi1.lam if rho1 is None else rho1
    rho2 = phi2.lam if rho2 is None else rho2
    r1 = first if first is not None else darboux_transform(fam, phi1, rho1, check_tol)
    if rho1 != rho2:
        r2 = darboux_transform(fam, phi2, rho2, check_tol)
        gap = qt.qnorm(r1.surface.values - r2.surface.values)
        if gap.min() < envelope_tol * r1.surface.scale():
            raise DegenerateError("f_1 and f_2 meet: permutability undefined there")
    c = chi(phi1, phi2)
    raw12 = phi2.raw - qt.vec_scale(phi1.raw, c)
    phi12 = SectionField.from_raw(raw12, rho2, r1.surface, phi2.multiplier, {"source": "bianchi"})
    D1 = dress_family(fam, r1)
    res = parallelism_residual(D1.family, phi12)
    if check_tol is not None and res > check_tol:
        raise NotParallelError(f"phi_12 is not parallel for the family of f_1 ({res:.3g})")
    t = transform_from_line(r1.surface, phi12, rho2, info={"parallelism_residual": res})
    return BianchiResult(phi12, r1, t, c, D1, {"parallelism_residual": res, "chi_residual": chi_residual(phi1, phi2, c)})


def bianchi_type_section(phi2: SectionField, dressed: DressedFamily, tol: float = 1e-8) -> SectionField:
    """``pi phi_2``, parallel for ``d + rho eta_1`` when ``phi_2`` is ``d_rho``-parallel.

    Raises
    ------
    DegenerateError
        If ``phi_2`` lies in ``phi_1 H`` (the projection vanishes).
    """
    raw = phi2.raw
    if raw.shape != dressed.result.phi.raw.shape:
        raise ValueError("section and splitting live on different grids")
    proj = dressed.project(raw)
    ok = ~dressed.mask
    rel = (qt.vec_norm(proj) / qt.vec_norm(raw))[ok]
    if rel.max() < tol:
        raise DegenerateError("phi_2 is a multiple of phi_1: projection vanishes")
    return SectionField.from_raw(proj, phi2.lam, dressed.surface, phi2.multiplier, {"source": "bianchi-type"})


def cross_ratio(a, b, c, d, tol: float = 1e-12):
    """``(a - b)(b - c)^{-1}(c - d)(d - a)^{-1}`` per sample.

    Raises
    ------
    DegenerateError
        If two consecutive points coincide.
    """
    a, b, c, d = (np.asarray(v.array if isinstance(v, qt.Quaternion) else v, dtype=float) for v in (a, b, c, d))
    scale = max(np.abs(v).max() for v in (a, b, c, d))
    for u, v in ((b, c), (d, a)):
        if qt.qnorm(u - v).min() <= tol * max(scale, 1.0):
            raise DegenerateError("coincident points in cross-ratio")
    return qt.qmul(qt.qmul(qt.qmul(a - b, qt.qinv(b - c)), c - d), qt.qinv(d - a))


def similarity_class(q):
    """``(Re q, |Im q|)``, which determines the conjugacy class of ``q``."""
    q = np.asarray(q.array if isinstance(q, qt.Quaternion) else q, dtype=float)
    return q[..., 0], qt.qnorm(q[..., 1:])
