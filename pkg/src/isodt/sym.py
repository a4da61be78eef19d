"""Sym-type sections and two-step transforms at equal spectral parameter.

A smooth family ``phi^lam`` of ``d_lam``-parallel sections through
``phi_1 = phi^rho`` gives the Sym-type section

    phi_11 = phi_1 - rho pi (d/dlam phi^lam)|_{lam = rho}

of the family of ``f_1``.  Together with the Bianchi-type section
``phi_12 = pi phi_2`` it spans every parallel section of ``d + rho eta_1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import quaternion as qt
from .connection import ConnectionFamily, SectionField, integrate_section, parallelism_residual
from .darboux import DarbouxResult, DressedFamily, transform_from_line
from .errors import DegenerateError
from .surface import write_metadata

__all__ = [
    "RULES",
    "LambdaFamily",
    "extend_section",
    "default_epsilon",
    "lambda_derivative",
    "sym_section",
    "sym_two_step",
    "general_two_step",
    "decompose",
    "multiplier_check",
    "transform_metadata",
    "write_transform_metadata",
]

RULES = ("frozen-seed", "oracle")


@dataclass(eq=False)
class LambdaFamily:
    """Smooth extension ``lam -> phi^lam`` of a section ``phi_1`` at ``rho``.

    Members are integrated numerically from a seed at ``(x_{ix0}, 0)``.  The
    rule ``"frozen-seed"`` uses ``phi_1(x_{ix0}, 0)`` for every ``lam``;
    ``"oracle"`` takes the seed from ``seed_fn(lam)`` (a closed-form family).
    Members are cached, and ``lam = rho`` returns ``phi_1`` itself.
    """

    family: ConnectionFamily
    phi1: SectionField
    rho: float
    rule: str = "frozen-seed"
    seed_fn: Optional[Callable] = None
    ix0: int = 0
    ns: int = 4
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.rule not in RULES:
            raise ValueError(f"unknown extension rule {self.rule!r}")
        if self.rule == "oracle" and self.seed_fn is None:
            raise ValueError("oracle rule needs a seed function")

    def seed(self, lam: float) -> np.ndarray:
        if self.rule == "frozen-seed":
            return self.phi1.raw[self.ix0, 0]
        s = self.seed_fn(lam)
        return s.array if isinstance(s, qt.HVector2) else np.asarray(s, dtype=float)

    def __call__(self, lam: float) -> SectionField:
        if lam == self.rho:
            return self.phi1
        key = float(lam)
        if key not in self._cache:
            self._cache[key] = integrate_section(self.family, lam, self.seed(lam), ix0=self.ix0, ns=self.ns)
        return self._cache[key]


def extend_section(fam: ConnectionFamily, phi1: SectionField, rho: float = None, rule: str = "frozen-seed",
                   seed_fn: Callable = None, ix0: int = 0, ns: int = 4) -> LambdaFamily:
    """Wrap ``phi_1`` into a :class:`LambdaFamily` with the given rule."""
    rho = phi1.lam if rho is None else rho
    return LambdaFamily(fam, phi1, rho, rule, seed_fn, ix0, ns)


def default_epsilon(rho: float) -> float:
    return 1e-4 * max(1.0, abs(rho))


def lambda_derivative(fam_lam: LambdaFamily, rho: float = None, eps: float = None,
                      guard: float = 1e-4) -> SectionField:
    """``d phi^lam / d lam`` at ``rho`` with the 4-point central stencil.

    The 2-point stencil is evaluated alongside.  Their difference is stored in
    ``info["stencil_disagreement"]`` (relative, ``O(eps^2)``).

    Raises
    ------
    DegenerateError
        If the round-off floor ``1e-13 |phi| / eps`` exceeds ``guard`` times
        the derivative (``eps`` too small).
    """
    rho = fam_lam.rho if rho is None else rho
    eps = default_epsilon(rho) if eps is None else eps
    if eps <= 0:
        raise ValueError("eps must be positive")
    p = {k: fam_lam(rho + k * eps).raw for k in (-2, -1, 1, 2)}
    d4 = (p[-2] - 8.0 * p[-1] + 8.0 * p[1] - p[2]) / (12.0 * eps)
    d2 = (p[1] - p[-1]) / (2.0 * eps)
    size = np.abs(d4).max()
    floor = 1e-13 * np.abs(fam_lam.phi1.raw).max() / eps
    if size == 0.0:
        disagreement = float(np.abs(d2).max())
    else:
        disagreement = float(np.abs(d4 - d2).max() / size)
        if floor > guard * size:
            raise DegenerateError(f"eps={eps:g} too small: stencil dominated by cancellation")
    info = {"eps": eps, "rule": fam_lam.rule, "stencil_disagreement": disagreement}
    return SectionField.from_raw(d4, rho, fam_lam.phi1.surface, None, info)


def sym_section(phi1: SectionField, phi1dot: SectionField, dressed: DressedFamily,
                rho: float = None) -> SectionField:
    """``phi_11 = phi_1 - rho pi phi_dot`` on the lattice of ``f_1``.

    ``info`` records the parallelism residual against ``d + rho eta_1`` and
    ``|pi_1 phi_11 - phi_1|`` (zero up to round-off).
    """
    rho = phi1.lam if rho is None else rho
    raw = phi1.raw - rho * dressed.project(phi1dot.raw)
    phi11 = SectionField.from_raw(raw, rho, dressed.surface, phi1.multiplier, dict(phi1dot.info))
    ok = ~dressed.mask
    back = dressed.project_hat(raw) - phi1.raw
    phi11.info["projection_residual"] = float(
        (qt.vec_norm(back) / qt.vec_norm(phi1.raw))[ok].max())
    phi11.info["parallelism_residual"] = parallelism_residual(dressed.family, phi11)
    return phi11


def sym_two_step(f1: DarbouxResult, phi11: SectionField, tol: float = 1e-8) -> DarbouxResult:
    """Transform of ``f_1`` by a parallel section of its family at ``rho``.

    ``info["equals_base"]`` is True when the result coincides with ``f``
    (as happens for Bianchi-type input).
    """
    out = transform_from_line(f1.surface, phi11, f1.rho, info=dict(phi11.info))
    f = f1.base.cover_values(out.surface.m)
    gap = qt.qnorm(out.surface.values - f)
    out.info["equals_base"] = bool(gap.max() < tol * max(1.0, out.surface.scale()))
    return out


def _as_q(m):
    """Quaternion array from a :class:`Quaternion`, a complex scalar or an array."""
    if isinstance(m, qt.Quaternion):
        return m.array
    if np.isscalar(m):
        return qt.from_complex(complex(m))
    return np.asarray(m, dtype=float)


def general_two_step(phi11: SectionField, phi12: SectionField, m1, m2) -> SectionField:
    """``phi_11 m_1 + phi_12 m_2`` for quaternions ``m_1, m_2``.

    Raises
    ------
    ValueError
        If both coefficients vanish.
    """
    m1, m2 = _as_q(m1), _as_q(m2)
    if qt.qnorm(m1) == 0 and qt.qnorm(m2) == 0:
        raise ValueError("both coefficients are zero")
    raw = qt.vec_scale(phi11.raw, m1) + qt.vec_scale(phi12.raw, m2)
    h = phi11.multiplier if phi11.multiplier == phi12.multiplier else None
    return SectionField.from_raw(raw, phi11.lam, phi11.surface, h, {"m1": m1.tolist(), "m2": m2.tolist()})


def decompose(phi: SectionField, phi11: SectionField, phi12: SectionField, sample=None, mask=None):
    """Coefficients with ``phi = phi_11 m_1 + phi_12 m_2``.

    Solved at one sample (default: the best-conditioned one) and checked
    globally.  Returns ``(m1, m2, residual)`` with the residual relative to
    ``max |phi|``.
    """
    B = qt.column_matrix(phi11.raw, phi12.raw)
    if sample is None:
        cond = np.linalg.cond(qt.complexify(B))
        if mask is not None:
            cond = np.where(mask, np.inf, cond)
        sample = np.unravel_index(np.argmin(cond), cond.shape)
    m = qt.solve_2x2(B[sample], phi.raw[sample])
    fit = qt.vec_scale(phi11.raw, m[0]) + qt.vec_scale(phi12.raw, m[1])
    r = qt.vec_norm(phi.raw - fit)
    if mask is not None:
        r = r[~mask]
    return m[0], m[1], float(r.max() / np.abs(phi.raw).max())


def multiplier_check(fam_lam: LambdaFamily, eps: float = None, periods: int = 1, tol: float = 1e-6):
    """Check that multipliers at ``rho +- eps`` interpolate ``h_1`` to ``O(eps^2)``.

    Returns ``(status, details)`` with status ``"verified"`` or ``"unverified"``.
    """
    rho = fam_lam.rho
    eps = default_epsilon(rho) if eps is None else eps
    h1, r1 = fam_lam.phi1.estimate_multiplier(periods)
    hp, rp = fam_lam(rho + eps).estimate_multiplier(periods)
    hm, rm = fam_lam(rho - eps).estimate_multiplier(periods)
    dev = abs(0.5 * (hp + hm) - h1)
    bound = max(tol, 10.0 * eps * eps)
    ok = max(r1, rp, rm) < tol and dev < bound
    details = {"h1": h1, "h_plus": hp, "h_minus": hm, "deviation": dev, "fit_residual": max(r1, rp, rm)}
    return ("verified" if ok else "unverified"), details


def transform_metadata(rho: float, rule: str, eps: float, m1=None, m2=None, multiplier=None,
                       closure=None, **extra) -> dict:
    """Key-value record written next to exported transforms."""
    out = {"rho": rho, "extension": rule, "epsilon": eps}
    if m1 is not None:
        out["m1"] = m1
    if m2 is not None:
        out["m2"] = m2
    out["multiplier"] = multiplier
    out["closure_residual"] = closure
    out.update(extra)
    return out


def write_transform_metadata(path, meta: dict) -> None:
    write_metadata(path, meta)
