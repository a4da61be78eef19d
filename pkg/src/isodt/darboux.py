"""One-step Darboux transforms, the Riccati equation and simple factor dressing.

A ``d_rho``-parallel section ``phi = e alpha + psi beta`` (``e = (1, 0)``,
``psi = (f, 1)``) defines the transform ``f^ = f + T`` with ``T = alpha
beta^{-1}``.  The line ``L^ = phi H`` and ``L = psi H`` split ``H^2``; the
projections ``pi^`` onto ``L^`` and ``pi`` onto ``L`` give the gauge
``r(lam) = pi^ + rho / (rho - lam) pi`` and the transformed retraction form
``eta^ = -(1/rho) pi^ d pi``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import quaternion as qt
from ._numerics import derivative
from .connection import ConnectionFamily, GridRetractionForm, SectionField, eta_from_omega, parallelism_residual
from .errors import DegenerateError, NotParallelError, SingularQuaternionError
from .quaternion import HVector2, Quaternion
from .surface import SurfaceGrid, discrete_diff, gauss_map, mean_curvature

__all__ = [
    "split_section",
    "DarbouxResult",
    "darboux_transform",
    "transform_from_line",
    "riccati_residual",
    "DressedFamily",
    "dress_family",
    "sigma",
    "darboux_mean_curvature",
    "cmc_obstruction",
]


def split_section(phi, psi):
    """Coefficients ``(alpha, beta)`` with ``phi = e alpha + psi beta``.

    Works on :class:`HVector2` (returning :class:`Quaternion`) or on arrays of
    shape (..., 2, 4).

    Raises
    ------
    DegenerateError
        If the bottom entry of ``psi`` vanishes (``f`` at infinity).
    """
    as_obj = isinstance(phi, HVector2)
    p = phi.array if as_obj else np.asarray(phi, dtype=float)
    s = psi.array if isinstance(psi, HVector2) else np.asarray(psi, dtype=float)
    try:
        beta = qt.qmul(qt.qinv(s[..., 1, :]), p[..., 1, :])
    except SingularQuaternionError as exc:
        raise DegenerateError("affine chart degenerate: psi has zero bottom entry") from exc
    alpha = p[..., 0, :] - qt.qmul(s[..., 0, :], beta)
    if as_obj:
        return Quaternion.from_array(alpha), Quaternion.from_array(beta)
    return alpha, beta


def _safe_inv(a, tiny):
    n2 = qt.qnorm2(a)
    return qt.qconj(a) / np.maximum(n2, tiny)[..., None]


@dataclass(eq=False)
class DarbouxResult:
    """A transform ``f^ = f + T`` on the inclusive cover.

    Attributes
    ----------
    surface : SurfaceGrid
        ``f^`` sampled on ``ny W + 1`` y-samples (non-periodic grid).
    base : SurfaceGrid
        The surface ``f`` that was transformed.
    T : ndarray (nx, ny W + 1, 4)
    phi : SectionField
    rho : float
    alpha, beta : ndarray
        Coefficients of ``phi = e alpha + psi beta``.
    touching, infinite : ndarray of bool
        Samples with ``alpha ~ 0`` (``f^ = f``) or ``beta ~ 0`` (``f^`` at infinity).
    """

    surface: SurfaceGrid
    base: SurfaceGrid
    T: np.ndarray
    phi: SectionField
    rho: float
    alpha: np.ndarray
    beta: np.ndarray
    touching: np.ndarray
    infinite: np.ndarray
    info: dict = field(default_factory=dict)

    @property
    def mask(self) -> np.ndarray:
        """True at singular samples."""
        return self.touching | self.infinite

    @property
    def singular_points(self):
        return [tuple(ix) for ix in np.argwhere(self.mask)]

    def closure_residual(self) -> float:
        return self.surface.closure_residual()

    def closed_surface(self, tol: float = 1e-6) -> SurfaceGrid:
        """``f^`` as a periodic grid if it closes up within ``tol``."""
        s = self.surface
        if s.closure_residual() > tol:
            return s
        return SurfaceGrid(s.values[:, :-1], s.x_range, s.ny, s.wraps, True)


def transform_from_line(base: SurfaceGrid, phi: SectionField, rho: float, singular_tol: float = 1e-8,
                        info=None) -> DarbouxResult:
    """Point ``f^ = top(phi) bottom(phi)^{-1}`` of the line ``phi H`` in the chart of ``base``."""
    nc = phi.values.shape[1]
    fvals = base.cover_values(nc)
    one = np.zeros_like(fvals)
    one[..., 0] = 1.0
    psi = np.stack([fvals, one], axis=-2)
    raw = phi.raw
    alpha, beta = split_section(raw, psi)
    nphi = qt.vec_norm(raw)
    touching = qt.qnorm(alpha) < singular_tol * nphi
    infinite = qt.qnorm(beta) < singular_tol * nphi
    if np.all(touching):
        raise DegenerateError("section lies in L everywhere: no transform")
    T = qt.qmul(alpha, _safe_inv(beta, (singular_tol * nphi) ** 2))
    surf = SurfaceGrid(fvals + T, base.x_range, base.ny, base.wraps, False)
    return DarbouxResult(surf, base, T, phi, float(rho), alpha, beta, touching, infinite, dict(info or {}))


def darboux_transform(fam: ConnectionFamily, phi: SectionField, rho: float = None,
                      check_tol: float = 1e-2, singular_tol: float = 1e-8) -> DarbouxResult:
    """Darboux transform of ``fam.surface`` given by a ``d_rho``-parallel section.

    Raises
    ------
    NotParallelError
        If the nodal parallelism residual of ``phi`` exceeds ``check_tol``.
    DegenerateError
        If ``phi`` lies in ``L`` at every sample.
    """
    rho = phi.lam if rho is None else rho
    if rho == 0:
        raise ValueError("rho must be nonzero")
    if abs(rho - phi.lam) > 1e-14 * max(1.0, abs(rho)):
        raise NotParallelError("section belongs to a different spectral parameter")
    if check_tol is not None:
        res = parallelism_residual(fam, phi)
        if res > check_tol:
            raise NotParallelError(f"section is not parallel (residual {res:.3g})")
    else:
        res = None
    out = transform_from_line(fam.surface, phi, rho, singular_tol)
    out.info["parallelism_residual"] = res
    return out


def sigma(rho: float, lam: float) -> float:
    """``rho / (rho - lam)``, the scalar of the gauge ``r(lam)``."""
    return rho / (rho - lam)


def riccati_residual(f: SurfaceGrid, fd: SurfaceGrid, T, rho: float, mask=None) -> float:
    """``max |dT + df - rho T df^d T|``, relative to ``|df| + |rho| |T|^2 |df^d|``.

    Evaluated at the nodes of the cover carrying ``T`` with 7-point differences.
    """
    T = np.asarray(T, dtype=float)
    nc = T.shape[1]
    fv = f.cover_values(nc)
    dv = fd.cover_values(nc)
    worst = 0.0
    for axis, h in ((0, f.hx), (1, f.hy)):
        dT = derivative(T, h, axis, False)
        df = derivative(fv, h, axis, False)
        dfd = derivative(dv, h, axis, False)
        r = dT + df - rho * qt.qmul(qt.qmul(T, dfd), T)
        scale = qt.qnorm(df) + abs(rho) * qt.qnorm2(T) * qt.qnorm(dfd)
        rel = qt.qnorm(r) / scale
        if mask is not None:
            rel = rel[~np.asarray(mask, dtype=bool)]
        worst = max(worst, float(rel.max()))
    return worst


def _outer(u, row):
    """Endomorphism ``v -> u (row . v)`` for a 2-vector ``u`` and a row ``(r1, r2)``."""
    return np.stack([
        np.stack([qt.qmul(u[..., 0, :], row[..., 0, :]), qt.qmul(u[..., 0, :], row[..., 1, :])], axis=-2),
        np.stack([qt.qmul(u[..., 1, :], row[..., 0, :]), qt.qmul(u[..., 1, :], row[..., 1, :])], axis=-2),
    ], axis=-3)


class DressedFamily:
    """Simple factor dressing of ``d_lam`` by a Darboux transform.

    Attributes
    ----------
    pi, pi_hat : ndarray (nx, nc, 2, 2, 4)
        Projections onto ``L`` along ``L^`` and onto ``L^`` along ``L``.
    eta_hat_x, eta_hat_y : ndarray
        ``eta^ = -(1/rho) pi^ d pi`` at the nodes.
    family : ConnectionFamily
        ``d + lam eta^``, the associated family of the transform.
    condition : ndarray
        Condition number of the basis ``(phi, psi)`` per sample.
    """

    def __init__(self, fam: ConnectionFamily, result: DarbouxResult, cond_max: float = 1e10):
        self.base_family = fam
        self.result = result
        self.rho = result.rho
        raw = result.phi.raw
        nc = raw.shape[1]
        self.nc = nc
        psi = fam.psi(nc)
        self.psi = psi
        B = qt.column_matrix(raw, psi)
        M = qt.complexify(B)
        self.condition = np.linalg.cond(M)
        self.degenerate = ~np.isfinite(self.condition) | (self.condition > cond_max)
        if np.all(self.degenerate):
            raise DegenerateError("splitting degenerate everywhere")
        Msafe = np.where(self.degenerate[..., None, None], np.eye(4), M)
        Binv = qt.decomplexify(np.linalg.inv(Msafe))
        self.pi_hat = _outer(raw, Binv[..., 0, :, :])
        self.pi = _outer(psi, Binv[..., 1, :, :])
        s = result.surface
        self.hx, self.hy = s.hx, s.hy
        dpx = derivative(self.pi, s.hx, 0, False)
        dpy = derivative(self.pi, s.hy, 1, False)
        self.dpi = (dpx, dpy)
        self.eta_hat_x = -qt.matmul(self.pi_hat, dpx) / self.rho
        self.eta_hat_y = -qt.matmul(self.pi_hat, dpy) / self.rho
        self.family = ConnectionFamily(s, GridRetractionForm(s, self.eta_hat_x, self.eta_hat_y))

    @property
    def surface(self) -> SurfaceGrid:
        return self.result.surface

    @property
    def mask(self):
        return self.degenerate | self.result.mask

    def eta_hat_closed_form(self):
        """``(1/rho) psi^ T^-1 df T^-1 (1, -f^)`` with ``psi^ = (f^, 1)`` (7-point ``df``)."""
        res = self.result
        T = res.T
        Tinv = qt.qinv(T)
        fv = res.base.cover_values(self.nc)
        fh = res.surface.values
        out = []
        for axis, h in ((0, self.hx), (1, self.hy)):
            df = derivative(fv, h, axis, False)
            w = qt.qmul(qt.qmul(Tinv, df), Tinv) / self.rho
            out.append(eta_from_omega(fh, w))
        return tuple(out)

    def gauge(self, lam: float):
        """``r(lam) = pi^ + sigma pi`` at every sample."""
        return self.pi_hat + sigma(self.rho, lam) * self.pi

    def connection_form(self, lam: float):
        """Coefficients ``(A_x, A_y)`` of ``r(lam) . d_lam = d + A``.

        At ``lam = rho`` this is ``rho eta^``; elsewhere the gauge
        ``r d(r^-1) + lam r eta r^-1`` is evaluated numerically.
        """
        if lam == self.rho:
            return self.rho * self.eta_hat_x, self.rho * self.eta_hat_y
        sg = sigma(self.rho, lam)
        r = self.pi_hat + sg * self.pi
        rinv = self.pi_hat + self.pi / sg
        ex, ey = self.base_family.eta.nodes_on_cover(self.nc)
        out = []
        for dpi, eta in zip(self.dpi, (ex, ey)):
            drinv = (1.0 / sg - 1.0) * dpi
            out.append(qt.matmul(r, drinv) + lam * qt.matmul(qt.matmul(r, eta), rinv))
        return tuple(out)

    def gauge_residual(self, lam: float) -> float:
        """``max |A_lam - lam eta^|`` relative to ``|lam| max |eta^|`` over regular samples."""
        ax, ay = self.connection_form(lam)
        ok = ~self.mask
        dev = max(
            np.abs(ax - lam * self.eta_hat_x)[ok].max(),
            np.abs(ay - lam * self.eta_hat_y)[ok].max(),
        )
        scale = abs(lam) * max(np.abs(self.eta_hat_x)[ok].max(), np.abs(self.eta_hat_y)[ok].max())
        return float(dev / scale) if scale > 0 else float(dev)

    def limit_check(self, exponents=(3, 4, 5, 6)):
        """Deviation of the symmetric average of ``A`` at ``rho +- 10^-m`` from ``rho eta^``.

        The simple pole of ``sigma`` cancels in the average, so the deviation
        shrinks with ``m`` until it reaches the discretisation floor.
        """
        ok = ~self.mask
        ref = (self.rho * self.eta_hat_x, self.rho * self.eta_hat_y)
        scale = max(np.abs(ref[0])[ok].max(), np.abs(ref[1])[ok].max())
        out = []
        for m in exponents:
            d = 10.0 ** (-m)
            ap = self.connection_form(self.rho + d)
            am = self.connection_form(self.rho - d)
            dev = max(np.abs(0.5 * (ap[k] + am[k]) - ref[k])[ok].max() for k in range(2))
            out.append(float(dev / scale))
        return out

    def apply(self, lam: float, raw):
        """``(r . d_lam) phi`` per direction, 7-point differences; shape (2, nx, nc, 2, 4)."""
        ax, ay = self.connection_form(lam)
        raw = np.asarray(raw, dtype=float)
        return np.stack([derivative(raw, h, axis, False) + qt.matvec(A, raw)
                         for axis, h, A in ((0, self.hx, ax), (1, self.hy, ay))])

    def generator_residual(self, lam: float) -> float:
        """``max |A_lam phi| / max |d phi|`` for the generating section, so ``(r . d_lam) phi = d phi``."""
        ax, ay = self.connection_form(lam)
        raw = self.result.phi.raw
        ok = ~self.mask
        num = max(float(qt.vec_norm(qt.matvec(A, raw))[ok].max()) for A in (ax, ay))
        den = max(float(qt.vec_norm(derivative(raw, h, axis, False))[ok].max())
                  for axis, h in ((0, self.hx), (1, self.hy)))
        return num / den

    def kernel_residual(self) -> float:
        """``max(|eta^ eta^|, |eta^ phi|, |(1 - pi^) eta^|)`` relative to ``|eta^|``.

        Checks ``Im eta^ = L^ = ker eta^`` at the regular samples.
        """
        raw = self.result.phi.raw
        ok = ~self.mask
        worst = 0.0
        for E in (self.eta_hat_x, self.eta_hat_y):
            scale = np.abs(E)[ok].max()
            unit = raw / qt.vec_norm(raw)[..., None, None]
            terms = (qt.matmul(E, E) / scale, qt.matvec(E, unit), qt.matmul(self.pi, E))
            worst = max(worst, max(float(np.abs(t)[ok].max()) for t in terms) / scale)
        return worst

    def project(self, phi_raw):
        """``pi phi`` (onto ``L`` along ``L^``)."""
        return qt.matvec(self.pi, phi_raw)

    def project_hat(self, phi_raw):
        return qt.matvec(self.pi_hat, phi_raw)


def dress_family(fam: ConnectionFamily, result: DarbouxResult, cond_max: float = 1e10) -> DressedFamily:
    """Dressed family ``r(lam) . d_lam`` of the transform in ``result``."""
    return DressedFamily(fam, result, cond_max)


def _cover_field(grid: SurfaceGrid, field_values, nc):
    idx = np.arange(nc) % grid.m if grid.periodic_y else np.arange(nc)
    return field_values[:, idx]


def darboux_mean_curvature(f: SurfaceGrid, fd: SurfaceGrid, T, rho: float) -> np.ndarray:
    """``H^ = -(H^d / rho - 2 <T, N>) / |T|^2`` on the samples of ``T``.

    Raises
    ------
    SingularQuaternionError
        If ``|T|`` vanishes somewhere.
    """
    T = np.asarray(T, dtype=float)
    nc = T.shape[1]
    N = _cover_field(f, gauss_map(discrete_diff(f)), nc)
    Hd = _cover_field(fd, mean_curvature(fd), nc)
    n2 = qt.qnorm2(T)
    if np.any(n2 <= 1e-24):
        raise SingularQuaternionError("|T| vanishes")
    return -(Hd / rho - 2.0 * qt.qdot(T, N)) / n2


def cmc_obstruction(f: SurfaceGrid, fd: SurfaceGrid, T, rho: float, H_hat: float,
                    relative: bool = False) -> np.ndarray:
    """``(H - H^) <df, T> + dH^d / (2 rho)`` per sample and direction, shape (nx, nc, 2).

    With ``relative=True`` each entry is divided by the sum of the magnitudes
    of the two terms, so the result lies in ``[0, 1]`` and compares across
    surfaces.
    """
    T = np.asarray(T, dtype=float)
    nc = T.shape[1]
    frame = discrete_diff(f)
    H = _cover_field(f, mean_curvature(f), nc)
    Hd_grid = mean_curvature(fd)
    out = []
    for axis, fs in ((0, frame.fx), (1, frame.fy)):
        dHd = _cover_field(fd, fd.derivative(axis, Hd_grid), nc)
        first = (H - H_hat) * qt.qdot(_cover_field(f, fs, nc), T)
        second = dHd / (2.0 * rho)
        val = first + second
        if relative:
            size = np.abs(first) + np.abs(second)
            val = np.abs(val) / np.maximum(size, 1e-300)
        out.append(val)
    return np.stack(out, axis=-1)
