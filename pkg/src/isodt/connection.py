"""Retraction forms, the associated family ``d + lam eta`` and its holonomy.

Sections are integrated in the complex picture ``H^2 = C^4`` of
:mod:`isodt.quaternion`: the ODE ``dphi = -lam eta(gamma') phi`` becomes a
linear system for a complex 4-vector, solved with classical RK4 and ``ns``
substeps per grid edge.  Inside an edge, ``eta`` is reconstructed from the
nodal samples by 6-node Lagrange interpolation.

Sections live on the inclusive cover ``y in [0, 2 pi W]`` (``ny W + 1``
samples per x-node), so multipliers can be read off directly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import quaternion as qt
from ._numerics import (
    derivative,
    edge_stencil,
    interp_all_edges,
    interp_edge,
    lagrange_weights,
    rk4_linear,
)
from .errors import GridError
from .quaternion import HEndo2, HVector2
from .surface import SurfaceGrid

__all__ = [
    "GridRetractionForm",
    "AnalyticRetractionForm",
    "ConnectionFamily",
    "SectionField",
    "MultiplierClass",
    "MultiplierSet",
    "SpectrumClass",
    "eta_from_omega",
    "build_eta",
    "curvature_residual",
    "parallel_transport",
    "integrate_section",
    "parallelism_residual",
    "holonomy",
    "holonomy_matrix",
    "multipliers",
    "classify_spectrum",
    "scan_spectrum",
    "write_scan_csv",
]

DEFAULT_NS = 4


def eta_from_omega(f, omega):
    """``[[f w, -f w f], [w, -w f]]`` for quaternion arrays ``f`` and ``w``."""
    fw = qt.qmul(f, omega)
    top = np.stack([fw, -qt.qmul(fw, f)], axis=-2)
    bot = np.stack([omega, -qt.qmul(omega, f)], axis=-2)
    return np.stack([top, bot], axis=-3)


class _FormBase:
    """Common interface of retraction forms on the node lattice of a grid."""

    surface: SurfaceGrid

    @property
    def periodic_y(self) -> bool:
        return self.surface.periodic_y

    def _row(self, j):
        m = self.surface.m
        if self.periodic_y:
            return np.asarray(j) % m
        if np.any(np.asarray(j) >= m) or np.any(np.asarray(j) < 0):
            raise GridError("row outside a non-periodic lattice")
        return j

    def nodes_on_cover(self, n_cols):
        """Quaternionic node arrays of ``eta(d/dx), eta(d/dy)`` on ``n_cols`` rows."""
        idx = self._row(np.arange(n_cols))
        return self.eta_x[:, idx], self.eta_y[:, idx]


class GridRetractionForm(_FormBase):
    """Retraction form known through its nodal samples.

    Parameters
    ----------
    surface : SurfaceGrid
        Lattice carrying the samples.
    eta_x, eta_y : ndarray, shape (nx, m, 2, 2, 4)
        ``eta(d/dx)`` and ``eta(d/dy)`` at the nodes.
    """

    def __init__(self, surface: SurfaceGrid, eta_x, eta_y):
        shape = (surface.nx, surface.m, 2, 2, 4)
        eta_x = np.asarray(eta_x, dtype=float)
        eta_y = np.asarray(eta_y, dtype=float)
        if eta_x.shape != shape or eta_y.shape != shape:
            raise GridError(f"eta samples must have shape {shape}")
        self.surface = surface
        self.eta_x = eta_x
        self.eta_y = eta_y
        self._cx = None
        self._cy = None

    @property
    def cx(self):
        if self._cx is None:
            self._cx = qt.complexify(self.eta_x)
        return self._cx

    @property
    def cy(self):
        if self._cy is None:
            self._cy = qt.complexify(self.eta_y)
        return self._cy

    def y_edge(self, j: int, theta: float, cols=slice(None)):
        """Complexified ``eta(d/dy)`` inside the y-edge starting at row ``j``."""
        if self.periodic_y:
            j = j % self.surface.m
        elif not 0 <= j < self.surface.m - 1:
            raise GridError("edge outside a non-periodic lattice")
        return interp_edge(self.cy[cols], 1, j, theta, self.periodic_y)

    def x_edge(self, i: int, theta: float, rows):
        """Complexified ``eta(d/dx)`` inside the x-edge ``i`` on the given rows."""
        rows = self._row(np.asarray(rows))
        offs = edge_stencil(i, self.surface.nx, False)
        w = lagrange_weights(offs, float(theta))
        out = w[0] * self.cx[i + offs[0], rows]
        for k in range(1, len(offs)):
            out = out + w[k] * self.cx[i + offs[k], rows]
        return out

    def x_edges(self, theta: float, rows):
        """All x-edges at once, shape (nx-1, len(rows), 4, 4)."""
        rows = self._row(np.asarray(rows))
        return interp_all_edges(self.cx[:, rows], 0, theta, False)

    def y_edges(self, theta: float, rows):
        """y-edges starting at ``rows`` for every x-node, shape (nx, len(rows), 4, 4)."""
        return np.stack([self.y_edge(int(j), theta) for j in rows], axis=1)

    def perturbed(self, amplitude: float) -> "GridRetractionForm":
        """Non-closed perturbation ``eta_y += a sin(x) E`` (negative control)."""
        E = np.zeros((2, 2, 4))
        E[0, 1, 2] = 1.0
        E[1, 0, 3] = 1.0
        X, _ = self.surface.mesh()
        bump = amplitude * np.sin(np.pi * (X - X.min()) / (X.max() - X.min()) + 0.3)
        return GridRetractionForm(self.surface, self.eta_x, self.eta_y + bump[..., None, None, None] * E)


class AnalyticRetractionForm(_FormBase):
    """Retraction form given by a closure ``func(X, Y) -> (eta_x, eta_y)``."""

    def __init__(self, surface: SurfaceGrid, func: Callable):
        self.surface = surface
        self.func = func
        X, Y = surface.mesh()
        self.eta_x, self.eta_y = (np.asarray(a, dtype=float) for a in func(X, Y))

    def _eval(self, X, Y, which):
        return qt.complexify(self.func(X, Y)[which])

    def y_edge(self, j: int, theta: float, cols=slice(None)):
        x = self.surface.x[cols]
        y = np.full_like(x, (j + theta) * self.surface.hy)
        return self._eval(x, y, 1)

    def x_edge(self, i: int, theta: float, rows):
        rows = np.asarray(rows)
        y = rows * self.surface.hy
        x = np.full(y.shape, self.surface.x_range[0] + (i + theta) * self.surface.hx)
        return self._eval(x, y, 0)

    def x_edges(self, theta: float, rows):
        s = self.surface
        x = s.x[:-1] + theta * s.hx
        X, Y = np.meshgrid(x, np.asarray(rows) * s.hy, indexing="ij")
        return self._eval(X, Y, 0)

    def y_edges(self, theta: float, rows):
        s = self.surface
        X, Y = np.meshgrid(s.x, (np.asarray(rows) + theta) * s.hy, indexing="ij")
        return self._eval(X, Y, 1)


def build_eta(f: SurfaceGrid, fd: SurfaceGrid) -> GridRetractionForm:
    """Retraction form of ``f`` with ``w = d f^d`` from the dual grid ``fd``.

    Raises
    ------
    GridError
        If the two grids do not share the same lattice.
    """
    if fd.values.shape != f.values.shape or fd.periodic_y != f.periodic_y:
        raise GridError("f and fd must be sampled on the same lattice")
    wx = fd.derivative(0)
    wy = fd.derivative(1)
    return GridRetractionForm(f, eta_from_omega(f.values, wx), eta_from_omega(f.values, wy))


@dataclass(frozen=True, eq=False)
class ConnectionFamily:
    """The family of flat connections ``d + lam eta`` over a surface grid."""

    surface: SurfaceGrid
    eta: _FormBase

    @classmethod
    def from_surfaces(cls, f: SurfaceGrid, fd: SurfaceGrid) -> "ConnectionFamily":
        return cls(f, build_eta(f, fd))

    @property
    def n_cover(self) -> int:
        return self.surface.n_cover

    def psi(self, n_cols=None):
        """The section ``psi = (f, 1)`` spanning ``L`` on the cover."""
        f = self.surface.cover_values(n_cols)
        one = np.zeros_like(f)
        one[..., 0] = 1.0
        return np.stack([f, one], axis=-2)


@dataclass(eq=False)
class SectionField:
    """Section of the trivial ``H^2`` bundle on the cover ``[x0, x1] x [0, 2 pi W]``.

    ``values`` are normalised per x-node by ``scale`` (the norm at ``y = 0``);
    :attr:`raw` restores the actual section.  Real rescaling does not change
    the line ``phi H`` a section represents.
    """

    values: np.ndarray  # (nx, ny W + 1, 2, 4)
    scale: np.ndarray  # (nx,)
    lam: float
    surface: SurfaceGrid
    multiplier: Optional[complex] = None
    info: dict = field(default_factory=dict)

    @classmethod
    def from_raw(cls, raw, lam, surface, multiplier=None, info=None):
        raw = np.asarray(raw, dtype=float)
        s = qt.vec_norm(raw[:, 0])
        s = np.where(s > 0, s, 1.0)
        return cls(raw / s[:, None, None, None], s, lam, surface, multiplier, dict(info or {}))

    @property
    def raw(self) -> np.ndarray:
        return self.values * self.scale[:, None, None, None]

    @property
    def top(self):
        return self.raw[..., 0, :]

    @property
    def bottom(self):
        return self.raw[..., 1, :]

    def at(self, ix: int, iy: int) -> HVector2:
        return HVector2.from_array(self.raw[ix, iy])

    def scaled(self, q) -> "SectionField":
        """Right multiplication by a quaternion (array broadcastable to (nx, m, 4))."""
        return SectionField.from_raw(qt.vec_scale(self.raw, q), self.lam, self.surface, None, self.info)

    def __add__(self, other: "SectionField") -> "SectionField":
        return SectionField.from_raw(self.raw + other.raw, self.lam, self.surface, None, {})

    def __sub__(self, other: "SectionField") -> "SectionField":
        return SectionField.from_raw(self.raw - other.raw, self.lam, self.surface, None, {})

    def estimate_multiplier(self, periods: int = 1):
        """Least-squares complex ``h`` with ``phi(x, y + 2 pi) = phi(x, y) h``.

        Returns
        -------
        h : complex
        residual : float
            ``max |phi(y + 2 pi) - phi(y) h| / max |phi(y + 2 pi)|``.
        """
        ny = self.surface.ny * periods
        a = qt.complexify_vec(self.raw[:, :-ny]).reshape(-1)
        b = qt.complexify_vec(self.raw[:, ny:]).reshape(-1)
        h = np.vdot(a, b) / np.vdot(a, a)
        res = np.abs(b - a * h).max() / np.abs(b).max()
        return complex(h), float(res)


# ----------------------------------------------------------------------------
# transport
# ----------------------------------------------------------------------------

def _as_cvec(v):
    """Complex column representation (..., 4, k) of quaternion vectors (..., 2, 4)."""
    return qt.complexify_vec(v)[..., None]


def _y_transport(fam, lam, Y0, j0, n_edges, ns, cols=slice(None), record=True):
    """Transport complex states ``Y0`` (..., ncols, 4, k) up the y-columns."""
    lam = np.asarray(lam, dtype=float)
    lam_b = lam[..., None, None, None] if lam.ndim else lam
    hy = fam.surface.hy

    def M(k, theta):
        return -lam_b * fam.eta.y_edge(j0 + k, theta, cols)

    return rk4_linear(M, hy * np.arange(n_edges + 1), Y0, ns, record)


def _x_transport(fam, lam, Y0, rows, i0, i1, ns, record=True):
    """Transport states ``Y0`` (len(rows), 4, k) along x from node i0 to i1."""
    hx = fam.surface.hx
    step = 1 if i1 >= i0 else -1
    n_edges = abs(i1 - i0)

    def M(k, theta):
        a = i0 + step * k
        if step > 0:
            return -lam * fam.eta.x_edge(a, theta, rows)
        return -lam * fam.eta.x_edge(a - 1, 1.0 - theta, rows)

    return rk4_linear(M, step * hx * np.arange(n_edges + 1), Y0, ns, record)


def parallel_transport(fam: ConnectionFamily, lam: float, start, path, ns: int = DEFAULT_NS):
    """Transport ``start`` along a path of neighbouring grid nodes.

    Parameters
    ----------
    start : HVector2 or ndarray (2, 4)
    path : sequence of (ix, iy)
        Node indices; consecutive nodes must differ by one step in x or y.
        ``iy`` counts cover rows and may exceed one period on periodic grids.

    Returns
    -------
    HVector2 or ndarray
        The transported vector, same kind as ``start``.
    """
    as_obj = isinstance(start, HVector2)
    v = start.array if as_obj else np.asarray(start, dtype=float)
    y = _as_cvec(v)
    for (a0, b0), (a1, b1) in zip(path[:-1], path[1:]):
        if abs(a1 - a0) + abs(b1 - b0) != 1:
            raise GridError("path must follow grid edges")
        if a0 == a1:
            step = b1 - b0
            j = b0 if step > 0 else b1
            hy = fam.surface.hy * step

            def M(k, theta, j=j, step=step, a=a0):
                th = theta if step > 0 else 1.0 - theta
                return -lam * fam.eta.y_edge(j, th, slice(a, a + 1))[0]

            y = rk4_linear(M, [0.0, hy], y, ns, record=False)
        else:
            y = _x_transport(fam, lam, y[None], [b0], a0, a1, ns, record=False)[0]
    out = qt.decomplexify_vec(y[..., 0])
    return HVector2.from_array(out) if as_obj else out


def integrate_section(
    fam: ConnectionFamily,
    lam: float,
    seed,
    order: str = "row-first",
    ns: int = DEFAULT_NS,
    ix0: int = 0,
    multiplier=None,
) -> SectionField:
    """Parallel section of ``d + lam eta`` with ``phi(x_{ix0}, 0) = seed``.

    ``order="row-first"`` transports along the row ``y = 0`` and then up every
    column; ``"columns-first"`` goes up the column ``ix0`` and then along every
    row.  The output is deterministic for given inputs.
    """
    v = seed.array if isinstance(seed, HVector2) else np.asarray(seed, dtype=float)
    if qt.vec_norm(v) == 0:
        raise ValueError("seed must be nonzero")
    s = fam.surface
    nc = fam.n_cover
    y0 = _as_cvec(v)
    if order == "row-first":
        row = np.empty((s.nx, 4, 1), dtype=complex)
        row[ix0] = y0
        if ix0 < s.nx - 1:
            row[ix0:] = _x_transport(fam, lam, y0[None], [0], ix0, s.nx - 1, ns)[0]
        if ix0 > 0:
            row[: ix0 + 1] = _x_transport(fam, lam, y0[None], [0], ix0, 0, ns)[0][::-1]
        norms = np.linalg.norm(row[:, :, 0], axis=-1)
        states = _y_transport(fam, lam, row / norms[:, None, None], 0, nc - 1, ns)
        vals = qt.decomplexify_vec(states[..., 0])
        raw = vals * norms[:, None, None, None]
    elif order == "columns-first":
        col = _y_transport(fam, lam, y0[None], 0, nc - 1, ns, cols=slice(ix0, ix0 + 1))[0]
        rows = np.arange(nc)
        out = np.empty((s.nx, nc, 4, 1), dtype=complex)
        out[ix0] = col
        if ix0 < s.nx - 1:
            out[ix0:] = np.moveaxis(_x_transport(fam, lam, col, rows, ix0, s.nx - 1, ns), 1, 0)
        if ix0 > 0:
            out[: ix0 + 1] = np.moveaxis(_x_transport(fam, lam, col, rows, ix0, 0, ns), 1, 0)[::-1]
        raw = qt.decomplexify_vec(out[..., 0])
    else:
        raise ValueError(f"unknown integration order {order!r}")
    # complex 2-norm of C^4 equals the quaternionic norm, so scales agree
    return SectionField.from_raw(raw, lam, s, multiplier, {"order": order, "ns": ns})


def parallelism_residual(fam: ConnectionFamily, phi: SectionField, per_direction=False):
    """Nodal ``max |d phi + lam eta phi| / |phi|`` using 7-point differences."""
    raw = phi.raw
    ex, ey = fam.eta.nodes_on_cover(raw.shape[1])
    s = fam.surface
    n = qt.vec_norm(raw)
    out = []
    for axis, eta, h in ((0, ex, s.hx), (1, ey, s.hy)):
        d = derivative(raw, h, axis, False)
        r = qt.vec_norm(d + phi.lam * qt.matvec(eta, raw)) / n
        out.append(float(r.max()))
    return tuple(out) if per_direction else max(out)


def curvature_residual(fam: ConnectionFamily, lam: float, ns: int = DEFAULT_NS, block: int = 64,
                       extended: bool = False) -> float:
    """Largest plaquette holonomy deviation ``|U - I| / area``.

    Every plaquette of the base lattice is traversed counter-clockwise with
    RK4 transport; ``|.|`` is the Frobenius norm of the complexified matrix.
    With ``extended`` the transport runs in ``clongdouble`` (about 4x
    slower).  In double precision the rounding accumulated in ``U``, about
    ``1e-15 / area``, hides the discretisation error on fine grids.
    """
    dtype = np.clongdouble if extended else complex
    s = fam.surface
    n_rows = s.m if s.periodic_y else s.m - 1
    hx, hy = s.hx, s.hy
    worst = 0.0
    thetas = [k / (2 * ns) for k in range(2 * ns + 1)]
    for r0 in range(0, n_rows, block):
        rows = np.arange(r0, min(r0 + block, n_rows))
        bx = {t: fam.eta.x_edges(t, rows) for t in thetas}
        tx = {t: fam.eta.x_edges(t, rows + 1) for t in thetas}
        ly = {t: fam.eta.y_edges(t, rows) for t in thetas}
        U = np.broadcast_to(np.eye(4, dtype=dtype), (s.nx - 1, len(rows), 4, 4)).copy()
        legs = (
            (lambda th: bx[th], hx, False),
            (lambda th: ly[th][1:], hy, False),
            (lambda th: tx[th], -hx, True),
            (lambda th: ly[th][:-1], -hy, True),
        )
        for get, h, rev in legs:
            def M(k, theta, get=get, rev=rev):
                th = 1.0 - theta if rev else theta
                return (-lam * get(_snap(th, thetas))).astype(dtype)

            U = rk4_linear(M, [0.0, h], U, ns, record=False, dtype=dtype)
        D = U - np.eye(4, dtype=dtype)
        dev = np.sqrt((np.abs(D) ** 2).sum(axis=(-2, -1))).max()
        worst = max(worst, float(dev))
    return worst / (hx * hy)


def _snap(theta, grid):
    k = int(round(theta * (len(grid) - 1)))
    return grid[k]


# ----------------------------------------------------------------------------
# holonomy and multipliers
# ----------------------------------------------------------------------------

def _nearest_ix(fam, x):
    if x is None:
        return 0
    s = fam.surface
    return int(np.clip(round((x - s.x_range[0]) / s.hx), 0, s.nx - 1))


def holonomy_matrix(fam: ConnectionFamily, lam, x=None, ns: int = DEFAULT_NS):
    """Complexified transport around ``y in [0, 2 pi]`` at the node nearest ``x``.

    ``lam`` may be an array; the result then has shape ``lam.shape + (4, 4)``.
    """
    if not fam.surface.periodic_y:
        raise GridError("holonomy needs a periodic grid")
    ix = _nearest_ix(fam, x)
    lam = np.asarray(lam, dtype=float)
    Y0 = np.broadcast_to(np.eye(4, dtype=complex), lam.shape + (1, 4, 4)).copy()
    P = _y_transport(fam, lam, Y0, 0, fam.surface.ny, ns, cols=slice(ix, ix + 1), record=False)
    return P[..., 0, :, :]


def holonomy(fam: ConnectionFamily, lam: float, x=None, ns: int = DEFAULT_NS) -> HEndo2:
    """Holonomy of ``d + lam eta`` once around the y-circle, as a quaternionic matrix."""
    return HEndo2.from_array(qt.decomplexify(holonomy_matrix(fam, lam, x, ns)))


@dataclass
class MultiplierClass:
    """An eigenvalue cluster of the complexified holonomy."""

    h: complex
    multiplicity: int
    nullity: int
    seeds: list

    @property
    def defective(self) -> bool:
        return self.nullity < self.multiplicity


@dataclass
class MultiplierSet:
    """Eigen-structure of one holonomy.

    ``pairs`` lists the multiplier pairs ``(h, conj h)`` with the
    representative ``Im h >= 0`` first; real pairs appear once per
    quaternionic eigenline.
    """

    lam: float
    matrix: np.ndarray
    eigenvalues: np.ndarray
    clusters: list
    singular_values: dict
    condition: float

    @property
    def defective(self) -> bool:
        return any(c.defective for c in self.clusters)

    @property
    def representatives(self):
        reps = [c.h for c in self.clusters if c.h.imag >= -1e-12 * max(1.0, abs(c.h))]
        return sorted(reps, key=lambda h: (h.real, h.imag))

    def values(self):
        """Multipliers ``(h1, h2)`` of the two quaternionic eigenlines."""
        cl = self.clusters
        if len(cl) == 1:
            return cl[0].h, cl[0].h
        if len(cl) == 2:
            a, b = cl
            if abs(a.h.imag) <= 1e-9 * max(1.0, abs(a.h)) and abs(b.h.imag) <= 1e-9 * max(1.0, abs(b.h)):
                return tuple(sorted((complex(a.h.real, 0), complex(b.h.real, 0)), key=lambda z: z.real))
            up = a if a.h.imag >= 0 else b
            return up.h, np.conj(up.h)
        reps = self.representatives
        return (reps + reps)[:2]


def _cluster(ev, tol):
    order = np.lexsort((ev.imag, ev.real))
    groups = []
    for k in order:
        for g in groups:
            if abs(ev[k] - np.mean(ev[g])) <= tol:
                g.append(k)
                break
        else:
            groups.append([k])
    return groups


def multipliers(
    fam: ConnectionFamily,
    lam: float,
    x=None,
    ns: int = DEFAULT_NS,
    P=None,
    merge_tol: float = 1e-3,
    gap: float = 1e-6,
    rank_tol: float = 1e-8,
    spread_factor: float = 100.0,
) -> MultiplierSet:
    """Eigen-decomposition of the complexified holonomy.

    Eigenvalues closer than ``merge_tol`` (relative) are merged and tested
    with the singular values of ``P - h I``.  The rank threshold is
    ``rank_tol |P|`` raised to ``spread_factor`` times the eigenvalue spread
    of the cluster (capped at ``merge_tol |P|``): discretisation noise splits
    a semisimple eigenvalue by about the noise level, a Jordan block by its
    square root while keeping an O(1) singular value.
    A merged cluster without numerical null space is split again at the
    relative gap ``gap``.  A cluster whose null space is smaller than its
    size is a Jordan (defective) block; eigensections are then not
    returned silently but flagged through :attr:`MultiplierClass.nullity`.
    """
    if P is None:
        P = holonomy_matrix(fam, lam, x, ns)
    normP = np.linalg.norm(P, 2)
    ev, vecs = np.linalg.eig(P)
    cond = float(np.linalg.cond(vecs))
    scale = max(1.0, float(np.abs(ev).max()))
    clusters = []
    svals = {}

    def threshold(idx, h):
        spread = float(np.abs(ev[idx] - h).max())
        return min(merge_tol * normP, max(rank_tol * normP, spread_factor * spread))

    for g in _cluster(ev, merge_tol * scale):
        sub_groups = [g]
        h = complex(np.mean(ev[g]))
        sv = np.linalg.svd(P - h * np.eye(4), compute_uv=False)
        if len(g) > 1:
            thr = threshold(g, h)
            null = int(np.sum(sv < thr))
            spread = float(np.abs(ev[g] - h).max())
            # a Jordan block keeps an O(1) singular value; a resolved split does not
            jordan = 0 < null < len(g) and sv[4 - len(g)] > spread_factor * spread
            if null == 0 or (null < len(g) and not jordan):
                sub_groups = [[g[i] for i in sg] for sg in _cluster(ev[g], gap * scale)]
        for sg in sub_groups:
            h = complex(np.mean(ev[sg]))
            U, sv, Vh = np.linalg.svd(P - h * np.eye(4))
            null = int(np.sum(sv < threshold(sg, h)))
            if null == 0:
                null = 1 if len(sg) == 1 else 0
            basis = Vh.conj().T[:, 4 - max(null, 1):]
            seeds = [HVector2.from_array(qt.decomplexify_vec(basis[:, c])) for c in range(basis.shape[1])]
            svals[h] = sv
            clusters.append(MultiplierClass(h, len(sg), null, seeds))
    clusters.sort(key=lambda c: (c.h.real, c.h.imag))
    return MultiplierSet(float(lam), P, ev, clusters, svals, cond)


@dataclass
class SpectrumClass:
    """Classification of the holonomy at one spectral parameter."""

    lam: float
    kind: str
    h1: complex
    h2: complex
    defective: bool
    ill_conditioned: bool
    evidence: MultiplierSet = None

    def csv_row(self):
        return [
            repr(float(self.lam)), self.kind,
            repr(float(np.real(self.h1))), repr(float(np.imag(self.h1))),
            repr(float(np.real(self.h2))), repr(float(np.imag(self.h2))),
            str(int(self.defective)),
        ]


KINDS = ("trivial", "defective-real", "two-real", "circle-pair", "resonance", "four-distinct", "irregular")


def _kind(ms: MultiplierSet) -> str:
    cl = ms.clusters
    real = [abs(c.h.imag) <= 1e-9 * max(1.0, abs(c.h)) for c in cl]
    if len(cl) == 1:
        c = cl[0]
        return "resonance" if c.nullity == 4 else "defective-real"
    if len(cl) == 2 and all(c.multiplicity == 2 for c in cl):
        if all(real):
            return "two-real"
        if abs(cl[0].h - np.conj(cl[1].h)) <= 1e-6 * max(1.0, abs(cl[0].h)):
            return "circle-pair"
    if len(cl) == 4:
        return "four-distinct"
    return "irregular"


def classify_spectrum(fam: ConnectionFamily, lam: float, x=None, ns: int = DEFAULT_NS, P=None,
                      cond_max: float = 1e8) -> SpectrumClass:
    """Kind of the holonomy spectrum at ``lam``.

    Kinds: ``defective-real`` (Jordan block, a single closed transform),
    ``two-real``, ``circle-pair`` (conjugate unit pair), ``resonance`` (every
    section has a multiplier), ``four-distinct``; ``lam = 0`` is ``trivial``.
    """
    ms = multipliers(fam, lam, x, ns, P=P)
    h1, h2 = ms.values()
    kind = "trivial" if lam == 0 else _kind(ms)
    ill = ms.condition > cond_max and not ms.defective and kind != "resonance"
    return SpectrumClass(float(lam), kind, complex(h1), complex(h2), ms.defective, ill, ms)


def scan_spectrum(fam: ConnectionFamily, lams, x=None, ns: int = DEFAULT_NS):
    """Classify the holonomy at every ``lam`` (transports batched over ``lam``)."""
    lams = np.asarray(lams, dtype=float)
    P = holonomy_matrix(fam, lams, x, ns)
    return [classify_spectrum(fam, float(l), P=P[k]) for k, l in enumerate(lams)]


SCAN_HEADER = ["lambda", "class", "Re h1", "Im h1", "Re h2", "Im h2", "defective_flag"]


def write_scan_csv(rows, path) -> None:
    """Write scan rows as CSV to a path or an open text stream."""
    import csv

    def emit(fh):
        w = csv.writer(fh)
        w.writerow(SCAN_HEADER)
        for r in rows:
            w.writerow(r.csv_row())

    if hasattr(path, "write"):
        emit(path)
    else:
        with open(path, "w", newline="") as fh:
            emit(fh)
