"""Sampled conformal immersions on a rectangle with periodic ``y``.

A :class:`SurfaceGrid` stores quaternion samples ``f(x_a, y_b)`` on the nodes

    x_a = x0 + a (x1 - x0) / (nx - 1),   a = 0 .. nx-1
    y_b = 2 pi b / ny,                   b = 0 .. m-1

where ``m = ny * wraps`` for periodic grids (the seam row ``y = 2 pi wraps`` is
implied) and ``m = ny * wraps + 1`` otherwise (the endpoint is stored).
Derivatives use 7-point central differences, wrapped in ``y`` on periodic
grids, with 5-point one-sided stencils at open boundaries.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import quaternion as qt
from ._numerics import cumulative_integral, derivative
from .errors import DegenerateError, GridError, NonConformalError, NotClosedError

__all__ = [
    "SurfaceGrid",
    "TangentFrame",
    "discrete_diff",
    "gauss_map",
    "mean_curvature",
    "christoffel_dual",
    "closedness_residual",
    "wedge_residual",
    "conformality_residual",
    "write_csv",
    "read_csv",
    "write_obj",
]

MIN_SAMPLES = 4


@dataclass(frozen=True, eq=False)
class SurfaceGrid:
    """Quaternion samples of an immersion on a uniform nodal grid.

    Parameters
    ----------
    values : ndarray, shape (nx, m, 4)
        Samples ``(w, x, y, z)``.
    x_range : tuple of float
        ``(x0, x1)``, both endpoints are nodes.
    ny : int
        Samples per ``2 pi`` in ``y``.
    wraps : int
        Number ``W`` of periods covered, ``y`` spans ``[0, 2 pi W]``.
    periodic_y : bool
        ``f(x, y + 2 pi) = f(x, y)``; the seam column is then not stored.
    """

    values: np.ndarray
    x_range: tuple
    ny: int
    wraps: int = 1
    periodic_y: bool = True
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "x_range", (float(self.x_range[0]), float(self.x_range[1])))
        if v.ndim != 3 or v.shape[-1] != 4:
            raise GridError(f"values must have shape (nx, m, 4), got {v.shape}")
        if self.wraps < 1:
            raise GridError("wraps must be a positive integer")
        if v.shape[0] < MIN_SAMPLES or self.ny < MIN_SAMPLES:
            raise GridError("grid too small: need nx, ny >= 4")
        if v.shape[1] != self.expected_columns(self.ny, self.wraps, self.periodic_y):
            raise GridError(
                f"expected {self.expected_columns(self.ny, self.wraps, self.periodic_y)} "
                f"y-samples, got {v.shape[1]}"
            )
        if not self.x_range[1] > self.x_range[0]:
            raise GridError("x_range must be increasing")
        if self.periodic_y and self.wraps > 1:
            scale = max(1.0, float(np.abs(v).max()))
            rep = v[:, : self.ny]
            if np.abs(v - np.tile(rep, (1, self.wraps, 1))).max() > 1e-12 * scale:
                raise GridError("periodic grid does not repeat over its wraps")

    @staticmethod
    def expected_columns(ny, wraps, periodic_y):
        return ny * wraps if periodic_y else ny * wraps + 1

    @classmethod
    def from_function(cls, func, nx, ny, x_range, wraps=1, periodic_y=True, check_period=True):
        """Sample ``func(X, Y) -> (..., 4)`` on the grid nodes."""
        m = cls.expected_columns(ny, wraps, periodic_y)
        x = np.linspace(x_range[0], x_range[1], nx)
        y = 2.0 * np.pi * np.arange(m) / ny
        X, Y = np.meshgrid(x, y, indexing="ij")
        values = np.asarray(func(X, Y), dtype=float)
        if periodic_y and check_period:
            seam = np.asarray(func(x, np.full_like(x, 2.0 * np.pi)), dtype=float)
            scale = max(1.0, float(np.abs(values).max()))
            if np.abs(seam - values[:, 0]).max() > 1e-12 * scale:
                raise GridError("function is not 2 pi periodic in y")
        return cls(values, tuple(x_range), ny, wraps, periodic_y)

    # geometry of the lattice -------------------------------------------------
    @property
    def nx(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    @property
    def hx(self) -> float:
        return (self.x_range[1] - self.x_range[0]) / (self.nx - 1)

    @property
    def hy(self) -> float:
        return 2.0 * np.pi / self.ny

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_range[0], self.x_range[1], self.nx)

    @property
    def y(self) -> np.ndarray:
        return self.hy * np.arange(self.m)

    def mesh(self):
        return np.meshgrid(self.x, self.y, indexing="ij")

    @property
    def n_cover(self) -> int:
        """Number of y-samples of the inclusive cover ``[0, 2 pi W]``."""
        return self.ny * self.wraps + 1

    def cover_values(self, n_cols=None) -> np.ndarray:
        """Values on ``n_cols`` y-samples (default the inclusive cover)."""
        n_cols = self.n_cover if n_cols is None else n_cols
        if self.periodic_y:
            return self.values[:, np.arange(n_cols) % self.m]
        if n_cols > self.m:
            raise GridError("non-periodic grid cannot be extended")
        return self.values[:, :n_cols]

    def with_values(self, values, periodic_y=None) -> "SurfaceGrid":
        p = self.periodic_y if periodic_y is None else periodic_y
        return SurfaceGrid(values, self.x_range, self.ny, self.wraps, p)

    def scale(self) -> float:
        """Typical size of ``f`` (for relative tolerances)."""
        return float(max(np.abs(self.values).max(), 1e-300))

    def is_imaginary(self, tol: float = 1e-12) -> bool:
        return bool(np.abs(self.values[..., 0]).max() <= tol * max(self.scale(), 1.0))

    def closure_residual(self) -> float:
        """Mismatch ``max |f(x, 2 pi) - f(x, 0)|`` relative to the grid scale."""
        if self.periodic_y:
            return 0.0
        d = np.abs(self.values[:, self.ny] - self.values[:, 0]).max()
        return float(d / self.scale())

    def derivative(self, axis: int, values=None) -> np.ndarray:
        """Nodal derivative of ``values`` (default ``f``) along x (0) or y (1)."""
        v = self.values if values is None else values
        h = self.hx if axis == 0 else self.hy
        return derivative(v, h, axis, self.periodic_y if axis == 1 else False)


@dataclass(frozen=True, eq=False)
class TangentFrame:
    """Partial derivatives ``fx, fy`` at every sample, arrays (nx, m, 4)."""

    fx: np.ndarray
    fy: np.ndarray

    def residuals(self):
        """Pointwise ``(| |fx|^2-|fy|^2 | + |<fx,fy>|) / |fx|^2``."""
        nx2 = qt.qnorm2(self.fx)
        ny2 = qt.qnorm2(self.fy)
        return (np.abs(nx2 - ny2) + np.abs(qt.qdot(self.fx, self.fy))) / nx2


def discrete_diff(grid: SurfaceGrid, check_immersion: bool = True) -> TangentFrame:
    """Tangent frame of ``grid`` by high-order finite differences.

    Raises
    ------
    DegenerateError
        If ``|f_x|`` or ``|f_y|`` vanishes at some sample.
    """
    key = "frame"
    if key in grid._cache:
        return grid._cache[key]
    fx = grid.derivative(0)
    fy = grid.derivative(1)
    if check_immersion:
        tol = 1e-12 * max(grid.scale(), 1.0)
        if min(qt.qnorm(fx).min(), qt.qnorm(fy).min()) <= tol:
            raise DegenerateError("not an immersion: vanishing derivative")
    frame = TangentFrame(fx, fy)
    grid._cache[key] = frame
    return frame


def gauss_map(frame: TangentFrame, tol: float = 1e-3) -> np.ndarray:
    """Gauss map ``N = f_y f_x^{-1}`` of a conformal immersion into ``Im H``.

    For conformal ``f`` this is a unit imaginary quaternion with
    ``f_y = N f_x`` and ``f_x = -N f_y``.  The returned field is projected to
    the unit imaginary sphere.

    Raises
    ------
    NonConformalError
        If ``f_y f_x^{-1}`` deviates from a unit imaginary quaternion by more
        than ``tol``.
    """
    fx, fy = frame.fx, frame.fy
    scale = np.maximum(qt.qnorm(fx), qt.qnorm(fy))
    if max(np.abs(fx[..., 0] / scale).max(), np.abs(fy[..., 0] / scale).max()) > tol:
        raise NonConformalError("surface is not in Im H")
    N = qt.qmul(fy, qt.qinv(fx))
    dev = np.abs(N[..., 0]) + np.abs(qt.qnorm(N) - 1.0)
    if dev.max() > tol:
        raise NonConformalError(f"frame is not conformal (deviation {dev.max():.3g})")
    N = qt.imag_part(N)
    return N / qt.qnorm(N)[..., None]


def mean_curvature(grid: SurfaceGrid, tol: float = 1e-3) -> np.ndarray:
    """Mean curvature from ``-H df = (dN - N *dN) / 2``.

    Both coordinate directions are used and averaged:
    ``H = -Re[(N_x - N N_y) f_x^{-1} + (N_y + N N_x) f_y^{-1}] / 4``.
    """
    frame = discrete_diff(grid)
    N = gauss_map(frame, tol)
    Nx = grid.derivative(0, N)
    Ny = grid.derivative(1, N)
    hx = qt.qmul(Nx - qt.qmul(N, Ny), qt.qinv(frame.fx))
    hy = qt.qmul(Ny + qt.qmul(N, Nx), qt.qinv(frame.fy))
    return -0.25 * (hx[..., 0] + hy[..., 0])


def _omega(grid: SurfaceGrid):
    frame = discrete_diff(grid)
    return qt.qinv(frame.fx), -qt.qinv(frame.fy)


def closedness_residual(grid: SurfaceGrid) -> float:
    """Largest trapezoid circulation of ``w = f_x^-1 dx - f_y^-1 dy`` per plaquette.

    The circulation is divided by the plaquette area and by ``max |w|``; it is
    ``O(h^2)`` for isothermic coordinates and order one otherwise.
    """
    wx, wy = _omega(grid)
    if grid.periodic_y:
        wx_up = np.roll(wx, -1, axis=1)
        wy_up = np.roll(wy, -1, axis=1)
    else:
        wx_up, wy_up = wx[:, 1:], wy[:, 1:]
        wx, wy = wx[:, :-1], wy[:, :-1]
    hx, hy = grid.hx, grid.hy
    circ = (
        0.5 * hx * (wx[:-1] + wx[1:])
        + 0.5 * hy * (wy[1:] + wy_up[1:])
        - 0.5 * hx * (wx_up[:-1] + wx_up[1:])
        - 0.5 * hy * (wy[:-1] + wy_up[:-1])
    )
    wmax = max(qt.qnorm(wx).max(), qt.qnorm(wy).max())
    return float(qt.qnorm(circ).max() / (hx * hy * wmax))


def wedge_residual(grid: SurfaceGrid) -> float:
    """Pointwise ``max |(w ^ df)(dx, dy)|`` relative to ``|w| |df|``."""
    frame = discrete_diff(grid)
    wx, wy = _omega(grid)
    wedge = qt.qmul(wx, frame.fy) - qt.qmul(wy, frame.fx)
    norm = qt.qnorm(wx) * qt.qnorm(frame.fy)
    return float((qt.qnorm(wedge) / norm).max())


def christoffel_dual(grid: SurfaceGrid, anchor=None, tol: float = 1e-3) -> SurfaceGrid:
    """Christoffel dual with ``df^d = f_x^{-1} dx - f_y^{-1} dy``.

    The form is integrated along the row ``y = 0`` and then up every column
    with the 4-point rule of :func:`cumulative_integral`.  ``anchor`` is the
    value of ``f^d`` at ``(x0, 0)`` (default 0).  If the integrated dual fails
    to close over a period of a periodic grid, a non-periodic grid covering
    ``[0, 2 pi W]`` is returned.

    Raises
    ------
    NotClosedError
        If the form fails the plaquette closedness test by more than ``tol``.
    """
    res = closedness_residual(grid)
    if res > tol:
        raise NotClosedError(f"dual form is not closed (residual {res:.3g})")
    wx, wy = _omega(grid)
    a = np.zeros(4) if anchor is None else np.asarray(anchor, dtype=float)
    row = a + cumulative_integral(wx[:, 0], grid.hx, axis=0)
    cols = cumulative_integral(wy, grid.hy, axis=1, periodic=grid.periodic_y)
    fd = row[:, None, :] + cols
    if grid.periodic_y:
        period = np.abs(fd[:, -1] - fd[:, 0]).max()
        scale = max(np.abs(fd).max(), 1e-300)
        if period <= 1e-8 * scale:
            return SurfaceGrid(fd[:, :-1], grid.x_range, grid.ny, grid.wraps, True)
        return SurfaceGrid(fd, grid.x_range, grid.ny, grid.wraps, False)
    return SurfaceGrid(fd, grid.x_range, grid.ny, grid.wraps, False)


def conformality_residual(grid: SurfaceGrid, mask=None) -> float:
    """``max (| |f_x|^2 - |f_y|^2 | + |<f_x, f_y>|) / |f_x|^2``, scale invariant."""
    r = discrete_diff(grid, check_immersion=False).residuals()
    if mask is not None:
        r = r[np.asarray(mask, dtype=bool)]
    return float(np.max(r)) if r.size else 0.0


# ----------------------------------------------------------------------------
# serialisation
# ----------------------------------------------------------------------------

def write_csv(grid: SurfaceGrid, path) -> None:
    """CSV with a ``#`` header line and rows ``ix,iy,w,x,y,z`` (full precision)."""
    with open(path, "w") as fh:
        fh.write(
            f"# nx={grid.nx},ny={grid.ny},wraps={grid.wraps},"
            f"x0={grid.x_range[0]!r},x1={grid.x_range[1]!r},"
            f"periodic_y={int(grid.periodic_y)}\n"
        )
        fh.write("ix,iy,w,x,y,z\n")
        for a in range(grid.nx):
            for b in range(grid.m):
                w, x, y, z = map(float, grid.values[a, b])
                fh.write(f"{a},{b},{w!r},{x!r},{y!r},{z!r}\n")


def read_csv(path) -> SurfaceGrid:
    with open(path) as fh:
        header = fh.readline().lstrip("#").strip()
        meta = dict(item.split("=") for item in header.split(","))
        fh.readline()
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    nx, ny, wraps = int(meta["nx"]), int(meta["ny"]), int(meta["wraps"])
    periodic = bool(int(meta["periodic_y"]))
    m = SurfaceGrid.expected_columns(ny, wraps, periodic)
    values = np.zeros((nx, m, 4))
    values[data[:, 0].astype(int), data[:, 1].astype(int)] = data[:, 2:]
    return SurfaceGrid(values, (float(meta["x0"]), float(meta["x1"])), ny, wraps, periodic)


def write_obj(grid: SurfaceGrid, path, mask=None, metadata=None, weld_tol: float = 1e-6):
    """Export an ``Im H`` grid as an OBJ quad mesh.

    Writes ``nx * (ny * W)`` vertices (components along i, j, k, 9 significant
    digits).  The y-seam is welded when the grid is periodic or closes within
    ``weld_tol``.  ``mask`` (bool per sample, True = singular) goes to
    ``<path>.mask`` with one 0/1 per vertex; ``metadata`` to ``<path>.meta``.

    Returns
    -------
    bool
        Whether the seam was welded.
    """
    path = str(path)
    nv = grid.ny * grid.wraps
    verts = grid.values[:, :nv, 1:]
    welded = grid.periodic_y or grid.closure_residual() < weld_tol
    lines = ["# isothermic surface grid", f"# nx {grid.nx} ny {grid.ny} wraps {grid.wraps}"]
    lines += ["v %.9g %.9g %.9g" % tuple(p) for p in verts.reshape(-1, 3)]
    idx = np.arange(grid.nx * nv).reshape(grid.nx, nv) + 1
    ncols = nv if welded else nv - 1
    for a in range(grid.nx - 1):
        for b in range(ncols):
            b1 = (b + 1) % nv
            lines.append(f"f {idx[a, b]} {idx[a + 1, b]} {idx[a + 1, b1]} {idx[a, b1]}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    if mask is not None:
        m = np.asarray(mask, dtype=bool)[:, :nv]
        with open(path + ".mask", "w") as fh:
            fh.write("\n".join("1" if s else "0" for s in m.reshape(-1)) + "\n")
    if metadata is not None:
        write_metadata(path + ".meta", metadata)
    return welded


def write_metadata(path, metadata: dict) -> None:
    """Key-value sidecar, one ``key = value`` per line, keys sorted."""
    with open(path, "w") as fh:
        for k in sorted(metadata):
            v = metadata[k]
            if isinstance(v, float):
                v = repr(float(v))
            fh.write(f"{k} = {v}\n")
