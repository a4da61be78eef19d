"""Finite-difference, interpolation and Runge-Kutta kernels on uniform grids."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

INTERIOR_WIDTH = 7  # 6th-order central differences
BOUNDARY_WIDTH = 5  # 4th-order one-sided stencils
INTERP_WIDTH = 6  # quintic Lagrange interpolation


@lru_cache(maxsize=None)
def fd_weights(offsets: tuple, order: int = 1) -> np.ndarray:
    """Weights ``w`` with ``sum(w * u[offsets]) ~ u^(order)(0)`` for unit spacing."""
    n = len(offsets)
    V = np.vander(np.asarray(offsets, dtype=float), n, increasing=True).T
    rhs = np.zeros(n)
    rhs[order] = float(np.prod(np.arange(1, order + 1)))
    return np.linalg.solve(V, rhs)


@lru_cache(maxsize=None)
def lagrange_weights(offsets: tuple, s: float) -> np.ndarray:
    """Weights interpolating node values at integer ``offsets`` to position ``s``."""
    o = np.asarray(offsets, dtype=float)
    w = np.ones(len(o))
    for k in range(len(o)):
        for m in range(len(o)):
            if m != k:
                w[k] *= (s - o[m]) / (o[k] - o[m])
    return w


def _take(arr, idx, axis):
    return np.take(arr, idx, axis=axis)


def derivative(arr, h: float, axis: int, periodic: bool) -> np.ndarray:
    """First derivative along ``axis``.

    Periodic axes use a 7-point central stencil everywhere.  Open axes use it
    in the interior and 5-point one-sided/skewed stencils at the ends.
    """
    arr = np.asarray(arr, dtype=float)
    n = arr.shape[axis]
    if periodic:
        width = min(INTERIOR_WIDTH, n - 1 if n % 2 == 0 else n)
        half = width // 2
        w = fd_weights(tuple(range(-half, half + 1)))
        out = np.zeros_like(arr)
        for k, o in enumerate(range(-half, half + 1)):
            if w[k] != 0.0:
                out += w[k] * np.roll(arr, -o, axis=axis)
        return out / h

    half = INTERIOR_WIDTH // 2
    out = np.empty_like(arr)
    if n >= INTERIOR_WIDTH:
        w = fd_weights(tuple(range(-half, half + 1)))
        inner = np.zeros_like(_take(arr, np.arange(half, n - half), axis))
        for k, o in enumerate(range(-half, half + 1)):
            if w[k] != 0.0:
                inner += w[k] * _take(arr, np.arange(half + o, n - half + o), axis)
        idx = [slice(None)] * arr.ndim
        idx[axis] = slice(half, n - half)
        out[tuple(idx)] = inner
        ends = list(range(half)) + list(range(n - half, n))
    else:
        ends = list(range(n))
    width = min(BOUNDARY_WIDTH, n)
    for i in ends:
        start = min(max(i - width // 2, 0), n - width)
        offs = tuple(range(start - i, start - i + width))
        w = fd_weights(offs)
        val = sum(w[k] * _take(arr, i + o, axis) for k, o in enumerate(offs))
        idx = [slice(None)] * arr.ndim
        idx[axis] = i
        out[tuple(idx)] = val
    return out / h


def edge_stencil(e: int, n: int, periodic: bool) -> tuple:
    """Node offsets (relative to node ``e``) used to interpolate inside edge ``e``."""
    lo = -(INTERP_WIDTH // 2 - 1)
    offs = tuple(range(lo, lo + INTERP_WIDTH))
    if periodic or n < INTERP_WIDTH:
        return offs
    start = min(max(e + lo, 0), n - INTERP_WIDTH)
    return tuple(range(start - e, start - e + INTERP_WIDTH))


def interp_edge(nodes, axis: int, e: int, theta: float, periodic: bool):
    """Value at fraction ``theta`` of edge ``e`` (between nodes e and e+1)."""
    n = nodes.shape[axis]
    offs = edge_stencil(e, n, periodic)
    w = lagrange_weights(offs, float(theta))
    out = None
    for k, o in enumerate(offs):
        idx = (e + o) % n if periodic else e + o
        term = w[k] * _take(nodes, idx, axis)
        out = term if out is None else out + term
    return out


def interp_all_edges(nodes, axis: int, theta: float, periodic: bool):
    """Interpolate every edge along ``axis`` at fraction ``theta`` in one pass."""
    n = nodes.shape[axis]
    n_edges = n if periodic else n - 1
    if periodic:
        offs = edge_stencil(0, n, True)
        w = lagrange_weights(offs, float(theta))
        out = 0.0
        for k, o in enumerate(offs):
            out = out + w[k] * np.roll(nodes, -o, axis=axis)
        return out
    if n < INTERP_WIDTH:
        pieces = [interp_edge(nodes, axis, e, theta, False) for e in range(n_edges)]
        return np.stack(pieces, axis=axis)
    v = np.moveaxis(np.asarray(nodes), axis, 0)
    out = np.empty((n_edges,) + v.shape[1:], dtype=np.result_type(v, float))
    offs = edge_stencil(INTERP_WIDTH, 2 * INTERP_WIDTH + 1, True)
    lo, hi = -offs[0], n - 1 - offs[-1]  # edges using the centred stencil
    w = lagrange_weights(offs, float(theta))
    out[lo:hi + 1] = sum(w[k] * v[lo + o: hi + 1 + o] for k, o in enumerate(offs))
    for e in list(range(lo)) + list(range(hi + 1, n_edges)):
        oe = edge_stencil(e, n, False)
        we = lagrange_weights(oe, float(theta))
        out[e] = sum(we[k] * v[e + o] for k, o in enumerate(oe))
    return np.moveaxis(out, 0, axis)


def rk4_linear(matrix_at, s_nodes, y0, ns: int = 4, record: bool = True, dtype=complex):
    """Integrate ``dy/ds = M(s) y`` through the coordinates ``s_nodes``.

    ``matrix_at(k, theta)`` returns ``M`` at fraction ``theta`` of interval
    ``k`` (between ``s_nodes[k]`` and ``s_nodes[k+1]``) with shape
    ``(..., d, d)``; ``y0`` has shape ``(..., d, m)``.  Each interval is split
    into ``ns`` classical RK4 substeps.  Returns the states at every node
    (stacked on a new axis after the batch axes) or only the final state.
    ``dtype`` sets the working precision of the state.
    """
    s_nodes = np.asarray(s_nodes, dtype=float)
    y = np.asarray(y0, dtype=dtype)
    states = [y] if record else None
    for k in range(len(s_nodes) - 1):
        h = y.real.dtype.type(s_nodes[k + 1] - s_nodes[k]) / ns
        M0 = matrix_at(k, 0.0)
        for sub in range(ns):
            Mh = matrix_at(k, (sub + 0.5) / ns)
            M1 = matrix_at(k, (sub + 1.0) / ns)
            k1 = M0 @ y
            k2 = Mh @ (y + 0.5 * h * k1)
            k3 = Mh @ (y + 0.5 * h * k2)
            k4 = M1 @ (y + h * k3)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            M0 = M1
        if record:
            states.append(y)
    if record:
        return np.stack(states, axis=y.ndim - 2)
    return y


def cumulative_integral(g, h: float, axis: int, periodic: bool = False) -> np.ndarray:
    """Running integral of nodal samples ``g`` along ``axis``, zero at node 0.

    Interval increments use the 4-point rule h/24 (-g0 + 13 g1 + 13 g2 - g3),
    with one-sided cubic weights on the first and last interval of open axes.
    For periodic axes the running sum is carried over the ``n`` intervals of
    one period, so the result has ``n + 1`` entries (the last one is the
    circulation).
    """
    g = np.moveaxis(np.asarray(g, dtype=float), axis, 0)
    n = g.shape[0]
    if periodic:
        idx = np.arange(n)
        inc = (-g[(idx - 1) % n] + 13.0 * g[idx] + 13.0 * g[(idx + 1) % n]
               - g[(idx + 2) % n]) * (h / 24.0)
    else:
        if n < 4:
            inc = 0.5 * h * (g[:-1] + g[1:])
        else:
            inc = np.empty((n - 1,) + g.shape[1:])
            inc[1:-1] = (-g[:-3] + 13.0 * g[1:-2] + 13.0 * g[2:-1] - g[3:]) * (h / 24.0)
            inc[0] = (9.0 * g[0] + 19.0 * g[1] - 5.0 * g[2] + g[3]) * (h / 24.0)
            inc[-1] = (g[-4] - 5.0 * g[-3] + 19.0 * g[-2] + 9.0 * g[-1]) * (h / 24.0)
    out = np.concatenate([np.zeros((1,) + g.shape[1:]), np.cumsum(inc, axis=0)])
    return np.moveaxis(out, 0, axis)
