"""Discrete Legendre-Fenchel calculus on box grids.

Conjugates are exact maxima over the tabulated nodes, so every result is the
conjugate of the *tabulated* function with the sup truncated to the primal
box. The truncation radius is recorded in ``meta["sup_radius"]``.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .numerics import BoxGrid, GridFunction, ImproperFunctionError, OffGridError

__all__ = [
    "legendre",
    "conjugate_at",
    "biconjugate",
    "flip_conjugate",
    "swap_halves",
    "translate",
]


def _check_proper(f: GridFunction):
    if not f.finite.any():
        raise ImproperFunctionError("conjugate of an improper table")


def _default_dual(grid: BoxGrid) -> BoxGrid:
    # same box as the primal grid; see notes on the truncated sup
    return BoxGrid(grid.dim, grid.radius, grid.m)


def _legendre_brute(f: GridFunction, dual_grid: BoxGrid) -> np.ndarray:
    fin = f.finite
    P = np.ascontiguousarray(f.nodes()[fin])
    vals = np.ascontiguousarray(f.values[fin])
    Y = np.ascontiguousarray(dual_grid.nodes())
    return kernels.conjugate_brute(P, vals, Y)


def _legendre_fast(f: GridFunction, dual_grid: BoxGrid) -> np.ndarray:
    """Factorised sup, one axis at a time, last axis first.

    With acc = -f, the brute-force path accumulates
    ``(((-f + x_D y_D) + x_{D-1} y_{D-1}) + ...)``. Rounded addition is
    monotone in its first argument, so maximising over one axis before adding
    the next term returns the same bits.
    """
    D = f.grid.dim
    x = np.ascontiguousarray(f.grid.axis)
    y = np.ascontiguousarray(dual_grid.axis)
    acc = -f.table()
    for ax in range(D - 1, -1, -1):
        moved = np.moveaxis(acc, ax, -1)
        lead = moved.shape[:-1]
        A = np.ascontiguousarray(moved.reshape(-1, moved.shape[-1]))
        out = kernels.legendre_axis(A, x, y)
        acc = np.moveaxis(out.reshape(lead + (y.size,)), -1, ax)
    return np.ascontiguousarray(acc).reshape(-1)


def legendre(f: GridFunction, dual_grid: BoxGrid | None = None, method: str = "fast") -> GridFunction:
    """f*(y) = max over tabulated x of <x, y> - f(x), at every node of ``dual_grid``.

    ``method`` is ``"fast"`` (per-axis linear-time transform) or ``"brute"``
    (all node pairs). The two agree bitwise on convex tables.
    Bifunction tables are conjugated in all ``2d`` coordinates at once.
    """
    _check_proper(f)
    dual_grid = _default_dual(f.grid) if dual_grid is None else dual_grid
    if dual_grid.dim != f.grid.dim:
        raise ValueError("dual grid dimension differs from primal grid")
    if method == "fast":
        vals = _legendre_fast(f, dual_grid)
    elif method == "brute":
        vals = _legendre_brute(f, dual_grid)
    else:
        raise ValueError(f"unknown method {method!r}")
    return GridFunction(dual_grid, vals, f.primal_dim, {"sup_radius": f.grid.radius, "kind": "conjugate"})


def conjugate_at(f: GridFunction, y) -> float:
    """f*(y) at a single dual point (any point, not only grid nodes)."""
    _check_proper(f)
    Y = np.atleast_2d(np.asarray(y, dtype=float))
    if Y.shape[1] != f.grid.dim:
        raise ValueError(f"expected a dual point of dimension {f.grid.dim}")
    fin = f.finite
    return float(kernels.conjugate_brute(np.ascontiguousarray(f.nodes()[fin]), np.ascontiguousarray(f.values[fin]), Y)[0])


def biconjugate(f: GridFunction, dual_grid: BoxGrid | None = None, method: str = "fast") -> GridFunction:
    """clconv f on the grid of ``f``: legendre twice."""
    fs = legendre(f, dual_grid, method)
    out = legendre(fs, f.grid, method)
    return GridFunction(f.grid, out.values, f.primal_dim, {"sup_radius": fs.grid.radius, "kind": "biconjugate"})


def swap_halves(h: GridFunction) -> GridFunction:
    """(a, b) -> (b, a) on a bifunction table."""
    if not h.is_bifunction:
        raise ValueError("swap needs a bifunction table")
    d = h.primal_dim
    t = np.transpose(h.table(), tuple(range(d, 2 * d)) + tuple(range(d)))
    return GridFunction(h.grid, t.reshape(-1), d, dict(h.meta))


def flip_conjugate(h: GridFunction, dual_grid: BoxGrid | None = None, method: str = "fast") -> GridFunction:
    """(x, x*) -> h*(x*, x): conjugate in the pair, then swap the halves."""
    if not h.is_bifunction:
        raise ValueError("flip conjugation needs a bifunction on X x X*")
    hs = legendre(h, dual_grid, method)
    out = swap_halves(hs)
    return GridFunction(out.grid, out.values, h.primal_dim, {"sup_radius": h.grid.radius, "kind": "flip_conjugate"})


def translate(h: GridFunction, x0, x0star) -> GridFunction:
    """h(x + x0, x* + x0*) - <x, x0*> - <x0, x*> - <x0, x0*>.

    The shift must be a whole number of grid steps; nodes whose shifted
    point leaves the table get +inf.
    """
    if not h.is_bifunction:
        raise ValueError("translation acts on bifunctions over X x X*")
    d = h.primal_dim
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    x0s = np.atleast_1d(np.asarray(x0star, dtype=float))
    if x0.shape != (d,) or x0s.shape != (d,):
        raise ValueError(f"shift must have dimension {d}")
    shift = np.concatenate([x0, x0s])
    off = h.grid.offset_of(shift)  # raises OffGridError
    m = h.grid.m
    src = h.table()
    out = np.full(h.grid.shape, np.inf)
    dst_sl, src_sl = [], []
    for k in off.tolist():
        if abs(k) >= m:
            break
        dst_sl.append(slice(max(0, -k), m - max(0, k)))
        src_sl.append(slice(max(0, k), m - max(0, -k)))
    if len(dst_sl) == h.grid.dim:
        out[tuple(dst_sl)] = src[tuple(src_sl)]
    out = out.reshape(-1)
    nodes = h.nodes()
    x, xs = nodes[:, :d], nodes[:, d:]
    c0 = float(np.dot(x0, x0s))
    corr = np.zeros(nodes.shape[0])
    for k in range(d):
        corr = corr + x[:, k] * x0s[k]
    for k in range(d):
        corr = corr + x0[k] * xs[:, k]
    corr = corr + c0
    fin = np.isfinite(out)
    out[fin] = out[fin] - corr[fin]
    if not fin.any():
        raise OffGridError("shift moves the whole domain off the table")
    return GridFunction(h.grid, out, d, {**h.meta, "shift": shift.tolist()})
