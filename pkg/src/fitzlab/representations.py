"""Convex representations of monotone graphs on X x X*.

``fitzpatrick`` is exact (a max over the finite graph). ``s_function`` is the
grid biconjugate of pi + delta_T and is approximate: the sup inside each
conjugate is truncated to the work box.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .conjugation import biconjugate, conjugate_at
from .numerics import BoxGrid, ExtReal, GridFunction, OffGridError
from .operators import OperatorGraph
from .reports import CheckReport, PreconditionError, anchor
from .spaces import SpaceSpec, dual_norm, dual_pair, norm

__all__ = [
    "Representation",
    "fitzpatrick",
    "fitzpatrick_table",
    "pairing_table",
    "graph_indicator_table",
    "s_function",
    "s_function_table",
    "family_membership",
    "lipschitz_estimate",
    "fenchel_young_gap",
    "quadratic_coupling",
    "coupling_table",
]

KINDS = ("fitzpatrick", "s_function", "custom")


@dataclass(frozen=True, eq=False)
class Representation:
    operator: OperatorGraph
    kind: str
    table: GridFunction
    exact: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown representation kind {self.kind!r}")
        if not self.table.is_bifunction or self.table.primal_dim != self.operator.space.dim:
            raise ValueError("representation table must live on X x X*")


def _split(nodes: np.ndarray, d: int):
    return np.ascontiguousarray(nodes[:, :d]), np.ascontiguousarray(nodes[:, d:])


def fitzpatrick(T: OperatorGraph, x, xstar) -> ExtReal:
    """max over (y, y*) in T of <x - y, y* - x*> + <x, x*>."""
    Q = np.atleast_2d(np.asarray(x, dtype=float))
    Qs = np.atleast_2d(np.asarray(xstar, dtype=float))
    if Q.shape != (1, T.space.dim) or Qs.shape != Q.shape:
        raise ValueError(f"query must have dimension {T.space.dim}")
    return ExtReal(kernels.fitzpatrick_eval(Q, Qs, T.xs, T.xstars)[0])


def fitzpatrick_table(T: OperatorGraph, grid: BoxGrid) -> GridFunction:
    d = T.space.dim
    if grid.dim != 2 * d:
        raise ValueError(f"grid must live on X x X* (dim {2 * d})")
    Q, Qs = _split(grid.nodes(), d)
    vals = kernels.fitzpatrick_eval(Q, Qs, T.xs, T.xstars)
    return GridFunction(grid, vals, d, {"kind": "fitzpatrick", "exact": True})


def pairing_table(grid: BoxGrid, d: int) -> np.ndarray:
    """<x, x*> at every node of a grid on X x X*, summed coordinate by coordinate."""
    nodes = grid.nodes()
    acc = np.zeros(nodes.shape[0])
    for k in range(d):
        acc = acc + nodes[:, k] * nodes[:, d + k]
    return acc


def _graph_indices(T: OperatorGraph, grid: BoxGrid, require_all: bool = True) -> np.ndarray:
    idx = []
    for a, b in zip(T.xs, T.xstars):
        i = grid.index_of(np.concatenate([a, b]))
        if i is None:
            inside = np.all(np.abs(np.concatenate([a, b])) <= grid.radius + 1e-12)
            if require_all or inside:
                raise PreconditionError(f"graph pair {a.tolist()}, {b.tolist()} is not a grid node")
            continue
        idx.append(i)
    return np.asarray(idx, dtype=np.int64)


def graph_indicator_table(T: OperatorGraph, grid: BoxGrid) -> GridFunction:
    """pi + delta_T tabulated: <x, x*> on graph nodes, +inf elsewhere."""
    d = T.space.dim
    idx = _graph_indices(T, grid)
    vals = np.full(grid.size, np.inf)
    vals[idx] = pairing_table(grid, d)[idx]
    return GridFunction(grid, vals, d, {"kind": "pi_indicator"})


def _hull_mask(f: GridFunction) -> np.ndarray:
    """Nodes inside the closed convex hull of dom f, as cut out by grid normals."""
    ind = f.with_values(np.where(f.finite, 0.0, np.inf))
    g = biconjugate(ind).values
    scale = f.grid.radius * f.grid.radius * f.grid.dim
    return g <= 1e-9 * max(1.0, scale)


def s_function_table(T: OperatorGraph, work_grid: BoxGrid) -> GridFunction:
    """clconv(pi + delta_T) on the work grid.

    Nodes outside the convex hull of the graph get +inf; inside, the value is
    the biconjugate with slopes truncated to the work box.
    """
    base = graph_indicator_table(T, work_grid)
    bc = biconjugate(base)
    vals = np.where(_hull_mask(base), bc.values, np.inf)
    return GridFunction(work_grid, vals, T.space.dim,
                        {"kind": "s_function", "exact": False, "sup_radius": work_grid.radius})


def s_function(T: OperatorGraph, query, work_grid: BoxGrid) -> ExtReal:
    """clconv(pi + delta_T) at an on-grid query pair."""
    x, xs = (query.x, query.xstar) if hasattr(query, "xstar") else query
    table = s_function_table(T, work_grid)
    p = np.concatenate([np.atleast_1d(x), np.atleast_1d(xs)])
    if work_grid.index_of(p) is None:
        raise OffGridError(f"query {p.tolist()} is not a node of the work grid")
    return table.at(p)


def lipschitz_estimate(h: GridFunction) -> float:
    """Largest |difference| / spacing between adjacent finite nodes."""
    t = h.table()
    best = 0.0
    for ax in range(t.ndim):
        a = np.take(t, np.arange(t.shape[ax] - 1), axis=ax)
        b = np.take(t, np.arange(1, t.shape[ax]), axis=ax)
        ok = np.isfinite(a) & np.isfinite(b)
        if ok.any():
            best = max(best, float(np.abs(a[ok] - b[ok]).max()))
    return best / h.grid.spacing


def family_membership(h: GridFunction, T: OperatorGraph, tol: float | None = None) -> CheckReport:
    """Check h against the defining conditions of the Fitzpatrick family of T.

    (i) midpoint convexity on grid-aligned triples, (ii) h >= pi - tol at
    every node, (iii) |h - pi| <= tol at every graph pair inside the box.
    The default tol is 10 * spacing * L with L from :func:`lipschitz_estimate`
    (floored at 1 so indicator-like tables keep a nonzero tolerance).
    """
    d = T.space.dim
    if not h.is_bifunction or h.primal_dim != d:
        raise ValueError("h must be a bifunction on X x X* of the operator's space")
    L = lipschitz_estimate(h)
    if tol is None:
        tol = 10.0 * h.grid.spacing * max(L, 1.0)
    grid = h.grid
    vals = np.ascontiguousarray(h.values)
    pi = pairing_table(grid, d)
    idx = np.array(np.unravel_index(np.arange(grid.size), grid.shape)).T.astype(np.int64)
    fin = np.flatnonzero(h.finite)
    strides = np.array([grid.m ** (grid.dim - 1 - k) for k in range(grid.dim)], dtype=np.int64)
    # midpoint scan over the finite nodes only; vals indexed by full flat index
    a, b, mid = kernels.midpoint_scan(vals, idx, fin.astype(np.int64), strides, float(tol))
    conditions = {}
    first = None
    nodes = grid.nodes()
    if a >= 0:
        conditions["convexity"] = "fail"
        first = {
            "condition": "convexity",
            "a": nodes[a], "b": nodes[b], "mid": nodes[mid],
            "h_a": vals[a], "h_b": vals[b], "h_mid": vals[mid],
        }
    else:
        conditions["convexity"] = "pass"
    gap = vals - pi
    low = np.flatnonzero(gap < -tol)
    if low.size:
        conditions["lower_bound"] = "fail"
        if first is None:
            i = int(low[0])
            first = {"condition": "lower_bound", "node": nodes[i], "h": vals[i], "pi": pi[i]}
    else:
        conditions["lower_bound"] = "pass"
    gidx = _graph_indices(T, grid, require_all=False)
    eq_bad = gidx[~(np.abs(gap[gidx]) <= tol)]
    if eq_bad.size:
        conditions["graph_equality"] = "fail"
        if first is None:
            i = int(eq_bad[0])
            first = {"condition": "graph_equality", "node": nodes[i], "h": vals[i], "pi": pi[i]}
    else:
        conditions["graph_equality"] = "pass"
    ok = all(v == "pass" for v in conditions.values())
    return CheckReport(
        "family_membership", ok,
        tol={"tol": tol, "spacing": grid.spacing, "lipschitz": L},
        probes=int(grid.size + gidx.size),
        first_violation=first,
        anchor=anchor("family_membership"),
        details={
            "conditions": conditions,
            "graph_pairs_checked": int(gidx.size),
            "graph_pairs_outside_box": int(len(T) - gidx.size),
            "scope": "probed members",
        },
    )


def fenchel_young_gap(f: GridFunction, x, xstar) -> ExtReal:
    """f(x) + f*(x*) - <x, x*> with f* the exact sup over the tabulated nodes."""
    fx = f.at(x)
    fs = conjugate_at(f, xstar)
    if not fx.is_finite:
        return ExtReal(np.inf)
    return ExtReal(float(fx) + fs - dual_pair((np.atleast_1d(x), np.atleast_1d(xstar))))


def quadratic_coupling(x, xstar, s: SpaceSpec) -> float:
    """½||x||² + ½||x*||² with the space norm and its dual."""
    nx, nxs = norm(x, s), dual_norm(xstar, s)
    return 0.5 * nx * nx + 0.5 * nxs * nxs


def coupling_table(grid: BoxGrid, s: SpaceSpec) -> GridFunction:
    d = s.dim
    if grid.dim != 2 * d:
        raise ValueError(f"grid must live on X x X* (dim {2 * d})")
    x, xs = _split(grid.nodes(), d)
    nx = _norms(x, s.norm)
    nxs = _norms(xs, s.dual_norm_tag)
    return GridFunction(grid, 0.5 * nx * nx + 0.5 * nxs * nxs, d, {"kind": "coupling"})


def _norms(V: np.ndarray, tag: str) -> np.ndarray:
    if tag == "l1":
        return np.abs(V).sum(axis=1)
    if tag == "l2":
        return np.sqrt((V * V).sum(axis=1))
    return np.abs(V).max(axis=1)
