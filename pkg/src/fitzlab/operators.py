"""Sampled graphs of monotone operators, monotonicity and maximality scans."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import kernels
from .numerics import BoxGrid, GridFunction, ImproperFunctionError
from .spaces import DualityPair, SpaceSpec, dual_pair

__all__ = [
    "OperatorGraph",
    "MonotonicityWitness",
    "NotMonotoneError",
    "is_monotone",
    "monotonically_related",
    "maximality_probe",
    "graph_resolution",
    "build_subdifferential",
    "build_linear",
    "build_rotation",
]

MONO_TOL = 1e-12


class NotMonotoneError(ValueError):
    """A builder produced a graph that fails the pairwise monotonicity test."""


@dataclass(frozen=True, eq=False)
class OperatorGraph:
    """Finite relation T in X x X*, stored as two ``(n, d)`` arrays."""

    space: SpaceSpec
    xs: np.ndarray
    xstars: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        d = self.space.dim
        X = np.array(self.xs, dtype=float).reshape(-1, d)
        Xs = np.array(self.xstars, dtype=float).reshape(-1, d)
        if X.shape != Xs.shape:
            raise ValueError("primal and dual arrays differ in length")
        if X.shape[0] == 0:
            raise ValueError("operator graph must be nonempty")
        if not (np.isfinite(X).all() and np.isfinite(Xs).all()):
            raise ValueError("graph points must be finite")
        rows = np.hstack([X, Xs])
        if np.unique(rows, axis=0).shape[0] != rows.shape[0]:
            raise ValueError("duplicate pairs in operator graph")
        X.setflags(write=False)
        Xs.setflags(write=False)
        object.__setattr__(self, "xs", X)
        object.__setattr__(self, "xstars", Xs)

    @classmethod
    def from_pairs(cls, space: SpaceSpec, pairs, **meta) -> "OperatorGraph":
        pairs = list(pairs)
        X = [np.atleast_1d(np.asarray(p[0], dtype=float)) for p in pairs]
        Xs = [np.atleast_1d(np.asarray(p[1], dtype=float)) for p in pairs]
        return cls(space, np.array(X).reshape(-1, space.dim), np.array(Xs).reshape(-1, space.dim), meta)

    def __len__(self) -> int:
        return self.xs.shape[0]

    @property
    def pairs(self) -> list[DualityPair]:
        return [DualityPair(a, b) for a, b in zip(self.xs, self.xstars)]

    def pair(self, i: int) -> DualityPair:
        return DualityPair(self.xs[i], self.xstars[i])

    def restrict(self, lower=None, upper=None) -> "OperatorGraph":
        """Keep pairs whose primal point lies in the box [lower, upper]."""
        keep = np.ones(len(self), dtype=bool)
        if lower is not None:
            keep &= np.all(self.xs >= np.asarray(lower, dtype=float) - 1e-12, axis=1)
        if upper is not None:
            keep &= np.all(self.xs <= np.asarray(upper, dtype=float) + 1e-12, axis=1)
        return OperatorGraph(self.space, self.xs[keep], self.xstars[keep], {**self.meta, "restricted": True})

    def shifted(self, dx=None, dxs=None) -> "OperatorGraph":
        dx = np.zeros(self.space.dim) if dx is None else np.asarray(dx, dtype=float)
        dxs = np.zeros(self.space.dim) if dxs is None else np.asarray(dxs, dtype=float)
        return OperatorGraph(self.space, self.xs + dx, self.xstars + dxs, dict(self.meta))

    def scaled(self, c: float) -> "OperatorGraph":
        """The graph of c T."""
        return OperatorGraph(self.space, self.xs, c * self.xstars, dict(self.meta))

    def to_json(self) -> dict:
        return {
            "space": self.space.to_json(),
            "pairs": [[a.tolist(), b.tolist()] for a, b in zip(self.xs, self.xstars)],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "OperatorGraph":
        return cls.from_pairs(SpaceSpec.from_json(obj["space"]), obj["pairs"])


class MonotonicityWitness(NamedTuple):
    pair_a: DualityPair
    pair_b: DualityPair
    product: float

    def to_json(self):
        return {"pair_a": self.pair_a.to_json(), "pair_b": self.pair_b.to_json(), "product": self.product}


def is_monotone(T: OperatorGraph, tol: float = MONO_TOL) -> tuple[bool, MonotonicityWitness | None]:
    """All pairwise products <x - y, x* - y*> >= -tol; first violation as witness."""
    mn, i, j = kernels.monotone_scan(T.xs, T.xstars, tol)
    if i < 0:
        return True, None
    a, b = T.pair(int(i)), T.pair(int(j))
    prod = dual_pair((a.x - b.x, a.xstar - b.xstar))
    return False, MonotonicityWitness(a, b, prod)


def monotonically_related(T: OperatorGraph, p: DualityPair | tuple, tol: float = MONO_TOL) -> bool:
    """<z - x0, z* - x0*> >= -tol for every (z, z*) in T."""
    x0, x0s = (p.x, p.xstar) if isinstance(p, DualityPair) else p
    A = np.atleast_2d(np.asarray(x0, dtype=float))
    As = np.atleast_2d(np.asarray(x0s, dtype=float))
    prod, _ = kernels.related_scan(A, As, T.xs, T.xstars)
    return bool(prod[0] >= -tol)


def graph_resolution(T: OperatorGraph) -> float:
    """Largest gap between consecutive sampled values, over all coordinates.

    A dense sample of a closed graph has every point of the true graph within
    this distance (sup-norm) of a sampled pair, in the coordinate directions.
    """
    gaps = [0.0]
    for arr in (T.xs, T.xstars):
        for c in range(arr.shape[1]):
            u = np.unique(arr[:, c])
            if u.size > 1:
                gaps.append(float(np.diff(u).max()))
    return max(gaps)


def maximality_probe(T: OperatorGraph, probes: BoxGrid, tol: float | None = None,
                     rel_tol: float = MONO_TOL) -> tuple[list[DualityPair], float]:
    """Probe nodes of X x X* that are monotonically related to T but lie
    farther than ``tol`` (sup-norm) from every sampled pair.

    An empty list means no monotone extension was found at probe resolution.
    ``tol`` defaults to 1.5 times the largest sampling gap of T.
    Returns the extensions and the tolerance used.
    """
    d = T.space.dim
    if probes.dim != 2 * d:
        raise ValueError(f"probe grid must live on X x X* (dim {2 * d})")
    tol = 1.5 * graph_resolution(T) if tol is None else float(tol)
    nodes = probes.nodes()
    A = np.ascontiguousarray(nodes[:, :d])
    As = np.ascontiguousarray(nodes[:, d:])
    prod, dist = kernels.related_scan(A, As, T.xs, T.xstars)
    hits = np.flatnonzero((prod >= -rel_tol) & (dist > tol))
    return [DualityPair(A[i], As[i]) for i in hits], tol


def build_subdifferential(f: GridFunction, s: SpaceSpec, dual_grid: BoxGrid | None = None,
                          tol: float = 1e-9) -> OperatorGraph:
    """Pairs (x, x*) of grid nodes with f(y) >= f(x) + <y - x, x*> - tol at every node y."""
    if f.is_bifunction or f.grid.dim != s.dim:
        raise ValueError("subdifferential needs a function on X")
    if not f.finite.any():
        raise ImproperFunctionError("subdifferential of an improper table")
    dual_grid = f.grid if dual_grid is None else dual_grid
    P = np.ascontiguousarray(f.nodes())
    Y = np.ascontiguousarray(dual_grid.nodes())
    slack = kernels.subgradient_scan(P, np.ascontiguousarray(f.values), Y)
    ia, jy = np.nonzero(slack >= -tol)
    if ia.size == 0:
        raise ValueError("no subgradient found on the dual grid")
    return OperatorGraph(s, P[ia], Y[jy], {"kind": "subdifferential", "dual_radius": dual_grid.radius})


def build_linear(A, s: SpaceSpec, sample_grid: BoxGrid) -> OperatorGraph:
    """Graph {(x, Ax)} over the sample grid; rejects non-monotone A."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape != (s.dim, s.dim) or sample_grid.dim != s.dim:
        raise ValueError("matrix and grid must match the space dimension")
    X = sample_grid.nodes()
    Xs = X @ A.T
    T = OperatorGraph(s, X, Xs, {"kind": "linear"})
    ok, w = is_monotone(T)
    if not ok:
        raise NotMonotoneError(f"x -> Ax is not monotone: {w.to_json()}")
    return T


def build_rotation(s: SpaceSpec, sample_grid: BoxGrid) -> OperatorGraph:
    """Quarter-turn (x1, x2) -> (-x2, x1): monotone, skew, not a subdifferential."""
    if s.dim != 2:
        raise ValueError("rotation is defined in dimension 2")
    T = build_linear([[0.0, -1.0], [1.0, 0.0]], s, sample_grid)
    return OperatorGraph(s, T.xs, T.xstars, {"kind": "rotation"})
