"""Finite-dimensional normed spaces, the duality map J and its enlargement."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

__all__ = [
    "SpaceSpec",
    "DualityPair",
    "SetDescriptor",
    "PreimageBound",
    "dual_pair",
    "norm",
    "dual_norm",
    "duality_map",
    "eps_duality_membership",
    "eps_duality_ball",
    "jeps_norm_gap",
    "preimage_bound",
]

NORMS = ("l1", "l2", "linf")
DUAL_NORM = {"l1": "linf", "l2": "l2", "linf": "l1"}
_ALIASES = {"l1": "l1", "ℓ1": "l1", "l2": "l2", "ℓ2": "l2", "linf": "linf", "l∞": "linf", "ℓ∞": "linf", "inf": "linf"}


@dataclass(frozen=True)
class SpaceSpec:
    """``R^dim`` with an l1, l2 or l-infinity norm; the dual carries the paired norm."""

    dim: int
    norm: str = "l2"

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        tag = _ALIASES.get(str(self.norm).lower())
        if tag is None:
            raise ValueError(f"unknown norm {self.norm!r}; expected one of {NORMS}")
        object.__setattr__(self, "norm", tag)

    @property
    def dual_norm_tag(self) -> str:
        return DUAL_NORM[self.norm]

    def to_json(self) -> dict:
        return {"dim": self.dim, "norm": self.norm}

    @classmethod
    def from_json(cls, obj: dict) -> "SpaceSpec":
        return cls(int(obj["dim"]), obj.get("norm", "l2"))


@dataclass(frozen=True)
class DualityPair:
    x: np.ndarray
    xstar: np.ndarray

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float)).copy()
        xs = np.atleast_1d(np.asarray(self.xstar, dtype=float)).copy()
        if x.shape != xs.shape or x.ndim != 1:
            raise ValueError(f"dimension mismatch: {x.shape} vs {xs.shape}")
        x.setflags(write=False)
        xs.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "xstar", xs)

    def __iter__(self):
        return iter((self.x, self.xstar))

    def __eq__(self, other):
        return (
            isinstance(other, DualityPair)
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.xstar, other.xstar)
        )

    def __hash__(self):
        return hash((self.x.tobytes(), self.xstar.tobytes()))

    def to_json(self) -> list:
        return [self.x.tolist(), self.xstar.tolist()]


def _vec_norm(v: np.ndarray, tag: str) -> float:
    v = np.asarray(v, dtype=float)
    if tag == "l1":
        return float(np.sum(np.abs(v)))
    if tag == "l2":
        return float(math.sqrt(float(np.dot(v, v))))
    return float(np.max(np.abs(v))) if v.size else 0.0


def _check_dim(v, s: SpaceSpec) -> np.ndarray:
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.shape != (s.dim,):
        raise ValueError(f"expected a vector of dimension {s.dim}, got shape {v.shape}")
    return v


def dual_pair(p: DualityPair | tuple) -> float:
    """The pairing <x, x*> as a plain coordinate sum."""
    x, xs = (p.x, p.xstar) if isinstance(p, DualityPair) else map(np.asarray, p)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if x.shape != xs.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {xs.shape}")
    acc = 0.0
    for a, b in zip(x.tolist(), xs.tolist()):
        acc = acc + a * b
    return acc


def norm(x, s: SpaceSpec) -> float:
    return _vec_norm(_check_dim(x, s), s.norm)


def dual_norm(xstar, s: SpaceSpec) -> float:
    return _vec_norm(_check_dim(xstar, s), s.dual_norm_tag)


@dataclass(frozen=True, eq=False)
class SetDescriptor:
    """A set of dual vectors: vertex list plus an independent membership test.

    ``kind`` is one of ``singleton``, ``polytope``, ``ball`` or ``empty``.
    For balls ``center``/``radius`` are set and ``vertices`` is empty.
    """

    kind: str
    vertices: np.ndarray
    predicate: Callable[[np.ndarray, float], bool] = field(repr=False)
    center: np.ndarray | None = None
    radius: float | None = None

    def contains(self, v, tol: float = 1e-12) -> bool:
        return bool(self.predicate(np.asarray(v, dtype=float), tol))

    def in_hull(self, v, tol: float = 1e-12) -> bool:
        """Membership in the convex hull of the vertices (LP-free, small sets)."""
        from scipy.optimize import nnls

        v = np.asarray(v, dtype=float)
        V = self.vertices
        if V.shape[0] == 0:
            return False
        # least squares with sum-to-one row appended, weights >= 0
        A = np.vstack([V.T, np.ones((1, V.shape[0]))])
        b = np.concatenate([v, [1.0]])
        _, res = nnls(A, b)
        return res <= tol * max(1.0, float(np.abs(v).max(initial=0.0)))


def duality_map(x, s: SpaceSpec) -> SetDescriptor:
    """J(x) = {x* : ||x||^2 = ||x*||^2 = <x, x*>}, described exactly.

    l2 gives the singleton {x}. For l1 and l-infinity the set is a face of the
    dual ball scaled by ||x||; vertices are listed in lexicographic order.
    """
    x = _check_dim(x, s)
    nx = norm(x, s)

    def member(v, tol, x=x, nx=nx):
        v = np.atleast_1d(v)
        if v.shape != x.shape:
            return False
        scale = max(1.0, nx * nx)
        nv = dual_norm(v, s)
        return abs(nv * nv - nx * nx) <= tol * scale and abs(dual_pair((x, v)) - nx * nx) <= tol * scale

    if nx == 0.0:
        return SetDescriptor("singleton", np.zeros((1, s.dim)), member)
    if s.norm == "l2":
        return SetDescriptor("singleton", x.reshape(1, -1).copy(), member)
    if s.norm == "l1":
        # x*_i = ||x||_1 sign(x_i) where x_i != 0, free in [-||x||_1, ||x||_1] elsewhere
        choices = [[nx * np.sign(xi)] if xi != 0 else [-nx, nx] for xi in x]
        verts = np.array(sorted(itertools.product(*choices)), dtype=float)
    else:
        # mass ||x||_inf spread over the coordinates where |x_i| is maximal
        active = np.flatnonzero(np.abs(x) == nx)
        verts = np.zeros((active.size, s.dim))
        for r, i in enumerate(active):
            verts[r, i] = nx * np.sign(x[i])
        verts = np.array(sorted(map(tuple, verts)), dtype=float)
    kind = "singleton" if verts.shape[0] == 1 else "polytope"
    return SetDescriptor(kind, verts, member)


def eps_duality_membership(p: DualityPair | tuple, eps: float, s: SpaceSpec, tol: float = 1e-12) -> bool:
    """Test ½||x||² + ½||x*||² <= <x, x*> + eps."""
    if eps < 0:
        raise ValueError(f"eps must be nonnegative, got {eps}")
    x, xs = (p.x, p.xstar) if isinstance(p, DualityPair) else p
    nx, nxs = norm(x, s), dual_norm(xs, s)
    return 0.5 * nx * nx + 0.5 * nxs * nxs <= dual_pair((x, xs)) + eps + tol


def eps_duality_ball(eps: float, s: SpaceSpec) -> SetDescriptor:
    """J_eps(0): the dual ball of radius sqrt(2 eps)."""
    if eps < 0:
        raise ValueError(f"eps must be nonnegative, got {eps}")
    r = math.sqrt(2.0 * eps)

    def member(v, tol):
        return dual_norm(v, s) <= r + tol

    return SetDescriptor("ball", np.zeros((0, s.dim)), member, center=np.zeros(s.dim), radius=r)


def jeps_norm_gap(p: DualityPair | tuple, s: SpaceSpec) -> float:
    """| ||x|| - ||x*|| |, bounded by sqrt(2 eps) whenever x* is in J_eps(x)."""
    x, xs = (p.x, p.xstar) if isinstance(p, DualityPair) else p
    return abs(norm(x, s) - dual_norm(xs, s))


class PreimageBound(NamedTuple):
    dual: float
    primal: float


def preimage_bound(z, zstar, M: float, eps: float, s: SpaceSpec) -> PreimageBound:
    """Radii bounding (T + J_eps)^{-1}(B[0, M]) for monotone T through (z, z*).

    Any x in the preimage with x* in T(x), y* in J_eps(x), ||x* + y*|| <= M has
    ||y*|| <= ``dual`` and ||x|| <= ``primal`` = ``dual`` + sqrt(2 eps).
    """
    if M < 0 or eps < 0:
        raise ValueError("M and eps must be nonnegative")
    nz, nzs = norm(z, s), dual_norm(zstar, s)
    r = math.sqrt(2.0 * eps)
    inner = 4 * nz * nz + 2 * (nz * r + eps) + nz * nz + (M + nzs) ** 2
    dual = 2 * nz + math.sqrt(inner)
    return PreimageBound(dual, dual + r)
