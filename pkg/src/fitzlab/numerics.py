"""Extended reals, uniform box grids and tabulated functions on them."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

__all__ = [
    "ExtReal",
    "BoxGrid",
    "GridFunction",
    "GridMin",
    "ImproperFunctionError",
    "OffGridError",
    "grid_nodes",
    "min_over_grid",
    "encode_ext",
    "decode_ext",
]

INF = math.inf


class ImproperFunctionError(ValueError):
    """Raised when a table has no finite value."""


class OffGridError(ValueError):
    """Raised when a point or shift does not land on a grid node."""


class ExtReal(float):
    """A real number or ``+inf``.

    Behaves as a float; construction rejects ``-inf`` and NaN so that every
    value downstream belongs to a proper function.
    """

    def __new__(cls, value=0.0):
        if isinstance(value, str):
            value = decode_ext(value)
        v = float(value)
        if math.isnan(v) or v == -INF:
            raise ValueError(f"ExtReal does not admit {v!r}")
        return super().__new__(cls, v)

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self)

    def __add__(self, other):
        return ExtReal(float(self) + float(other))

    __radd__ = __add__

    def __repr__(self) -> str:
        return "ExtReal(inf)" if self == INF else f"ExtReal({float(self)!r})"

    def to_json(self):
        return encode_ext(float(self))


def encode_ext(v: float):
    """JSON encoding of an extended real: ``+inf`` becomes the string "inf"."""
    if v == INF:
        return "inf"
    if not math.isfinite(v):
        raise ValueError(f"cannot encode {v!r}")
    return float(v)


def decode_ext(v) -> float:
    if isinstance(v, str):
        if v.strip().lower() in ("inf", "+inf", "infinity"):
            return INF
        raise ValueError(f"unknown extended-real token {v!r}")
    return float(v)


@dataclass(frozen=True)
class BoxGrid:
    """Uniform grid on ``[-radius, radius]**dim`` with ``m`` points per axis.

    ``m`` must be odd so the origin is a node.
    """

    dim: int
    radius: float
    m: int

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValueError(f"radius must be positive, got {self.radius}")
        if int(self.m) != self.m or self.m < 3 or self.m % 2 == 0:
            raise ValueError(f"points per axis must be odd and >= 3, got {self.m}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "m", int(self.m))

    @property
    def spacing(self) -> float:
        return 2.0 * self.radius / (self.m - 1)

    @property
    def size(self) -> int:
        return self.m**self.dim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.m,) * self.dim

    @property
    def center_index(self) -> int:
        return (self.m - 1) // 2

    @property
    def axis(self) -> np.ndarray:
        # exact 0 and +-radius, and x, -x are exact negatives of each other
        c = self.center_index
        return self.radius * ((np.arange(self.m) - c) / c)

    @classmethod
    def from_spacing(cls, dim: int, radius: float, spacing: float) -> "BoxGrid":
        n = radius / spacing
        if abs(n - round(n)) > 1e-9:
            raise ValueError("radius must be an integer multiple of spacing")
        return cls(dim, radius, 2 * int(round(n)) + 1)

    def nodes(self) -> np.ndarray:
        """All nodes as an ``(m**dim, dim)`` array, row-major."""
        return grid_nodes(self)

    def index_of(self, point, atol: float | None = None) -> int | None:
        """Flat index of the node equal to ``point`` (``None`` if off-grid)."""
        p = np.asarray(point, dtype=float).reshape(-1)
        if p.size != self.dim:
            raise ValueError(f"expected a point of dimension {self.dim}, got {p.size}")
        atol = 1e-9 * self.spacing if atol is None else atol
        k = (p + self.radius) / self.spacing
        kr = np.rint(k)
        if np.any(np.abs(k - kr) * self.spacing > atol):
            return None
        if np.any(kr < 0) or np.any(kr > self.m - 1):
            return None
        return int(np.ravel_multi_index(kr.astype(np.int64), self.shape))

    def multi_index_of(self, point, atol: float | None = None) -> tuple[int, ...] | None:
        i = self.index_of(point, atol)
        return None if i is None else tuple(int(v) for v in np.unravel_index(i, self.shape))

    def offset_of(self, shift, atol: float | None = None) -> np.ndarray:
        """Integer index offsets for a shift that is a multiple of the spacing."""
        s = np.asarray(shift, dtype=float).reshape(-1)
        k = s / self.spacing
        kr = np.rint(k)
        atol = 1e-9 * self.spacing if atol is None else atol
        if s.size != self.dim or np.any(np.abs(k - kr) * self.spacing > atol):
            raise OffGridError(f"shift {s.tolist()} is not a multiple of spacing {self.spacing}")
        return kr.astype(np.int64)

    def to_json(self) -> dict:
        return {"dim": self.dim, "radius": self.radius, "m": self.m}

    @classmethod
    def from_json(cls, obj: dict) -> "BoxGrid":
        return cls(int(obj["dim"]), float(obj["radius"]), int(obj["m"]))


@functools.lru_cache(maxsize=64)
def grid_nodes(grid: BoxGrid) -> np.ndarray:
    """Enumerate nodes in row-major (lexicographic by axis index) order."""
    mesh = np.meshgrid(*([grid.axis] * grid.dim), indexing="ij")
    nodes = np.stack([c.reshape(-1) for c in mesh], axis=1)
    nodes.setflags(write=False)
    return nodes


class GridMin(NamedTuple):
    value: ExtReal
    node: np.ndarray
    index: int


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Extended-real table on a :class:`BoxGrid`.

    When ``primal_dim`` is set the table lives on ``X x X*`` with
    ``grid.dim == 2 * primal_dim``: the first ``primal_dim`` coordinates are
    the primal point, the rest the dual point.
    """

    grid: BoxGrid
    values: np.ndarray
    primal_dim: int | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        if v.size != self.grid.size:
            raise ValueError(f"expected {self.grid.size} values, got {v.size}")
        if np.isnan(v).any() or (v == -INF).any():
            raise ValueError("values must be real or +inf")
        if not np.isfinite(v).any():
            raise ImproperFunctionError("table has no finite value")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.primal_dim is not None and 2 * self.primal_dim != self.grid.dim:
            raise ValueError("bifunction grids must have dim == 2 * primal_dim")

    @classmethod
    def from_callable(cls, grid: BoxGrid, fn: Callable, primal_dim: int | None = None, **meta):
        """Tabulate ``fn`` at every node.

        ``fn`` receives the ``(N, dim)`` node array, or ``(x, xstar)`` arrays
        for bifunctions, and returns ``N`` values.
        """
        nodes = grid.nodes()
        if primal_dim is None:
            vals = fn(nodes)
        else:
            vals = fn(nodes[:, :primal_dim], nodes[:, primal_dim:])
        return cls(grid, np.broadcast_to(np.asarray(vals, dtype=float), (grid.size,)), primal_dim, meta)

    @property
    def is_bifunction(self) -> bool:
        return self.primal_dim is not None

    @property
    def finite(self) -> np.ndarray:
        return np.isfinite(self.values)

    def table(self) -> np.ndarray:
        return self.values.reshape(self.grid.shape)

    def nodes(self) -> np.ndarray:
        return self.grid.nodes()

    def at(self, point) -> ExtReal:
        """Value at an on-grid point; raises :class:`OffGridError` otherwise."""
        i = self.grid.index_of(point)
        if i is None:
            raise OffGridError(f"{np.asarray(point).tolist()} is not a grid node")
        return ExtReal(self.values[i])

    def at_pair(self, x, xstar) -> ExtReal:
        return self.at(np.concatenate([np.atleast_1d(x), np.atleast_1d(xstar)]))

    def with_values(self, values, **meta) -> "GridFunction":
        return GridFunction(self.grid, values, self.primal_dim, {**self.meta, **meta})

    def to_json(self) -> dict:
        out = {
            "grid": {"dim": self.grid.dim, "radius": self.grid.radius, "m": self.grid.m},
            "values": [encode_ext(v) for v in self.values.tolist()],
        }
        if self.primal_dim is not None:
            out["primal_dim"] = self.primal_dim
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "GridFunction":
        grid = BoxGrid.from_json(obj["grid"])
        vals = np.array([decode_ext(v) for v in obj["values"]], dtype=float)
        return cls(grid, vals, obj.get("primal_dim"))


def min_over_grid(f: GridFunction) -> GridMin:
    """Exact minimum over the tabulated nodes.

    Ties go to the smallest flat (lexicographic) index.
    """
    if not f.finite.any():
        raise ImproperFunctionError("table has no finite value")
    i = int(np.argmin(f.values))
    return GridMin(ExtReal(f.values[i]), f.grid.nodes()[i], i)
