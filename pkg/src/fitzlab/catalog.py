"""Build operators, functions and grids from JSON-style specs.

Grids are given as ``{"radius": R, "m": m}`` or ``{"radius": R, "spacing": h}``;
their dimension comes from context (d on X, 2d on X x X*).
"""

from __future__ import annotations

import numpy as np

from .conjugation import legendre
from .numerics import BoxGrid, GridFunction
from .operators import OperatorGraph, build_linear, build_rotation, build_subdifferential
from .representations import coupling_table, fitzpatrick_table, graph_indicator_table, s_function_table, _norms
from .spaces import SpaceSpec

__all__ = ["ConfigError", "make_grid", "make_operator", "make_function", "shipped_scenarios"]


class ConfigError(ValueError):
    """Malformed or inconsistent scenario specification."""


def make_grid(spec, dim: int) -> BoxGrid:
    if isinstance(spec, BoxGrid):
        return spec
    if not isinstance(spec, dict) or "radius" not in spec:
        raise ConfigError(f"grid spec needs a radius: {spec!r}")
    r = float(spec["radius"])
    try:
        if "m" in spec:
            return BoxGrid(dim, r, int(spec["m"]))
        if "spacing" in spec:
            return BoxGrid.from_spacing(dim, r, float(spec["spacing"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    raise ConfigError(f"grid spec needs m or spacing: {spec!r}")


def _x_function(spec: dict, s: SpaceSpec, grid: BoxGrid) -> GridFunction:
    kind = spec["kind"]
    if kind == "quadratic":
        Q = np.asarray(spec.get("Q", np.eye(s.dim)), dtype=float).reshape(s.dim, s.dim)
        b = np.asarray(spec.get("b", np.zeros(s.dim)), dtype=float).reshape(s.dim)
        return GridFunction.from_callable(grid, lambda X: 0.5 * np.einsum("ni,ij,nj->n", X, Q, X) + X @ b)
    if kind == "abs":
        return GridFunction.from_callable(grid, lambda X: _norms(X, s.norm))
    if kind == "box_indicator":
        lo = np.broadcast_to(np.asarray(spec.get("lower", -1.0), dtype=float), (s.dim,))
        hi = np.broadcast_to(np.asarray(spec.get("upper", 1.0), dtype=float), (s.dim,))
        return GridFunction.from_callable(
            grid, lambda X: np.where(np.all((X >= lo - 1e-12) & (X <= hi + 1e-12), axis=1), 0.0, np.inf))
    raise ConfigError(f"unknown function kind {kind!r} on X")


X_KINDS = ("quadratic", "abs", "box_indicator")
PAIR_KINDS = ("coupling", "pair_quadratic", "fitzpatrick", "s_function", "pi_indicator", "separable")


def make_operator(spec: dict, s: SpaceSpec, functions: dict | None = None) -> OperatorGraph:
    kind = spec.get("kind")
    try:
        if kind == "graph":
            T = OperatorGraph.from_pairs(s, spec["pairs"])
        elif kind == "linear":
            T = build_linear(spec.get("A", np.eye(s.dim)), s, make_grid(spec["grid"], s.dim))
        elif kind == "rotation":
            T = build_rotation(s, make_grid(spec["grid"], s.dim))
        elif kind == "subdifferential":
            grid = make_grid(spec["grid"], s.dim)
            f = _x_function(spec["function"], s, grid)
            dual = make_grid(spec.get("dual_grid", spec["grid"]), s.dim)
            T = build_subdifferential(f, s, dual)
        else:
            raise ConfigError(f"unknown operator kind {kind!r}")
    except KeyError as exc:
        raise ConfigError(f"operator spec is missing {exc}") from None
    if "restrict" in spec:
        r = spec["restrict"]
        T = T.restrict(r.get("lower"), r.get("upper"))
    if "scale" in spec:
        T = T.scaled(float(spec["scale"]))
    return T


def make_function(spec: dict, s: SpaceSpec, operators: dict | None = None,
                  functions: dict | None = None) -> GridFunction:
    """Tabulate a function on X (kinds in ``X_KINDS``) or on X x X*."""
    kind = spec.get("kind")
    operators = operators or {}
    functions = functions or {}
    try:
        if kind == "table":
            return GridFunction.from_json(spec)
        if kind in X_KINDS:
            return _x_function(spec, s, make_grid(spec["grid"], s.dim))
        grid = make_grid(spec["grid"], 2 * s.dim)
        if kind == "coupling":
            return coupling_table(grid, s)
        if kind == "pair_quadratic":
            Q = np.asarray(spec["Q"], dtype=float).reshape(2 * s.dim, 2 * s.dim)
            return GridFunction.from_callable(
                grid, lambda x, xs: 0.5 * np.einsum("ni,ij,nj->n", np.hstack([x, xs]), Q, np.hstack([x, xs])),
                primal_dim=s.dim)
        if kind in ("fitzpatrick", "s_function", "pi_indicator"):
            T = operators[spec["operator"]]
            build = {"fitzpatrick": fitzpatrick_table, "s_function": s_function_table,
                     "pi_indicator": graph_indicator_table}[kind]
            return build(T, grid)
        if kind == "separable":
            # f(x) + f*(x*) on the pair grid, f given on the primal axis of that grid
            pg = BoxGrid(s.dim, grid.radius, grid.m)
            f = _x_function(spec["function"], s, pg)
            fs = legendre(f)
            vals = np.add.outer(f.values, fs.values).reshape(-1)
            return GridFunction(grid, vals, s.dim, {"kind": "separable"})
    except KeyError as exc:
        raise ConfigError(f"function spec is missing or references unknown {exc}") from None
    raise ConfigError(f"unknown function kind {kind!r}")


def shipped_scenarios() -> dict:
    """Maximal and non-maximal sampled operators used by the equivalence suite.

    Each entry holds the operator, its space, the expected class, and probe
    grids chosen inside the sampled region so that truncation at the sample
    boundary cannot pose as an extension.
    """
    s1 = SpaceSpec(1, "l2")
    s2 = SpaceSpec(2, "l2")
    ident = build_linear([[1.0]], s1, BoxGrid.from_spacing(1, 2.5, 0.1))
    rot = build_rotation(s2, BoxGrid.from_spacing(2, 2.0, 0.25))
    box = GridFunction.from_callable(BoxGrid.from_spacing(1, 2.5, 0.1),
                                     lambda X: np.where(np.abs(X[:, 0]) <= 1 + 1e-12, 0.0, np.inf))
    ncone = build_subdifferential(box, s1, BoxGrid.from_spacing(1, 4.0, 0.1))
    trunc = ident.restrict([0.0], [1.0])
    point = OperatorGraph.from_pairs(s1, [([0.0], [0.0])])
    one_d = dict(
        maximality_probes=BoxGrid.from_spacing(2, 2.0, 0.1),
        ni_probes=BoxGrid.from_spacing(2, 2.0, 0.1),
        dual_probes=BoxGrid.from_spacing(1, 3.0, 0.1),
        hit_tol=0.1,
        shifts=[[0.0], [0.5], [-0.5]],
    )
    two_d = dict(
        maximality_probes=BoxGrid.from_spacing(4, 1.0, 0.5),
        ni_probes=BoxGrid.from_spacing(4, 1.0, 0.5),
        dual_probes=BoxGrid.from_spacing(2, 1.5, 0.25),
        hit_tol=0.25,
        shifts=[[0.0, 0.0], [0.5, -0.5]],
    )
    return {
        "identity": {"operator": ident, "space": s1, "maximal": True, **one_d},
        "rotation": {"operator": rot, "space": s2, "maximal": True, **two_d},
        "normal_cone": {"operator": ncone, "space": s1, "maximal": True, **one_d},
        "truncated_identity": {"operator": trunc, "space": s1, "maximal": False, **one_d},
        "single_point": {"operator": point, "space": s1, "maximal": False, **one_d},
    }
