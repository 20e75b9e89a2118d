"""Composite checks that turn the module operations into :class:`CheckReport` s.

Each function here runs one property end to end (both computational routes
when there are two) and records every tolerance it used.
"""

from __future__ import annotations

import math

import numpy as np

from . import kernels
from .conjugation import flip_conjugate, legendre
from .numerics import BoxGrid, GridFunction
from .operators import OperatorGraph, is_monotone, maximality_probe
from .reports import CheckReport, anchor
from .representations import (
    fitzpatrick_table,
    pairing_table,
    s_function_table,
    _norms,
)
from .spaces import SpaceSpec, preimage_bound
from .sumrule import conjugate_min_formula, inf_conv_representative, qualification_check, _conj_split
from .analysis import aux_infimum

__all__ = [
    "monotonicity_check",
    "maximality_check",
    "fenchel_young_check",
    "fitzpatrick_check",
    "flip_check",
    "aux_check",
    "eps_gap_check",
    "preimage_check",
    "min_formula_check",
    "sample_eps_duality",
]


def monotonicity_check(T: OperatorGraph, tol: float = 1e-12) -> CheckReport:
    ok, w = is_monotone(T, tol)
    n = len(T)
    return CheckReport("monotonicity", ok, tol={"product_tol": tol}, probes=n * (n - 1) // 2,
                       first_violation=None if ok else w, anchor=anchor("monotonicity"))


def maximality_check(T: OperatorGraph, probes: BoxGrid, tol: float | None = None) -> CheckReport:
    ext, used = maximality_probe(T, probes, tol)
    return CheckReport(
        "maximality", not ext,
        tol={"offgraph_tol": used, "related_tol": 1e-12},
        probes=probes.size,
        first_violation=ext[0] if ext else None,
        witnesses=[p.to_json() for p in ext[:10]],
        anchor=anchor("maximality"),
        details={"extensions_found": len(ext), "closure": "sampled graph taken as its own closure"},
    )


def _pair_sum(P: np.ndarray, Y: np.ndarray) -> np.ndarray:
    acc = np.zeros((P.shape[0], Y.shape[0]))
    for k in range(P.shape[1]):
        acc = acc + P[:, k][:, None] * Y[:, k][None, :]
    return acc


def fenchel_young_check(f: GridFunction, dual_grid: BoxGrid | None = None, eps: float = 0.0,
                        tol: float = 1e-9) -> CheckReport:
    """Fenchel-Young at every (node, dual node) and the eps-subdifferential by two routes.

    Route A uses the conjugate: f(x) + f*(x*) <= <x, x*> + eps.
    Route B is the defining inequality f(z) >= f(x) + <z - x, x*> - eps at every node z.
    Both sets are compared node for node with the same slack ``tol``.
    """
    fs = legendre(f, dual_grid)
    P = np.ascontiguousarray(f.nodes())
    Y = np.ascontiguousarray(fs.grid.nodes())
    fin = f.finite
    gap = f.values[:, None] + fs.values[None, :] - _pair_sum(P, Y)
    fy_bad = np.argwhere(fin[:, None] & (gap < -tol))
    route_a = fin[:, None] & (gap <= eps + tol)
    slack = kernels.subgradient_scan(P, np.ascontiguousarray(f.values), Y)
    route_b = slack >= -eps - tol
    diff = np.argwhere(route_a != route_b)
    first = None
    if fy_bad.size:
        a, j = fy_bad[0]
        first = {"condition": "fenchel_young", "x": P[a], "xstar": Y[j], "gap": gap[a, j]}
    elif diff.size:
        a, j = diff[0]
        first = {"condition": "eps_subdifferential", "x": P[a], "xstar": Y[j],
                 "conjugate_route": bool(route_a[a, j]), "defining_route": bool(route_b[a, j])}
    return CheckReport(
        "fenchel_young", not fy_bad.size and not diff.size,
        tol={"fy_tol": tol, "eps": eps},
        probes=int(fin.sum() * Y.shape[0]),
        first_violation=first,
        anchor=anchor("fenchel_young"),
        details={"min_gap": float(gap[fin].min()), "eps_sub_pairs": int(route_a.sum()),
                 "sup_radius": f.grid.radius},
    )


def fitzpatrick_check(T: OperatorGraph, grid: BoxGrid, tol: float | None = None) -> CheckReport:
    """phi_T = pi on the graph (exact), phi_T >= pi - tol and phi_T <= S_T on the grid.

    The lower bound is only expected when T is a maximal sample covering the
    grid box. S_T needs every graph pair inside the box to be a grid node.
    """
    d = T.space.dim
    tol = 10.0 * grid.spacing if tol is None else float(tol)
    Tin = _inside(T, grid.radius)
    on_graph = kernels.fitzpatrick_eval(T.xs, T.xstars, T.xs, T.xstars)
    pi_graph = np.zeros(len(T))
    for k in range(d):
        pi_graph = pi_graph + T.xs[:, k] * T.xstars[:, k]
    exact_bad = np.flatnonzero(on_graph != pi_graph)
    phi = fitzpatrick_table(T, grid)
    S = s_function_table(Tin, grid)
    pi = pairing_table(grid, d)
    low_bad = np.flatnonzero(phi.values < pi - tol)
    ord_bad = np.flatnonzero(phi.values > S.values + 1e-12)
    nodes = grid.nodes()
    first = None
    if exact_bad.size:
        i = int(exact_bad[0])
        first = {"condition": "phi_equals_pi_on_graph", "pair": T.pair(i), "phi": on_graph[i], "pi": pi_graph[i]}
    elif low_bad.size:
        i = int(low_bad[0])
        first = {"condition": "phi_above_pi", "node": nodes[i], "phi": phi.values[i], "pi": pi[i]}
    elif ord_bad.size:
        i = int(ord_bad[0])
        first = {"condition": "phi_below_s", "node": nodes[i], "phi": phi.values[i], "s": S.values[i]}
    ok = not (exact_bad.size or low_bad.size or ord_bad.size)
    return CheckReport(
        "fitzpatrick", ok,
        tol={"graph_tol": 0.0, "lower_tol": tol, "order_tol": 1e-12},
        probes=int(len(T) + 2 * grid.size),
        first_violation=first,
        anchor=anchor("fitzpatrick"),
        details={"phi": "exact", "s_function": "approximate", "sup_radius": grid.radius,
                 "graph_pairs_in_box": len(Tin)},
    )


def _inside(T: OperatorGraph, radius: float) -> OperatorGraph:
    keep = np.all(np.abs(np.hstack([T.xs, T.xstars])) <= radius * (1 + 1e-12), axis=1)
    if not keep.any():
        raise ValueError("no graph pair lies inside the grid box")
    return OperatorGraph(T.space, T.xs[keep], T.xstars[keep], dict(T.meta))


def flip_check(T: OperatorGraph, grid: BoxGrid, tol: float | None = None) -> CheckReport:
    """J S_T against phi_T node-wise, both for the graph pairs inside the box."""
    tol = 10.0 * grid.spacing if tol is None else float(tol)
    Tin = _inside(T, grid.radius)
    S = s_function_table(Tin, grid)
    J = flip_conjugate(S)
    phi = fitzpatrick_table(Tin, grid)
    diff = np.abs(J.values - phi.values)
    bad = np.flatnonzero(~(diff <= tol))
    first = None
    if bad.size:
        i = int(bad[0])
        first = {"node": grid.nodes()[i], "flip_s": J.values[i], "phi": phi.values[i]}
    return CheckReport(
        "flip_conjugate", not bad.size,
        tol={"tol": tol},
        probes=grid.size,
        first_violation=first,
        anchor=anchor("flip_conjugate"),
        details={"max_abs_diff": float(diff.max()), "sup_radius": grid.radius},
    )


def aux_check(h: GridFunction, s: SpaceSpec, shifts, tol: float | None = None,
              expect: str = "zero", threshold: float = 0.0) -> CheckReport:
    """aux infimum at each shift: within [-tol, tol] (expect="zero") or above
    ``threshold`` (expect="positive")."""
    tol = 10.0 * h.grid.spacing if tol is None else float(tol)
    vals = []
    first = None
    for x0, x0s in shifts:
        v = aux_infimum(h, x0, x0s, s)
        vals.append({"shift": [np.atleast_1d(x0).tolist(), np.atleast_1d(x0s).tolist()], "value": v})
        ok = (abs(v) <= tol) if expect == "zero" else (v > threshold)
        if not ok and first is None:
            first = vals[-1]
    return CheckReport(
        "aux_infimum", first is None,
        tol={"tol": tol, "threshold": threshold} if expect != "zero" else {"tol": tol},
        probes=len(vals), first_violation=first, witnesses=vals, anchor=anchor("aux_infimum"),
        details={"expect": expect},
    )


def sample_eps_duality(eps: float, s: SpaceSpec, n: int, rng: np.random.Generator,
                       box: float = 2.0, batch: int = 200_000, max_draws: int = 100_000_000):
    """Rejection sampling of ``n`` pairs of J_eps from the uniform law on a box."""
    d = s.dim
    X, Xs = [], []
    got = 0
    draws = 0
    while got < n:
        if draws >= max_draws:
            raise RuntimeError("rejection sampler exceeded its draw budget")
        Z = rng.uniform(-box, box, size=(batch, 2 * d))
        draws += batch
        x, xs = Z[:, :d], Z[:, d:]
        nx, nxs = _norms(x, s.norm), _norms(xs, s.dual_norm_tag)
        keep = 0.5 * nx * nx + 0.5 * nxs * nxs <= (x * xs).sum(axis=1) + eps
        X.append(x[keep])
        Xs.append(xs[keep])
        got += int(keep.sum())
    return np.vstack(X)[:n], np.vstack(Xs)[:n], draws


def eps_gap_check(s: SpaceSpec, eps_list, samples: int = 1000, seed: int = 0,
                  box: float = 2.0) -> CheckReport:
    """| ||x|| - ||x*|| | <= sqrt(2 eps) on rejection-sampled members of J_eps."""
    rng = np.random.default_rng(seed)
    worst = []
    first = None
    total = 0
    for eps in eps_list:
        X, Xs, draws = sample_eps_duality(eps, s, samples, rng, box)
        gap = np.abs(_norms(X, s.norm) - _norms(Xs, s.dual_norm_tag))
        bound = math.sqrt(2.0 * eps)
        bad = np.flatnonzero(gap > bound + 1e-12)
        total += X.shape[0]
        worst.append({"eps": eps, "max_gap": float(gap.max()), "bound": bound, "draws": draws,
                      "violations": int(bad.size)})
        if bad.size and first is None:
            i = int(bad[0])
            first = {"eps": eps, "x": X[i], "xstar": Xs[i], "gap": gap[i]}
    return CheckReport("eps_duality_gap", first is None, tol={"slack": 1e-12}, probes=total,
                       first_violation=first, witnesses=worst, anchor=anchor("eps_duality_gap"),
                       details={"norm": s.norm, "seed": seed})


def preimage_check(T: OperatorGraph, s: SpaceSpec, M: float, eps: float, dual_grid: BoxGrid,
                   anchor_pair: int | None = None) -> CheckReport:
    """Every x with x* in T(x), y* in J_eps(x) on the dual grid and ||x* + y*|| <= M
    obeys the explicit radii computed from one graph pair (z, z*)."""
    d = s.dim
    Y = dual_grid.nodes()
    if anchor_pair is None:
        anchor_pair = int(np.argmin(_norms(T.xs, s.norm) + _norms(T.xstars, s.dual_norm_tag)))
    z, zs = T.xs[anchor_pair], T.xstars[anchor_pair]
    bnd = preimage_bound(z, zs, M, eps, s)
    nx = _norms(T.xs, s.norm)
    ny = _norms(Y, s.dual_norm_tag)
    pr = _pair_sum(T.xs, Y)
    member = 0.5 * nx[:, None] ** 2 + 0.5 * ny[None, :] ** 2 <= pr + eps + 1e-12
    tot = _norms((T.xstars[:, None, :] + Y[None, :, :]).reshape(-1, d), s.dual_norm_tag).reshape(member.shape)
    pre = member & (tot <= M + 1e-12)
    ia, jy = np.nonzero(pre)
    bad_d = ny[jy] > bnd.dual + 1e-9
    bad_p = nx[ia] > bnd.primal + 1e-9
    bad = np.flatnonzero(bad_d | bad_p)
    first = None
    if bad.size:
        k = int(bad[0])
        first = {"x": T.xs[ia[k]], "xstar": T.xstars[ia[k]], "ystar": Y[jy[k]]}
    return CheckReport(
        "preimage_bound", not bad.size,
        tol={"slack": 1e-9},
        probes=int(member.size),
        first_violation=first,
        anchor=anchor("preimage_bound"),
        details={"dual_bound": bnd.dual, "primal_bound": bnd.primal, "preimages": int(ia.size),
                 "max_ystar_norm": float(ny[jy].max()) if ia.size else 0.0,
                 "max_x_norm": float(nx[ia].max()) if ia.size else 0.0,
                 "anchor_pair": [z.tolist(), zs.tolist()]},
    )


def min_formula_check(h1: GridFunction, h2: GridFunction, probes, tol: float | None = None,
                      strict: bool = False) -> CheckReport:
    """Conjugate min-formula against the direct conjugate of the inf-convolution."""
    tol = 10.0 * h1.grid.spacing if tol is None else float(tol)
    qual = qualification_check(h1, h2, strict)
    direct = legendre(inf_conv_representative(h1, h2))
    cache = (_conj_split(h1)[1], _conj_split(h2)[1])
    rows = []
    first = None
    worst = 0.0
    for xs, xss in probes:
        v = conjugate_min_formula(h1, h2, xs, xss, qual, cache)
        dv = float(direct.at(np.concatenate([np.atleast_1d(xs), np.atleast_1d(xss)])))
        err = abs(v.value - dv)
        worst = max(worst, err)
        rows.append({"probe": [np.atleast_1d(xs).tolist(), np.atleast_1d(xss).tolist()],
                     "formula": v.value, "direct": dv})
        if not err <= tol and first is None:
            first = rows[-1]
    if not qual.passed:
        verdict = "unverified"
    else:
        verdict = "pass" if first is None else "fail"
    return CheckReport("conjugate_min_formula", verdict, tol={"tol": tol}, probes=len(rows),
                       first_violation=first, witnesses=rows, anchor=anchor("conjugate_min_formula"),
                       details={"qualification": qual.verdict, "max_abs_diff": worst,
                                "sup_radius": h1.grid.radius})
