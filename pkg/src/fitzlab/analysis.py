"""Executable checks for the NI condition, range density and Brondsted-Rockafellar.

Bidual probes x** are primal vectors: in finite dimension X** is X, so the
probe space X* x X** is X* x X. This is exactly where a non-reflexive space
would differ, and why no maximal non-NI example can appear here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import kernels
from .conjugation import translate
from .numerics import BoxGrid, GridFunction, min_over_grid
from .operators import OperatorGraph, maximality_probe
from .reports import CheckReport, PreconditionError, ResolutionExhausted, anchor
from .representations import coupling_table, family_membership, pairing_table
from .spaces import DualityPair, SpaceSpec, dual_norm, norm

__all__ = [
    "NIProbeResult",
    "RangeReport",
    "ni_deficit",
    "ni_scan",
    "aux_infimum",
    "aux_minimizer",
    "range_density_check",
    "equivalence_suite",
    "br_search",
    "br_report",
]


class NIProbeResult(NamedTuple):
    probe: DualityPair  # (x*, x**) with x** a primal vector
    deficit: float
    arginf: DualityPair

    def to_json(self):
        return {"probe": self.probe.to_json(), "deficit": self.deficit, "arginf": self.arginf.to_json()}


def ni_deficit(T: OperatorGraph, xstar, xstarstar) -> NIProbeResult:
    """min over (y, y*) in T of <y* - x*, x** - y>."""
    Ps = np.atleast_2d(np.asarray(xstar, dtype=float))
    Pss = np.atleast_2d(np.asarray(xstarstar, dtype=float))
    if Ps.shape != (1, T.space.dim) or Pss.shape != Ps.shape:
        raise ValueError(f"probe must have dimension {T.space.dim}")
    val, arg = kernels.ni_eval(Ps, Pss, T.xs, T.xstars)
    k = int(arg[0])
    return NIProbeResult(DualityPair(Ps[0], Pss[0]), float(val[0]), T.pair(k))


def ni_scan(T: OperatorGraph, probes: BoxGrid, tol: float = 1e-12) -> CheckReport:
    """NI deficit at every node of a probe grid on X* x X; passes iff all <= tol."""
    d = T.space.dim
    if probes.dim != 2 * d:
        raise ValueError(f"probe grid must live on X* x X (dim {2 * d})")
    nodes = probes.nodes()
    Ps, Pss = np.ascontiguousarray(nodes[:, :d]), np.ascontiguousarray(nodes[:, d:])
    val, arg = kernels.ni_eval(Ps, Pss, T.xs, T.xstars)
    bad = np.flatnonzero(val > tol)
    first = None
    if bad.size:
        i = int(bad[0])
        first = {"probe": [Ps[i], Pss[i]], "deficit": val[i], "arginf": T.pair(int(arg[i]))}
    return CheckReport(
        "ni_deficit", bad.size == 0,
        tol={"deficit_tol": tol},
        probes=int(nodes.shape[0]),
        first_violation=first,
        anchor=anchor("ni_deficit"),
        details={"max_deficit": float(val.max()), "violations": int(bad.size),
                 "bidual": "x** identified with a primal vector"},
    )


def _aux_table(h: GridFunction, x0, x0star, s: SpaceSpec) -> GridFunction:
    if h.primal_dim != s.dim:
        raise ValueError("h must be a bifunction over the space")
    ht = translate(h, x0, x0star)
    p = coupling_table(h.grid, s)
    return ht.with_values(ht.values + p.values)


def aux_infimum(h: GridFunction, x0, x0star, s: SpaceSpec) -> float:
    """min over the grid of h_(x0, x0*) + ½||x||² + ½||x*||²."""
    return float(min_over_grid(_aux_table(h, x0, x0star, s)).value)


def aux_minimizer(h: GridFunction, x0, x0star, s: SpaceSpec):
    """The grid minimiser of :func:`aux_infimum` as (value, x, x*)."""
    gm = min_over_grid(_aux_table(h, x0, x0star, s))
    d = s.dim
    return float(gm.value), gm.node[:d].copy(), gm.node[d:].copy()


@dataclass
class RangeReport:
    mu: float
    eps: float
    z0: np.ndarray
    covered: float
    misses: list
    resolution: float
    probes: int = 0
    witnesses: list = field(default_factory=list)

    def __post_init__(self):
        if not 0.0 <= self.covered <= 1.0:
            raise ValueError("covered must be a fraction")

    @property
    def dense(self) -> bool:
        return not self.misses

    def to_json(self) -> dict:
        return {
            "mu": self.mu, "eps": self.eps, "z0": np.asarray(self.z0).tolist(),
            "covered": self.covered, "misses": [np.asarray(m).tolist() for m in self.misses],
            "resolution": self.resolution, "probes": self.probes,
        }


def _search_lattice(W: np.ndarray, Xs: np.ndarray, hit_tol: float, d: int) -> tuple[float, int]:
    # dual lattice with spacing hit_tol, wide enough to hold every w* - x* (+ slack)
    need = float(np.abs(W).max(initial=0.0) + np.abs(Xs).max(initial=0.0) + 2 * hit_tol)
    half = max(1, int(math.ceil(need / hit_tol)))
    return half * hit_tol, 2 * half + 1


def range_density_check(T: OperatorGraph, s: SpaceSpec, mu: float, eps: float, z0,
                        dual_probes: BoxGrid, hit_tol: float,
                        search_grid: BoxGrid | None = None) -> RangeReport:
    """Coverage of the dual probes by R(T(. + z0) + mu J_eps).

    A probe w* is hit when some graph pair (x + z0, x*) and some node y* of
    the dual search lattice satisfy y*/mu in J_eps(x) and
    ||x* + y* - w*||_dual <= hit_tol. T is assumed monotone.
    """
    if mu <= 0 or eps < 0 or hit_tol <= 0:
        raise ValueError("need mu > 0, eps >= 0 and hit_tol > 0")
    d = s.dim
    if dual_probes.dim != d:
        raise ValueError("dual probes must live on X*")
    z0 = np.atleast_1d(np.asarray(z0, dtype=float))
    W = np.ascontiguousarray(dual_probes.nodes())
    X = np.ascontiguousarray(T.xs - z0[None, :])
    Xs = np.ascontiguousarray(T.xstars)
    if search_grid is None:
        radius, ms = _search_lattice(W, Xs, hit_tol, d)
    else:
        radius, ms = search_grid.radius, search_grid.m
    hit, wk, wy = kernels.range_hits(W, X, Xs, float(mu), float(eps), float(hit_tol),
                                     float(radius), int(ms), kernels.NORM_CODES[s.norm])
    misses = [W[i].copy() for i in np.flatnonzero(~hit)]
    wit = []
    for i in np.flatnonzero(hit)[:3]:
        k = int(wk[i])
        wit.append({"w": W[i], "x": X[k], "xstar": Xs[k], "ystar": wy[i]})
    return RangeReport(float(mu), float(eps), z0, float(hit.mean()), misses, float(hit_tol),
                       int(W.shape[0]), wit)


def equivalence_suite(T: OperatorGraph, s: SpaceSpec, shifts, eps_list, mu_list, *,
                      maximality_probes: BoxGrid, ni_probes: BoxGrid, dual_probes: BoxGrid,
                      hit_tol: float, max_tol: float | None = None,
                      ni_tol: float = 1e-12) -> CheckReport:
    """Agreement of maximality + NI with range density over a (mu, eps, z0) matrix.

    Every cell records the maximality verdict, the NI verdict and the density
    verdict for R(T(. + z0) + mu J_eps). A cell agrees when density holds exactly
    when T is maximal and of type NI. The report passes iff every cell agrees;
    ``details["operator"]`` carries the common verdict.
    """
    ext, tol_used = maximality_probe(T, maximality_probes, max_tol)
    ni = ni_scan(T, ni_probes, ni_tol)
    maximal = not ext
    mni = maximal and ni.passed
    cells = []
    first = None
    for mu in mu_list:
        for eps in eps_list:
            for z0 in shifts:
                rr = range_density_check(T, s, mu, eps, z0, dual_probes, hit_tol)
                cell = {
                    "mu": float(mu), "eps": float(eps), "z0": np.atleast_1d(z0).astype(float).tolist(),
                    "maximality": "pass" if maximal else "fail",
                    "ni": ni.verdict,
                    "density": "pass" if rr.dense else "fail",
                    "covered": rr.covered,
                    "maximal_and_ni": "pass" if mni else "fail",
                }
                cell["equivalent"] = (cell["density"] == cell["maximal_and_ni"])
                if rr.misses:
                    cell["first_miss"] = rr.misses[0].tolist()
                if not cell["equivalent"] and first is None:
                    first = dict(cell)
                cells.append(cell)
    agree = all(c["equivalent"] for c in cells)
    witnesses = [{"extension": p.to_json()} for p in ext[:5]]
    return CheckReport(
        "equivalence_suite", agree,
        tol={"maximality_tol": tol_used, "ni_tol": ni_tol, "hit_tol": hit_tol},
        probes=int(maximality_probes.size + ni_probes.size + len(cells) * dual_probes.size),
        first_violation=first,
        witnesses=witnesses,
        anchor=anchor("equivalence_suite"),
        details={
            "operator": "maximal_ni" if mni else "not_maximal_ni",
            "equivalent": agree,
            "cells": cells,
            "extensions_found": len(ext),
            "ni_max_deficit": ni.details["max_deficit"],
            "closure": "sampled graph taken as its own closure",
        },
    )


def _dist_arrays(V: np.ndarray, tag: str) -> np.ndarray:
    if tag == "l1":
        return np.abs(V).sum(axis=1)
    if tag == "l2":
        return np.sqrt((V * V).sum(axis=1))
    return np.abs(V).max(axis=1)


def br_search(h: GridFunction, T: OperatorGraph | None, x, xstar, eps: float, lam: float,
              s: SpaceSpec, tol: float = 1e-9, check_membership: bool = False) -> DualityPair:
    """A node of {h = pi} with ||x' - x|| < lam and ||x'* - x*|| < eps / lam.

    ``(x, x*)`` must be a grid node with h(x, x*) < <x, x*> + eps. Among
    qualifying equality nodes the one with the smallest normalised box
    distance wins; ties go to the smaller primal distance, then the lower
    index. Raises :class:`ResolutionExhausted` when the box holds no
    equality node at this grid resolution.
    """
    if eps <= 0 or lam <= 0:
        raise ValueError("eps and lambda must be positive")
    d = s.dim
    if h.primal_dim != d:
        raise ValueError("h must be a bifunction over the space")
    if check_membership:
        if T is None:
            raise ValueError("membership check needs the operator")
        rep = family_membership(h, T)
        if not rep.passed:
            raise PreconditionError(f"h is not in the family of T: {rep.first_violation}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    xs = np.atleast_1d(np.asarray(xstar, dtype=float))
    hv = float(h.at(np.concatenate([x, xs])))
    gap = hv - float(np.dot(x, xs))
    if not gap < eps:
        raise PreconditionError(f"h(x, x*) - <x, x*> = {gap} is not below eps = {eps}")
    nodes = h.nodes()
    pi = pairing_table(h.grid, d)
    eq = np.flatnonzero(np.abs(h.values - pi) <= tol)
    rp = _dist_arrays(nodes[eq, :d] - x, s.norm)
    rd = _dist_arrays(nodes[eq, d:] - xs, s.dual_norm_tag)
    rad_d = eps / lam
    inside = (rp < lam) & (rd < rad_d)
    if not inside.any():
        raise ResolutionExhausted(
            f"no equality node within ({lam}, {rad_d}) of the query at spacing {h.grid.spacing}")
    cand = np.flatnonzero(inside)
    key = np.maximum(rp[cand] / lam, rd[cand] / rad_d)
    order = np.lexsort((eq[cand], rp[cand], key))
    best = int(eq[cand[order[0]]])
    bx, bxs = nodes[best, :d].copy(), nodes[best, d:].copy()
    # self-verification: never hand back an out-of-box pair
    if not (norm(bx - x, s) < lam and dual_norm(bxs - xs, s) < rad_d
            and abs(h.values[best] - pi[best]) <= tol):
        raise AssertionError("br_search candidate failed its own bounds")
    return DualityPair(bx, bxs)


def br_report(h: GridFunction, T: OperatorGraph | None, x, xstar, eps: float, lam: float,
              s: SpaceSpec, tol: float = 1e-9) -> CheckReport:
    """:func:`br_search` wrapped as a report; exhaustion is the ``exhausted`` verdict."""
    tols = {"equality_tol": tol, "primal_radius": lam, "dual_radius": eps / lam}
    try:
        p = br_search(h, T, x, xstar, eps, lam, s, tol)
    except ResolutionExhausted as exc:
        return CheckReport("br_search", "exhausted", tol=tols, probes=1, anchor=anchor("br_search"),
                           details={"reason": str(exc), "spacing": h.grid.spacing})
    return CheckReport(
        "br_search", "pass", tol=tols, probes=1, anchor=anchor("br_search"),
        witnesses=[{"pair": p.to_json(),
                    "primal_distance": norm(p.x - np.atleast_1d(x), s),
                    "dual_distance": dual_norm(p.xstar - np.atleast_1d(xstar), s)}],
    )
