"""Representatives of operator sums by inf-convolution in the dual variable."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .analysis import ni_scan
from .conjugation import flip_conjugate, legendre
from .numerics import BoxGrid, GridFunction
from .operators import OperatorGraph
from .reports import CheckReport, PreconditionError, anchor
from .representations import family_membership, pairing_table

__all__ = [
    "ProjectedDomain",
    "MinFormulaValue",
    "projected_domain",
    "qualification_check",
    "inf_conv_representative",
    "conjugate_min_formula",
    "minkowski_sum_graph",
    "sum_operator_check",
]


@dataclass(frozen=True, eq=False)
class ProjectedDomain:
    """Primal nodes x for which some tabulated x* gives h(x, x*) < inf."""

    nodes: np.ndarray
    index: np.ndarray  # flat indices into the primal grid
    primal_grid: BoxGrid

    def __post_init__(self):
        if self.nodes.shape[0] == 0:
            raise ValueError("projected domain of a proper function is nonempty")

    def __len__(self) -> int:
        return self.nodes.shape[0]


def _split_table(h: GridFunction) -> np.ndarray:
    d = h.primal_dim
    m = h.grid.m
    return h.values.reshape(m**d, m**d)


def projected_domain(h: GridFunction) -> ProjectedDomain:
    if not h.is_bifunction:
        raise ValueError("projected domain needs a bifunction on X x X*")
    d = h.primal_dim
    pg = BoxGrid(d, h.grid.radius, h.grid.m)
    idx = np.flatnonzero(np.isfinite(_split_table(h)).any(axis=1))
    return ProjectedDomain(pg.nodes()[idx].copy(), idx, pg)


def _difference_set(D1: ProjectedDomain, D2: ProjectedDomain) -> np.ndarray:
    # differences of multi-indices keep the arithmetic exact
    g = D1.primal_grid
    i1 = np.array(np.unravel_index(D1.index, g.shape)).T
    i2 = np.array(np.unravel_index(D2.index, g.shape)).T
    diff = (i1[:, None, :] - i2[None, :, :]).reshape(-1, g.dim)
    return np.unique(diff, axis=0)


def _cone_is_subspace(S: np.ndarray) -> bool:
    """cone(S) is a subspace iff sum lambda_i s_i = 0 has a solution with all lambda_i >= 1."""
    from scipy.optimize import linprog

    S = S[np.any(S != 0, axis=1)]
    if S.shape[0] == 0:
        return True
    res = linprog(np.ones(S.shape[0]), A_eq=S.T.astype(float), b_eq=np.zeros(S.shape[1]),
                  bounds=[(1.0, None)] * S.shape[0], method="highs")
    return res.status == 0


def qualification_check(h1: GridFunction, h2: GridFunction, strict: bool = False) -> CheckReport:
    """Whether the union of lambda (D_X(h1) - D_X(h2)), lambda > 0, is a subspace.

    The difference set is formed on grid indices. Its cone is a subspace
    exactly when some strictly positive combination of its nonzero elements
    vanishes, which is decided by a small LP. In finite dimension every
    subspace is closed. ``strict`` also demands that the difference set be
    symmetric about 0.
    """
    if h1.grid != h2.grid or h1.primal_dim != h2.primal_dim:
        raise ValueError("h1 and h2 must share a grid")
    D1, D2 = projected_domain(h1), projected_domain(h2)
    S = _difference_set(D1, D2)
    Sf = S * D1.primal_grid.spacing
    if np.any(S != 0):
        _, sv, vt = np.linalg.svd(S.astype(float), full_matrices=False)
        rank = int((sv > 1e-9 * sv[0]).sum())
        basis = vt[:rank]
    else:
        rank, basis = 0, np.zeros((0, S.shape[1]))
    ok = _cone_is_subspace(S)
    symmetric = None
    if strict:
        keys = {tuple(r) for r in S.tolist()}
        symmetric = all(tuple(-v for v in r) in keys for r in S.tolist())
        ok = ok and symmetric
    first = None
    if not ok:
        first = {"reason": "cone of the domain difference is not a subspace" if symmetric is not False
                 else "difference set is not symmetric", "difference_sample": Sf[:5]}
    details = {"span_rank": rank, "span_basis": np.round(basis, 12), "difference_count": int(S.shape[0]),
               "strict": bool(strict)}
    if symmetric is not None:
        details["symmetric"] = symmetric
    return CheckReport("qualification", ok, tol={"rank_rtol": 1e-9}, probes=int(S.shape[0]),
                       first_violation=first, anchor=anchor("qualification"), details=details)


def _dual_offsets(h: GridFunction):
    d = h.primal_dim
    m = h.grid.m
    didx = np.array(np.unravel_index(np.arange(m**d), (m,) * d)).T.astype(np.int64)
    strides = np.array([m ** (d - 1 - k) for k in range(d)], dtype=np.int64)
    return np.ascontiguousarray(didx), strides


def inf_conv_representative(h1: GridFunction, h2: GridFunction) -> GridFunction:
    """h(x, x*) = min over tabulated y* of h1(x, y*) + h2(x, x* - y*).

    x* - y* off the table counts as +inf, so truncation can only raise h.
    """
    if h1.grid != h2.grid or h1.primal_dim is None or h1.primal_dim != h2.primal_dim:
        raise ValueError("h1 and h2 must be bifunctions on a shared grid")
    didx, strides = _dual_offsets(h1)
    out = kernels.inf_conv(np.ascontiguousarray(_split_table(h1)), np.ascontiguousarray(_split_table(h2)),
                           didx, h1.grid.m, h1.grid.center_index, strides)
    return GridFunction(h1.grid, out.reshape(-1), h1.primal_dim,
                        {"kind": "inf_conv", "truncation_radius": h1.grid.radius})


class MinFormulaValue(NamedTuple):
    value: float
    guaranteed: bool

    @property
    def status(self) -> str:
        return "verified" if self.guaranteed else "unverified"


def _conj_split(h: GridFunction):
    hs = legendre(h)
    return hs, _split_table(hs)


def conjugate_min_formula(h1: GridFunction, h2: GridFunction, xstar, xstarstar,
                          qualification: CheckReport | None = None, _cache=None) -> MinFormulaValue:
    """min over tabulated u* of h1*(u*, x**) + h2*(x* - u*, x**).

    Without a passing qualification check the value is returned with
    ``guaranteed=False`` (the exact splitting is then not assured).
    """
    qual = qualification_check(h1, h2) if qualification is None else qualification
    if _cache is None:
        C1 = _conj_split(h1)[1]
        C2 = _conj_split(h2)[1]
    else:
        C1, C2 = _cache
    d = h1.primal_dim
    g = h1.grid
    pg = BoxGrid(d, g.radius, g.m)
    a = pg.multi_index_of(np.atleast_1d(xstar))
    b = pg.index_of(np.atleast_1d(xstarstar))
    if a is None or b is None:
        raise ValueError("probe must be a node of the grid")
    didx, strides = _dual_offsets(h1)
    t = np.array(a)[None, :] - didx + g.center_index
    ok = np.all((t >= 0) & (t < g.m), axis=1)
    tf = (t[ok] * strides[None, :]).sum(axis=1)
    vals = C1[np.flatnonzero(ok), b] + C2[tf, b]
    return MinFormulaValue(float(vals.min()), qual.passed)


def minkowski_sum_graph(T1: OperatorGraph, T2: OperatorGraph) -> OperatorGraph:
    """{(x, a + b) : (x, a) in T1, (x, b) in T2} at primal points shared exactly."""
    if T1.space != T2.space:
        raise ValueError("operators live on different spaces")
    X, Xs = [], []
    keys2: dict = {}
    for x, b in zip(T2.xs, T2.xstars):
        keys2.setdefault(x.tobytes(), []).append(b)
    for x, a in zip(T1.xs, T1.xstars):
        for b in keys2.get(x.tobytes(), ()):
            X.append(x)
            Xs.append(a + b)
    if not X:
        raise ValueError("the operators share no primal point")
    rows = np.unique(np.hstack([np.array(X), np.array(Xs)]), axis=0)
    d = T1.space.dim
    return OperatorGraph(T1.space, rows[:, :d], rows[:, d:], {"kind": "minkowski_sum"})


def sum_operator_check(T1: OperatorGraph, T2: OperatorGraph, h1: GridFunction, h2: GridFunction,
                       probes: BoxGrid, eq_tol: float | None = None,
                       ni_probes: BoxGrid | None = None, check_membership: bool = True) -> CheckReport:
    """Compare {h = pi} and {J h = pi} for h = h1 inf-conv h2 with the graph of T1 + T2.

    ``probes`` is a box (on X x X*, sharing the spacing of h) on which both
    equality sets are compared; it should stay clear of the table edge, where
    the truncated conjugate in J h is unreliable. Checks: (a) each sum pair in
    the box lies in both equality sets; (b) each equality node in the box is
    within one grid cell (sup-norm) of a sum pair; (c) NI deficits of the sum
    graph on ``ni_probes`` are <= 0.
    """
    if check_membership:
        for name, h, T in (("h1", h1, T1), ("h2", h2, T2)):
            rep = family_membership(h, T)
            if not rep.passed:
                raise PreconditionError(f"{name} is not in the family of its operator: {rep.first_violation}")
    d = T1.space.dim
    grid = h1.grid
    delta = grid.spacing
    if abs(probes.spacing - delta) > 1e-12 * delta or probes.radius > grid.radius:
        raise ValueError("probe box must share the spacing of the table and sit inside it")
    eq_tol = 0.5 * delta * delta + 1e-12 if eq_tol is None else float(eq_tol)
    S = minkowski_sum_graph(T1, T2)
    h = inf_conv_representative(h1, h2)
    jh = flip_conjugate(h)
    pi = pairing_table(grid, d)
    nodes = grid.nodes()
    in_box = np.all(np.abs(nodes) <= probes.radius + 1e-9 * delta, axis=1)
    E_h = np.abs(h.values - pi) <= eq_tol
    E_j = np.abs(jh.values - pi) <= eq_tol
    pts = np.hstack([S.xs, S.xstars])
    first = None
    fails = {"sum_in_eq_h": 0, "sum_in_eq_jh": 0, "eq_h_near_sum": 0, "eq_jh_near_sum": 0}
    checked = 0
    for p in pts:
        if np.any(np.abs(p) > probes.radius + 1e-9 * delta):
            continue
        i = grid.index_of(p)
        if i is None:
            continue
        checked += 1
        for key, E in (("sum_in_eq_h", E_h), ("sum_in_eq_jh", E_j)):
            if not E[i]:
                fails[key] += 1
                if first is None:
                    first = {"condition": key, "pair": p, "h": h.values[i], "jh": jh.values[i], "pi": pi[i]}
    for key, E in (("eq_h_near_sum", E_h), ("eq_jh_near_sum", E_j)):
        sel = np.flatnonzero(E & in_box)
        if sel.size == 0:
            continue
        near = np.abs(nodes[sel][:, None, :] - pts[None, :, :]).max(axis=2).min(axis=1)
        bad = sel[near > delta * (1 + 1e-9)]
        fails[key] += int(bad.size)
        if bad.size and first is None:
            i = int(bad[0])
            first = {"condition": key, "node": nodes[i], "h": h.values[i], "jh": jh.values[i], "pi": pi[i]}
    ni_info = None
    if ni_probes is not None:
        ni = ni_scan(S, ni_probes)
        ni_info = {"verdict": ni.verdict, "max_deficit": ni.details["max_deficit"]}
        if not ni.passed and first is None:
            first = {"condition": "ni_deficit", **ni.first_violation}
    ok = all(v == 0 for v in fails.values()) and (ni_info is None or ni_info["verdict"] == "pass") and checked > 0
    return CheckReport(
        "sum_rule", ok,
        tol={"eq_tol": eq_tol, "cell": delta},
        probes=int(checked + in_box.sum()),
        first_violation=first,
        anchor=anchor("sum_rule"),
        details={"failures": fails, "sum_pairs_checked": checked, "sum_pairs": len(S),
                 "ni": ni_info, "truncation_radius": grid.radius},
    )
