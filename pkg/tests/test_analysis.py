import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from fitzlab.analysis import (
    aux_infimum,
    aux_minimizer,
    br_report,
    br_search,
    equivalence_suite,
    ni_deficit,
    ni_scan,
    range_density_check,
)
from fitzlab.catalog import shipped_scenarios
from fitzlab.numerics import BoxGrid
from fitzlab.operators import OperatorGraph, build_linear, build_rotation
from fitzlab.reports import PreconditionError, ResolutionExhausted
from fitzlab.representations import coupling_table, fitzpatrick_table, graph_indicator_table, pairing_table
from fitzlab.spaces import SpaceSpec

S1 = SpaceSpec(1)
S2 = SpaceSpec(2)


def _identity(R=2.5, sp=0.1):
    return build_linear([[1.0]], S1, BoxGrid.from_spacing(1, R, sp))


def _point():
    return OperatorGraph.from_pairs(S1, [([0.0], [0.0])])


def test_ni_deficit_matches_oracle():
    T = build_rotation(S2, BoxGrid(2, 1.0, 5))
    graph = list(zip(map(tuple, T.xs.tolist()), map(tuple, T.xstars.tolist())))
    rng = np.random.default_rng(7)
    for _ in range(20):
        a, b = rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2)
        r = ni_deficit(T, a, b)
        assert r.deficit == pytest.approx(oracles.ni_deficit(graph, a, b), abs=1e-13)
        y, ys = r.arginf.x, r.arginf.xstar
        assert r.deficit == pytest.approx(float(np.dot(ys - a, b - y)), abs=1e-13)


def test_ni_single_point_sign():
    T = _point()
    assert ni_deficit(T, [1.0], [-1.0]).deficit == 1.0
    assert ni_deficit(T, [1.0], [1.0]).deficit == -1.0
    rep = ni_scan(T, BoxGrid(2, 1.0, 3))
    assert not rep.passed and rep.details["max_deficit"] == 1.0


@pytest.mark.parametrize("T", [_identity(), build_rotation(S2, BoxGrid.from_spacing(2, 2.0, 0.25))])
def test_ni_maximal_samples(T):
    d = T.space.dim
    probes = BoxGrid.from_spacing(2 * d, 2.0 if d == 1 else 1.0, 0.1 if d == 1 else 0.5)
    rep = ni_scan(T, probes)
    assert rep.passed and rep.details["max_deficit"] <= 0.0
    assert rep.details["bidual"]


def test_ni_probe_dimension():
    with pytest.raises(ValueError):
        ni_scan(_identity(), BoxGrid(1, 1.0, 3))


def test_aux_identity_fitzpatrick_is_zero():
    g = BoxGrid.from_spacing(2, 3.0, 0.1)
    phi = fitzpatrick_table(_identity(6.0, 0.1), g)
    for x0, x0s in [([0.0], [0.0]), ([0.5], [-0.3]), ([-1.0], [0.7])]:
        assert abs(aux_infimum(phi, x0, x0s, S1)) <= 10 * g.spacing


def test_aux_coupling_examples():
    g = BoxGrid.from_spacing(2, 3.0, 0.1)
    p = coupling_table(g, S1)
    v, x, xs = aux_minimizer(p, [0.0], [0.0], S1)
    assert v == 0.0 and x.tolist() == [0.0] and xs.tolist() == [0.0]
    v, x, xs = aux_minimizer(p, [1.0], [0.0], S1)
    assert v == pytest.approx(0.0, abs=1e-12)
    assert x[0] == pytest.approx(-0.5) and xs[0] == pytest.approx(0.5)


def test_aux_single_point_positive():
    g = BoxGrid.from_spacing(2, 2.0, 0.1)
    h = graph_indicator_table(_point(), g)
    v, x, xs = aux_minimizer(h, [1.0], [1.0], S1)
    assert v == pytest.approx(2.0, abs=1e-12)
    assert x.tolist() == [-1.0] and xs.tolist() == [-1.0]


def test_range_density_identity_dense():
    rr = range_density_check(_identity(), S1, 1.0, 0.05, [0.0], BoxGrid.from_spacing(1, 3.0, 0.1), 0.1)
    assert rr.dense and rr.covered == 1.0 and rr.witnesses
    w = rr.witnesses[0]
    assert float(np.abs(w["xstar"] + w["ystar"] - w["w"]).max()) <= 0.1 + 1e-12


def test_range_density_single_point_sparse():
    rr = range_density_check(_point(), S1, 1.0, 0.05, [0.0], BoxGrid.from_spacing(1, 3.0, 0.1), 0.1)
    assert not rr.dense and rr.covered < 1.0
    assert rr.to_json()["misses"]


def test_range_density_validation():
    with pytest.raises(ValueError):
        range_density_check(_point(), S1, 0.0, 0.05, [0.0], BoxGrid(1, 1.0, 3), 0.1)
    with pytest.raises(ValueError):
        range_density_check(_point(), S1, 1.0, 0.05, [0.0], BoxGrid(2, 1.0, 3), 0.1)


@pytest.mark.parametrize("name", ["identity", "truncated_identity", "single_point"])
def test_equivalence_suite_small(name):
    sc = shipped_scenarios()[name]
    rep = equivalence_suite(sc["operator"], sc["space"], sc["shifts"][:2], [0.05], [1.0],
                            maximality_probes=sc["maximality_probes"], ni_probes=sc["ni_probes"],
                            dual_probes=sc["dual_probes"], hit_tol=sc["hit_tol"])
    assert rep.passed
    expect = "maximal_ni" if sc["maximal"] else "not_maximal_ni"
    assert rep.details["operator"] == expect
    assert len(rep.details["cells"]) == 2
    assert all(c["equivalent"] for c in rep.details["cells"])


def _phi_identity():
    g = BoxGrid(2, 2.0, 41)
    return fitzpatrick_table(_identity(4.0, 0.1), g)


def _br_oracle(h, x, xs, eps, lam):
    """Brute-force candidate list in the documented ranking order."""
    pi = pairing_table(h.grid, 1)
    best = None
    for i, (a, b) in enumerate(h.nodes().tolist()):
        if abs(h.values[i] - pi[i]) > 1e-9:
            continue
        rp, rd = abs(a - x), abs(b - xs)
        if rp < lam and rd < eps / lam:
            key = (max(rp / lam, rd * lam / eps), rp, i)
            if best is None or key < best[0]:
                best = (key, a, b)
    return None if best is None else (best[1], best[2])


def test_sampled_identity_equality_band():
    # the sampled operator's phi meets pi within one sample step of the diagonal
    phi = _phi_identity()
    n = phi.nodes()
    eq = np.abs(phi.values - pairing_table(phi.grid, 1)) <= 1e-9
    assert np.all(np.abs(n[eq, 0] - n[eq, 1]) <= 0.1 + 1e-12)
    assert eq[np.abs(n[:, 0] - n[:, 1]) < 1e-12].all()


def test_br_search_matches_oracle():
    phi = _phi_identity()
    p = br_search(phi, _identity(), [0.5], [0.2], 0.05, 0.2, S1, check_membership=True)
    assert (p.x[0], p.xstar[0]) == _br_oracle(phi, 0.5, 0.2, 0.05, 0.2) == (0.4, 0.3)


def test_br_search_exhausted_and_preconditions():
    coarse = fitzpatrick_table(_identity(4.0, 0.1), BoxGrid(2, 2.0, 5))
    # gap 1/4 at (1, 0); the only dual node within 1 of 0 is 0 itself
    with pytest.raises(ResolutionExhausted):
        br_search(coarse, None, [1.0], [0.0], 0.3, 0.3, S1)
    rep = br_report(coarse, None, [1.0], [0.0], 0.3, 0.3, S1)
    assert rep.verdict == "exhausted"
    phi = _phi_identity()
    with pytest.raises(PreconditionError):
        br_search(phi, None, [0.5], [-0.5], 0.1, 0.3, S1)
    with pytest.raises(ValueError):
        br_search(phi, None, [0.5], [0.5], 0.0, 0.3, S1)


@given(st.integers(-15, 15), st.integers(-15, 15), st.sampled_from([0.01, 0.05, 0.2, 0.5]))
def test_br_agrees_with_oracle(i, j, eps):
    phi = _phi_identity()
    x, xs = i / 10, j / 10
    lam = math.sqrt(eps)
    gap = float(phi.at_pair([x], [xs])) - x * xs
    if not gap < eps:
        return
    ref = _br_oracle(phi, x, xs, eps, lam)
    try:
        p = br_search(phi, None, [x], [xs], eps, lam, S1)
    except ResolutionExhausted:
        assert ref is None
        return
    assert (p.x[0], p.xstar[0]) == ref
    assert abs(p.x[0] - x) < lam and abs(p.xstar[0] - xs) < eps / lam


def test_ni_identity_origin_probe():
    # every term is -t^2, so the minimum sits at the ends of the sample
    r = ni_deficit(_identity(2.0, 0.1), [0.0], [0.0])
    assert r.deficit == pytest.approx(-4.0, abs=1e-12) and abs(r.arginf.x[0]) == 2.0
    p = _identity(2.0, 0.1).pair(7)
    assert ni_deficit(_identity(2.0, 0.1), p.xstar, p.x).deficit <= 0.0
