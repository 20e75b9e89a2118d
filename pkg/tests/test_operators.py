import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from fitzlab.numerics import BoxGrid, GridFunction
from fitzlab.operators import (
    NotMonotoneError,
    OperatorGraph,
    build_linear,
    build_rotation,
    build_subdifferential,
    graph_resolution,
    is_monotone,
    maximality_probe,
    monotonically_related,
)
from fitzlab.spaces import DualityPair, SpaceSpec

S1 = SpaceSpec(1)
S2 = SpaceSpec(2)


def _pairs(T):
    return sorted((tuple(x), tuple(y)) for x, y in zip(T.xs.tolist(), T.xstars.tolist()))


def test_graph_validation():
    with pytest.raises(ValueError):
        OperatorGraph.from_pairs(S1, [])
    with pytest.raises(ValueError):
        OperatorGraph.from_pairs(S1, [([0.0], [0.0]), ([0.0], [0.0])])
    with pytest.raises(ValueError):
        OperatorGraph.from_pairs(S1, [([np.nan], [0.0])])


def test_graph_json_roundtrip():
    T = OperatorGraph.from_pairs(S2, [([0, 1], [1, 0]), ([1, 1], [2, 0])])
    U = OperatorGraph.from_json(T.to_json())
    assert _pairs(U) == _pairs(T) and U.space == T.space


def test_monotone_identity_and_negation():
    g = BoxGrid(1, 1.0, 5)
    ok, w = is_monotone(build_linear([[1.0]], S1, g))
    assert ok and w is None
    neg = OperatorGraph.from_pairs(S1, [([0.0], [0.0]), ([1.0], [-1.0])])
    ok, w = is_monotone(neg)
    assert not ok and w.product == -1.0
    with pytest.raises(NotMonotoneError):
        build_linear([[-1.0]], S1, g)


def test_rotation_is_monotone_with_zero_products():
    T = build_rotation(S2, BoxGrid(2, 1.0, 5))
    ok, _ = is_monotone(T, tol=0.0)
    assert ok
    d = T.xs[:, None, :] - T.xs[None, :, :]
    ds = T.xstars[:, None, :] - T.xstars[None, :, :]
    assert np.abs((d * ds).sum(axis=2)).max() == 0.0


@given(st.lists(st.tuples(st.integers(-4, 4), st.integers(-4, 4)), min_size=1, max_size=8, unique_by=lambda t: t[0]))
def test_monotone_matches_pairwise_oracle(pts):
    pairs = [([a / 2], [b / 2]) for a, b in pts]
    T = OperatorGraph.from_pairs(S1, pairs)
    expect = all((x[0] - y[0]) * (xs[0] - ys[0]) >= 0 for x, xs in pairs for y, ys in pairs)
    assert is_monotone(T, tol=0.0)[0] == expect


def test_monotonically_related_examples():
    T = build_linear([[1.0]], S1, BoxGrid(1, 2.0, 41))
    assert not monotonically_related(T, ([0.0], [1.0]))
    assert monotonically_related(T, DualityPair([0.5], [0.5]))
    assert monotonically_related(T, ([1.0], [1.0]))
    assert not monotonically_related(T, ([1.0], [3.0]))


def test_subdifferential_abs_matches_oracle():
    g = BoxGrid(1, 2.0, 21)
    f = GridFunction.from_callable(g, lambda X: np.abs(X[:, 0]))
    T = build_subdifferential(f, S1, g)
    pts = oracles.nodes(1, 2.0, 21)
    ref = oracles.subgradient_pairs(pts, [abs(p[0]) for p in pts], pts)
    assert _pairs(T) == sorted(ref)
    at0 = sorted(y[0] for x, y in _pairs(T) if x == (0.0,))
    assert at0[0] == -1.0 and at0[-1] == 1.0 and len(at0) == 11
    assert all(y == (1.0,) for x, y in _pairs(T) if 0 < x[0] < 2)
    # at the table edge the truncated function admits every steeper slope
    assert sorted(y[0] for x, y in _pairs(T) if x == (2.0,)) == [1.0, 1.2, 1.4, 1.6, 1.8, 2.0]


def test_subdifferential_box_indicator_is_normal_cone():
    g = BoxGrid(1, 2.0, 21)
    f = GridFunction.from_callable(g, lambda X: np.where(np.abs(X[:, 0]) <= 1 + 1e-12, 0.0, np.inf))
    T = build_subdifferential(f, S1, BoxGrid(1, 3.0, 31))
    pts = oracles.nodes(1, 2.0, 21)
    ref = oracles.subgradient_pairs(pts, list(f.values), oracles.nodes(1, 3.0, 31))
    assert _pairs(T) == sorted(ref)
    for (x,), (y,) in _pairs(T):
        assert -1 <= x <= 1
        if -1 < x < 1:
            assert y == 0.0
        elif x == 1:
            assert y >= 0
        else:
            assert y <= 0


def test_maximality_identity_no_extension():
    T = build_linear([[1.0]], S1, BoxGrid.from_spacing(1, 2.5, 0.1))
    ext, tol = maximality_probe(T, BoxGrid.from_spacing(2, 2.0, 0.1))
    assert ext == [] and tol == pytest.approx(0.15)


def test_maximality_truncated_identity_extends():
    T = build_linear([[1.0]], S1, BoxGrid.from_spacing(1, 2.5, 0.1)).restrict([0.0], [1.0])
    ext, _ = maximality_probe(T, BoxGrid.from_spacing(2, 2.0, 0.1))
    assert ext
    for p in ext:
        assert monotonically_related(T, p)
        assert np.min(np.max(np.abs(np.hstack([T.xs, T.xstars]) - np.r_[p.x, p.xstar]), axis=1)) > 0.15
    assert any(p.x[0] > 1.2 for p in ext) and any(p.x[0] < -0.2 for p in ext)


def test_maximality_single_point_extends():
    T = OperatorGraph.from_pairs(S1, [([0.0], [0.0])])
    ext, _ = maximality_probe(T, BoxGrid(2, 1.0, 3), tol=0.0)
    got = sorted((p.x[0], p.xstar[0]) for p in ext)
    assert (1.0, 1.0) in got and (1.0, -1.0) not in got


def test_graph_resolution_and_transforms():
    T = build_linear([[1.0]], S1, BoxGrid(1, 1.0, 5))
    assert graph_resolution(T) == 0.5
    R = T.restrict([0.0], [1.0])
    assert R.xs[:, 0].tolist() == [0.0, 0.5, 1.0]
    U = T.shifted([1.0], [2.0])
    assert U.xstars[:, 0].tolist() == (T.xstars[:, 0] + 2).tolist()
    assert T.scaled(2.0).xstars[:, 0].tolist() == (2 * T.xstars[:, 0]).tolist()
    with pytest.raises(ValueError):
        maximality_probe(T, BoxGrid(1, 1.0, 3))
