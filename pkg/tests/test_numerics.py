import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fitzlab.numerics import (
    BoxGrid,
    ExtReal,
    GridFunction,
    ImproperFunctionError,
    OffGridError,
    decode_ext,
    encode_ext,
    grid_nodes,
    min_over_grid,
)


def test_grid_nodes_one_axis():
    assert grid_nodes(BoxGrid(1, 1.0, 3))[:, 0].tolist() == [-1.0, 0.0, 1.0]


def test_grid_nodes_row_major_2d():
    n = grid_nodes(BoxGrid(2, 1.0, 3))
    assert n.shape == (9, 2)
    assert n[0].tolist() == [-1.0, -1.0]
    assert n[1].tolist() == [-1.0, 0.0]
    assert n[-1].tolist() == [1.0, 1.0]


def test_spacing():
    assert BoxGrid(1, 2.0, 5).spacing == 1.0


def test_axis_contains_origin_and_ends_exactly():
    for r, m in [(2.0, 201), (2.5, 51), (1.0, 7), (3.0, 61)]:
        a = BoxGrid(1, r, m).axis
        assert a[0] == -r and a[-1] == r and a[(m - 1) // 2] == 0.0
        assert np.array_equal(a, -a[::-1])


@pytest.mark.parametrize("m", [2, 4, 1])
def test_grid_rejects_even_or_tiny(m):
    with pytest.raises(ValueError):
        BoxGrid(1, 1.0, m)


def test_grid_rejects_bad_radius_and_dim():
    with pytest.raises(ValueError):
        BoxGrid(1, 0.0, 3)
    with pytest.raises(ValueError):
        BoxGrid(0, 1.0, 3)


def test_from_spacing():
    g = BoxGrid.from_spacing(1, 2.5, 0.1)
    assert g.m == 51
    with pytest.raises(ValueError):
        BoxGrid.from_spacing(1, 1.0, 0.3)


def test_index_and_offsets():
    g = BoxGrid(2, 1.0, 5)
    assert g.index_of([-1, -1]) == 0
    assert g.index_of([0.5, 0.0]) == 3 * 5 + 2
    assert g.index_of([0.3, 0.0]) is None
    assert g.index_of([1.5, 0.0]) is None
    assert g.offset_of([0.5, -1.0]).tolist() == [1, -2]
    with pytest.raises(OffGridError):
        g.offset_of([0.25, 0.0])


def test_min_over_grid_parabola():
    g = BoxGrid(1, 1.0, 3)
    r = min_over_grid(GridFunction.from_callable(g, lambda X: X[:, 0] ** 2))
    assert r.value == 0.0 and r.index == 1 and r.node.tolist() == [0.0]


def test_min_over_grid_single_finite():
    g = BoxGrid(1, 1.0, 3)
    r = min_over_grid(GridFunction(g, [math.inf, math.inf, 5.0]))
    assert r.value == 5.0 and r.index == 2 and r.node.tolist() == [1.0]


def test_min_over_grid_nearest_node():
    g = BoxGrid(1, 1.0, 3)
    r = min_over_grid(GridFunction.from_callable(g, lambda X: np.abs(X[:, 0] - 0.4)))
    assert r.value == pytest.approx(0.4) and r.index == 1


def test_min_over_grid_tie_break_lowest_index():
    g = BoxGrid(1, 1.0, 5)
    r = min_over_grid(GridFunction(g, [3.0, 1.0, 2.0, 1.0, 1.0]))
    assert r.index == 1


def test_improper_rejected():
    g = BoxGrid(1, 1.0, 3)
    with pytest.raises(ImproperFunctionError):
        GridFunction(g, [math.inf] * 3)


def test_negative_infinity_and_nan_rejected():
    g = BoxGrid(1, 1.0, 3)
    with pytest.raises(ValueError):
        GridFunction(g, [0.0, -math.inf, 1.0])
    with pytest.raises(ValueError):
        GridFunction(g, [0.0, math.nan, 1.0])
    with pytest.raises(ValueError):
        ExtReal(-math.inf)


def test_value_count_checked():
    with pytest.raises(ValueError):
        GridFunction(BoxGrid(1, 1.0, 3), [0.0, 1.0])


def test_extreal_arithmetic():
    assert ExtReal(1.0) + ExtReal(2.0) == 3.0
    assert (ExtReal(1.0) + ExtReal("inf")) == math.inf
    assert not (ExtReal(1.0) + math.inf).is_finite
    assert ExtReal("inf").to_json() == "inf"
    assert encode_ext(2.5) == 2.5 and decode_ext("inf") == math.inf


def test_gridfunction_json_roundtrip():
    g = BoxGrid(2, 1.0, 3)
    vals = np.arange(9.0)
    vals[4] = math.inf
    f = GridFunction(g, vals, primal_dim=1)
    obj = json.loads(json.dumps(f.to_json()))
    assert obj["grid"] == {"dim": 2, "radius": 1.0, "m": 3}
    assert obj["values"][4] == "inf"
    back = GridFunction.from_json(obj)
    assert np.array_equal(back.values, f.values) and back.primal_dim == 1


def test_values_are_read_only():
    f = GridFunction(BoxGrid(1, 1.0, 3), [0.0, 1.0, 2.0])
    with pytest.raises(ValueError):
        f.values[0] = 5.0


def test_at_pair_and_off_grid():
    g = BoxGrid(2, 1.0, 3)
    f = GridFunction.from_callable(g, lambda x, xs: x[:, 0] + 10 * xs[:, 0], primal_dim=1)
    assert f.at_pair([1.0], [-1.0]) == -9.0
    with pytest.raises(OffGridError):
        f.at([0.5, 0.0])


tables = st.lists(
    st.one_of(st.floats(-1e6, 1e6, allow_nan=False), st.just(math.inf)), min_size=9, max_size=9
).filter(lambda v: any(math.isfinite(x) for x in v))


@given(tables)
def test_min_is_below_every_value(vals):
    f = GridFunction(BoxGrid(2, 1.0, 3), vals)
    r = min_over_grid(f)
    assert all(r.value <= v for v in vals)
    assert vals[r.index] == r.value
    assert all(v > r.value for v in vals[: r.index])


@given(st.integers(1, 3), st.sampled_from([3, 5, 7]))
def test_enumeration_is_stable(dim, m):
    g = BoxGrid(dim, 1.5, m)
    a = grid_nodes(g).copy()
    grid_nodes.cache_clear()
    b = grid_nodes(BoxGrid(dim, 1.5, m))
    assert a.tobytes() == b.tobytes()
    assert [tuple(r) for r in a] == sorted(tuple(r) for r in a)
