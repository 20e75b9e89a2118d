import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from fitzlab.conjugation import biconjugate, conjugate_at, flip_conjugate, legendre, swap_halves, translate
from fitzlab.numerics import BoxGrid, GridFunction, ImproperFunctionError, OffGridError


def _fn(grid, fun, primal_dim=None):
    return GridFunction.from_callable(grid, fun, primal_dim=primal_dim)


def test_half_square_is_self_conjugate_on_nodes():
    g = BoxGrid(1, 2.0, 41)
    f = _fn(g, lambda X: 0.5 * X[:, 0] ** 2)
    fs = legendre(f)
    assert np.array_equal(fs.values, f.values)
    assert fs.meta["sup_radius"] == 2.0


def test_abs_conjugate_truncated_formula():
    R = 2.0
    g = BoxGrid(1, R, 41)
    fs = legendre(_fn(g, lambda X: np.abs(X[:, 0])))
    y = g.axis
    assert np.allclose(fs.values, np.maximum(0.0, R * (np.abs(y) - 1.0)), atol=1e-14)


def test_box_indicator_conjugate_is_l1_norm():
    g = BoxGrid(2, 2.0, 21)
    f = _fn(g, lambda X: np.where(np.all(np.abs(X) <= 1 + 1e-12, axis=1), 0.0, np.inf))
    fs = legendre(f)
    assert np.allclose(fs.values, np.abs(g.nodes()).sum(axis=1), atol=1e-14)


def test_conjugate_matches_loop_oracle():
    g = BoxGrid(2, 1.0, 7)
    f = _fn(g, lambda X: X[:, 0] ** 2 + np.abs(X[:, 1] - 0.3) + 0.1 * X[:, 0] * X[:, 1])
    pts = oracles.nodes(2, 1.0, 7)
    fs = legendre(f)
    ref = [oracles.conjugate(pts, list(f.values), y) for y in pts]
    assert np.allclose(fs.values, ref, atol=1e-14)
    assert conjugate_at(f, [0.37, -0.2]) == pytest.approx(oracles.conjugate(pts, list(f.values), (0.37, -0.2)))


def test_biconjugate_is_lower_convex_hull():
    g = BoxGrid(1, 2.0, 21)
    f = _fn(g, lambda X: np.minimum((X[:, 0] - 1) ** 2, (X[:, 0] + 1) ** 2))
    fss = biconjugate(f, BoxGrid(1, 8.0, 161))
    ref = oracles.lower_hull_1d(list(g.axis), list(f.values))
    assert np.allclose(fss.values, ref, atol=1e-12)
    assert np.all(fss.values <= f.values + 1e-15)
    assert fss.at([0.0]) == pytest.approx(0.0, abs=1e-12)


def test_biconjugate_idempotent():
    g = BoxGrid(1, 2.0, 21)
    f = _fn(g, lambda X: np.cos(3 * X[:, 0]) + X[:, 0] ** 2)
    h1 = biconjugate(f)
    h2 = biconjugate(h1)
    assert np.allclose(h1.values, h2.values, atol=1e-12)


def test_order_reversal():
    g = BoxGrid(1, 2.0, 41)
    f = _fn(g, lambda X: 0.5 * X[:, 0] ** 2)
    h = _fn(g, lambda X: X[:, 0] ** 2)
    assert np.all(f.values <= h.values)
    assert np.all(legendre(h).values <= legendre(f).values)


def test_fenchel_young_everywhere():
    g = BoxGrid(1, 2.0, 41)
    f = _fn(g, lambda X: np.abs(X[:, 0]) + 0.3 * X[:, 0] ** 2)
    fs = legendre(f)
    gap = f.values[:, None] + fs.values[None, :] - np.outer(g.axis, g.axis)
    assert gap.min() >= -1e-12
    # equality exactly on subgradient pairs
    pts = oracles.nodes(1, 2.0, 41)
    ref = set(oracles.subgradient_pairs(pts, list(f.values), pts, tol=1e-12))
    eq = {((g.axis[i],), (g.axis[j],)) for i, j in zip(*np.nonzero(gap <= 1e-12))}
    assert eq == ref


def test_improper_and_bad_method():
    g = BoxGrid(1, 1.0, 5)
    with pytest.raises(ImproperFunctionError):
        legendre(GridFunction(g, np.full(5, np.inf)))
    with pytest.raises(ValueError):
        legendre(_fn(g, lambda X: X[:, 0] ** 2), method="other")


@st.composite
def convex_tables(draw):
    m = draw(st.sampled_from([5, 7, 9]))
    dim = draw(st.integers(1, 2))
    g = BoxGrid(dim, 1.0, m)
    a = draw(st.floats(0.0, 3.0))
    b = draw(st.floats(-1.0, 1.0))
    c = draw(st.floats(0.0, 2.0))
    cut = draw(st.booleans())

    def fun(X):
        v = a * (X ** 2).sum(axis=1) + b * X[:, 0] + c * np.abs(X).sum(axis=1)
        if cut:
            v = np.where(X[:, 0] <= 0.5, v, np.inf)
        return v

    return _fn(g, fun)


@given(convex_tables())
def test_fast_equals_brute_bitwise(f):
    a = legendre(f, method="fast").values
    b = legendre(f, method="brute").values
    assert np.array_equal(a, b)


@given(st.floats(-2, 2), st.floats(-2, 2))
def test_nonconvex_fast_matches_brute(p, q):
    g = BoxGrid(2, 1.0, 9)
    f = _fn(g, lambda X: np.sin(3 * X[:, 0] + p) * np.cos(2 * X[:, 1] - q))
    assert np.array_equal(legendre(f).values, legendre(f, method="brute").values)


def _pair_grid():
    return BoxGrid(2, 2.0, 21)


def test_swap_halves():
    g = _pair_grid()
    h = _fn(g, lambda x, xs: x[:, 0] + 10 * xs[:, 0], primal_dim=1)
    s = swap_halves(h)
    assert s.at_pair([0.2], [0.4]) == pytest.approx(0.4 + 10 * 0.2)


def test_flip_of_pi_indicator_on_identity_is_pairing():
    # h = pi + delta of the identity graph: J h(x, x*) = max_y (x + x*) y - y^2 = (x + x*)^2 / 4
    g = _pair_grid()
    h = _fn(g, lambda x, xs: np.where(x[:, 0] == xs[:, 0], x[:, 0] * xs[:, 0], np.inf), primal_dim=1)
    jh = flip_conjugate(h)
    n = g.nodes()
    ref = (n[:, 0] + n[:, 1]) ** 2 / 4
    # the maximiser (x + x*) / 2 may fall between nodes: error at most a quarter cell squared
    assert np.all(jh.values <= ref + 1e-12)
    assert np.all(jh.values >= ref - g.spacing ** 2 / 4 - 1e-12)


def test_flip_of_half_norm_sum_is_itself():
    g = _pair_grid()
    p = _fn(g, lambda x, xs: 0.5 * x[:, 0] ** 2 + 0.5 * xs[:, 0] ** 2, primal_dim=1)
    assert np.allclose(flip_conjugate(p).values, p.values, atol=1e-13)


def test_flip_of_bifunction_example():
    # h(x, x*) = x^2 + x*^2 / 4: h*(a, b) = a^2/4 + b^2, so J h = x^2 + x*^2 / 4 within the box
    g = BoxGrid(2, 2.0, 41)
    h = _fn(g, lambda x, xs: x[:, 0] ** 2 + 0.25 * xs[:, 0] ** 2, primal_dim=1)
    jh = flip_conjugate(h)
    n = g.nodes()
    inner = np.all(np.abs(n) <= 1.0 + 1e-12, axis=1)
    ref = n[:, 1] ** 2 / 4 + n[:, 0] ** 2
    err = ref[inner] - jh.values[inner]
    assert err.min() >= -1e-12 and err.max() <= g.spacing ** 2 / 4 + 1e-12
    assert jh.at_pair([0.4], [0.4]) == pytest.approx(0.4 ** 2 / 4 + 0.4 ** 2, abs=1e-12)


def test_translate_examples():
    g = _pair_grid()
    h = _fn(g, lambda x, xs: x[:, 0] * xs[:, 0], primal_dim=1)
    t = translate(h, [0.2], [-0.4])
    # (x + x0)(x* + x0*) - x x0* - x0 x* - x0 x0* = x x*
    fin = np.isfinite(t.values)
    assert np.allclose(t.values[fin], h.values[fin], atol=1e-12)
    assert t.at_pair([2.0], [0.0]) == math.inf
    with pytest.raises(OffGridError):
        translate(h, [0.05], [0.0])
    with pytest.raises(ValueError):
        translate(h, [0.1, 0.0], [0.0])


@given(st.integers(-4, 4), st.integers(-4, 4), st.integers(-4, 4), st.integers(-4, 4))
def test_translate_group_law(a, b, c, d):
    g = _pair_grid()
    h = _fn(g, lambda x, xs: x[:, 0] ** 2 + np.abs(xs[:, 0]) + 0.3 * x[:, 0] * xs[:, 0], primal_dim=1)
    s = g.spacing
    two = translate(translate(h, [a * s], [b * s]), [c * s], [d * s])
    one = translate(h, [(a + c) * s], [(b + d) * s])
    fin = np.isfinite(two.values)
    assert np.all(np.isfinite(one.values[fin]))
    assert np.allclose(two.values[fin], one.values[fin], atol=1e-12)


def test_translate_commutes_with_flip_for_compact_support():
    g = BoxGrid(2, 2.0, 41)
    h = _fn(g, lambda x, xs: np.where((np.abs(x[:, 0]) <= 0.5) & (np.abs(xs[:, 0]) <= 0.5),
                                      x[:, 0] ** 2 + xs[:, 0] ** 2 + 0.5 * x[:, 0] * xs[:, 0], np.inf),
            primal_dim=1)
    x0, x0s = [0.3], [-0.2]
    lhs = flip_conjugate(translate(h, x0, x0s))
    rhs = translate(flip_conjugate(h), x0, x0s)
    n = g.nodes()
    inner = np.all(np.abs(n) <= 1.0 + 1e-12, axis=1)
    assert np.allclose(lhs.values[inner], rhs.values[inner], atol=1e-12)
    assert np.isfinite(lhs.values[inner]).all()
