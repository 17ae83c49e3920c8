import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relevo import PredictionSet, build_relevance, uniform_relevance
from relevo.metrics import (
    exact_area,
    ser,
    ser_from_relevance,
    sera,
    sera_all,
    sera_exact,
    sse,
    t_grid,
    trapezoid_area,
)
from oracles import sera_exact_bruteforce, sera_trapezoid_bruteforce, ser_bruteforce

Y3 = [1.0, 2.0, 10.0]
P3 = [1.5, 3.0, 8.0]


@pytest.fixture
def three_point():
    # phi(1) = 0, phi(2) = 0.5, phi(10) = 1 at the true targets
    return build_relevance([(1, 0, 0), (2, 0.5, 0), (10, 1, 0)])


def assert_non_increasing(curve):
    assert np.all(np.diff(curve.ser_values) <= 0)


def test_ser_examples(three_point):
    assert ser(0.0, P3, Y3, three_point) == 5.25
    assert ser(0.25, P3, Y3, three_point) == 5.0
    assert ser(0.75, P3, Y3, three_point) == 4.0
    assert ser(1.0, P3, Y3, build_relevance([(0, 0, 0), (100, 1, 0)])) == 0.0
    # oracle agreement
    for t in (0.0, 0.25, 0.5, 0.75, 1.0):
        assert ser(t, P3, Y3, three_point) == ser_bruteforce(t, [0.25, 1.0, 4.0], [0.0, 0.5, 1.0])


def test_ser_uses_true_target_relevance(three_point):
    # a prediction landing in the relevant region must not pull the point in
    assert ser(0.9, [10.0, 2.0, 10.0], Y3, three_point) == 0.0


def test_length_mismatch(three_point):
    with pytest.raises(ValueError, match="length mismatch"):
        ser(0.0, [1.0, 2.0], Y3, three_point)
    with pytest.raises(ValueError):
        sera([1.0, np.nan, 2.0], Y3, three_point)


def test_uniform_relevance_equals_sse():
    c = sera(P3, Y3, uniform_relevance())
    assert abs(c.area - 5.25) <= 1e-12
    assert_non_increasing(c)


def test_exact_piecewise_fixture(three_point):
    exact = 5.0 * 0.5 + 4.0 * 0.5
    assert sera_exact_bruteforce([0.25, 1.0, 4.0], [0.0, 0.5, 1.0]) == exact
    assert abs(sera_exact(P3, Y3, three_point) - exact) <= 1e-12
    c = sera(P3, Y3, three_point, step=1e-3)
    assert abs(c.area - exact) / exact <= 0.006
    assert_non_increasing(c)


def test_zero_error():
    y = np.linspace(0, 10, 50)
    assert sera(y, y, build_relevance([(0, 0, 0), (10, 1, 0)])).area == 0.0


def test_grid_shape():
    g = t_grid(0.001)
    assert g[0] == 0.0 and g[-1] == 1.0 and g.size == 1001
    g = t_grid(0.3)
    assert list(g) == pytest.approx([0.0, 0.3, 0.6, 0.9, 1.0])
    for bad in (0.0, -0.1, 0.6):
        with pytest.raises(ValueError):
            t_grid(bad)


def test_curve_area_bounded(three_point):
    c = sera(P3, Y3, three_point)
    assert 0 <= c.area <= c.ser_values[0]


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 50), st.integers(0, 2**31), st.sampled_from([0.1, 0.05, 0.02]))
def test_trapezoid_on_grid_nodes_equals_exact_plus_half_step(n, seed, step):
    # with relevance values on grid nodes the trapezoid differs from the
    # exact step-function integral by half a step times SSE over phi < 1
    rng = np.random.default_rng(seed)
    grid = t_grid(step)
    phi = grid[rng.integers(0, grid.size, n)]
    e2 = rng.exponential(size=n)
    trap = trapezoid_area(grid, ser_from_relevance(phi, e2, grid))
    exact = exact_area(phi, e2)
    assert exact == pytest.approx(sera_exact_bruteforce(list(e2), list(phi)), rel=1e-12, abs=1e-12)
    assert trap == pytest.approx(sera_trapezoid_bruteforce(list(e2), list(phi), step), rel=1e-12, abs=1e-12)
    assert trap == pytest.approx(exact + step / 2 * e2[phi < 1].sum(), rel=1e-12, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31))
def test_grid_refinement(seed):
    rng = np.random.default_rng(seed)
    y = rng.lognormal(2, 0.7, 150)
    pred = y + rng.normal(0, 3, 150)
    f = build_relevance([(np.median(y), 0, 0), (np.quantile(y, 0.9), 1, 0)])
    coarse = sera(pred, y, f, 1e-3).area
    fine = sera(pred, y, f, 5e-4).area
    assert abs(coarse - fine) <= 0.005 * fine


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.floats(0.1, 10))
def test_scale_covariance(seed, c):
    rng = np.random.default_rng(seed)
    y = rng.normal(50, 20, 80)
    err = rng.normal(0, 5, 80)
    f = build_relevance([(40, 0, 0), (80, 1, 0)])
    a = sera(y + err, y, f).area
    b = sera(y + c * err, y, f).area
    assert b == pytest.approx(c * c * a, rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31))
def test_monotone_curves(seed):
    rng = np.random.default_rng(seed)
    y = rng.normal(0, 1, 40)
    f = build_relevance([(0, 0, None), (1, 0.3, None), (2, 1, None)])
    assert_non_increasing(sera(y + rng.normal(size=40), y, f, 0.01))


def test_sera_all_ordering_and_dominance(three_point):
    preds = PredictionSet(Y3, {"B": [1.6, 3.5, 7.0], "A": P3})
    out = sera_all(preds, three_point)
    assert list(out) == ["A", "B"]
    assert out["A"].area < out["B"].area
    single = sera_all(PredictionSet(Y3, {"A": P3}), three_point)
    assert single["A"].area == sera(P3, Y3, three_point).area


def test_prediction_set_validation():
    with pytest.raises(ValueError):
        PredictionSet([1.0, 2.0], {"A": [1.0]})
    with pytest.raises(ValueError):
        PredictionSet([1.0, 2.0], {})
    with pytest.raises(ValueError, match="'m'"):
        PredictionSet([1.0, 2.0], {"m": [1.0, np.inf]})


def test_sse():
    assert sse(P3, Y3) == 5.25
