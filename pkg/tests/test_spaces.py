import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fptrace.errors import RangeViolation
from fptrace.spaces import (ParamSpace, StateSpace, estimate_lipschitz,
                            eval_map, grid_space_2d, interval_space)

from conftest import make_map


def test_interval_space_basic():
    sx = interval_space(0.0, 1.0, 5)
    assert sx.size == 5
    assert sx.dim == 1
    assert sx.diameter == pytest.approx(1.0)


def test_param_space_rejects_disconnected_sample():
    pts = np.array([[0.0], [1.0]])
    with pytest.raises(ValueError, match="disconnected"):
        ParamSpace(points=pts, connectivity_radius=0.5)


def test_param_space_custom_metric():
    pts = np.array([[0.0], [1.0], [2.0]])
    sx = ParamSpace(points=pts, connectivity_radius=1.0,
                    metric=lambda a, b: abs(float(a[0]) - float(b[0])))
    assert sx.distance(pts[0], pts[2]) == pytest.approx(2.0)
    assert sx.diameter == pytest.approx(2.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 24), st.integers(0, 24), st.integers(0, 24))
def test_metric_axioms_on_sampled_triples(i, j, k):
    sx = grid_space_2d(0.0, 1.0, 5)
    p, q, r = sx.points[i], sx.points[j], sx.points[k]
    assert sx.distance(p, p) == 0.0
    assert sx.distance(p, q) == pytest.approx(sx.distance(q, p))
    assert sx.distance(p, q) <= sx.distance(p, r) + sx.distance(r, q) + 1e-12


def test_state_space_validation():
    with pytest.raises(ValueError):
        StateSpace(lower=np.array([0.0]), upper=np.array([0.0]))
    box = StateSpace(lower=np.array([0.0, -1.0]), upper=np.array([1.0, 1.0]))
    assert box.dims == 2
    assert box.contains(np.array([0.5, 0.0]))
    assert not box.contains(np.array([0.5, 1.5]))


def test_eval_map_constant(constant_map):
    out = eval_map(constant_map, np.array([0.3]), np.array([0.9]))
    assert out == pytest.approx([0.5])


def test_eval_map_identity(identity_map):
    out = eval_map(identity_map, np.array([0.7]), np.array([0.2]))
    assert out == pytest.approx([0.2])


def test_eval_map_averaging(averaging_map):
    out = eval_map(averaging_map, np.array([0.4]), np.array([0.8]))
    assert out == pytest.approx([0.6])


def test_eval_map_counts_and_does_not_mutate(averaging_map):
    y = np.array([0.8])
    before = averaging_map.eval_count
    eval_map(averaging_map, np.array([0.4]), y)
    eval_map(averaging_map, np.array([0.4]), y)
    assert averaging_map.eval_count == before + 2
    assert y == pytest.approx([0.8])


def test_eval_map_range_violation(unit_interval_x, unit_box_y):
    bad = make_map(lambda x, ys: ys + 2.0, unit_interval_x, unit_box_y)
    with pytest.raises(RangeViolation):
        eval_map(bad, np.array([0.0]), np.array([0.5]))


def test_lipschitz_constant_map(constant_map):
    assert estimate_lipschitz(constant_map, 200, seed=1) == 0.0
    assert constant_map.lipschitz_estimate == 0.0


def test_lipschitz_averaging(unit_box_y):
    sx = interval_space(0.0, 1.0, 129)
    m = make_map(lambda x, ys: (float(x[0]) + ys) / 2.0, sx, unit_box_y)
    est = estimate_lipschitz(m, 10_000, seed=2)
    assert 0.49 <= est <= 0.51


def test_lipschitz_identity(unit_box_y):
    sx = interval_space(0.0, 1.0, 129)
    m = make_map(lambda x, ys: ys.copy(), sx, unit_box_y)
    est = estimate_lipschitz(m, 10_000, seed=3)
    assert 0.99 <= est <= 1.0


def test_lipschitz_deterministic(averaging_map):
    a = estimate_lipschitz(averaging_map, 500, seed=7)
    b = estimate_lipschitz(averaging_map, 500, seed=7)
    assert a == b
