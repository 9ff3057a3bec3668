import numpy as np
import pytest

from fptrace.spaces import ParametricMap, StateSpace, interval_space

# nodeid -> (criterion number, label) for the acceptance verdict lines
_acceptance_items: dict = {}


def pytest_collection_modifyitems(items):
    for item in items:
        tag = getattr(getattr(item, "function", None), "_acceptance", None)
        if tag is not None:
            _acceptance_items[item.nodeid] = tag


def pytest_runtest_logreport(report):
    """One PASS/FAIL line per acceptance criterion, outside output capture."""
    tag = _acceptance_items.get(report.nodeid)
    if tag is None or report.when != "call":
        return
    num, label = tag
    verdict = "PASS" if report.passed else "FAIL"
    print(f"\nACCEPTANCE {num} ({label}): {verdict}")


def make_map(core, space_x, space_y, vectorized=True):
    """Wrap a batch core(x, (k, m)) -> (k, m) as a ParametricMap."""

    def evaluator(x, y):
        y = np.asarray(y, float)
        out = np.asarray(core(np.atleast_1d(x), np.atleast_2d(y)), float)
        return out.reshape(np.shape(y))

    return ParametricMap(evaluator=evaluator, space_x=space_x, space_y=space_y,
                         vectorized=vectorized)


@pytest.fixture
def unit_interval_x():
    return interval_space(0.0, 1.0, 5)


@pytest.fixture
def unit_box_y():
    return StateSpace(lower=np.array([0.0]), upper=np.array([1.0]))


@pytest.fixture
def averaging_map(unit_interval_x, unit_box_y):
    """f(x, y) = (x + y) / 2 on X = Y = [0, 1]."""
    return make_map(lambda x, ys: (float(x[0]) + ys) / 2.0,
                    unit_interval_x, unit_box_y)


@pytest.fixture
def identity_map(unit_interval_x, unit_box_y):
    return make_map(lambda x, ys: ys.copy(), unit_interval_x, unit_box_y)


@pytest.fixture
def constant_map(unit_interval_x, unit_box_y):
    return make_map(lambda x, ys: np.full_like(ys, 0.5),
                    unit_interval_x, unit_box_y)
