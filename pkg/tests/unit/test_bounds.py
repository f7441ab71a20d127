import math

import numpy as np
import pytest

from rlsForget.errors import DimensionMismatch, ParameterOutOfRange
from rlsForget.estimator.core import DataPoint, information_matrix, init, step_information
from rlsForget.excitation.bounds import (BoundPair, bound_converse, bound_directional_forgetting,
                                         bound_uniform_forgetting, bound_without_forgetting, check_bounds,
                                         converse_window, kappa_bound, without_forgetting_schedule)
from rlsForget.forgetting.strategies import ForgettingStrategy


def test_without_forgetting_counts_complete_windows():
    P0inv = np.eye(2)
    bound = bound_without_forgetting(6, 2, 1.0, 4.0, P0inv)
    assert np.allclose(bound.lower, 3.0 * np.eye(2))
    assert np.allclose(bound.upper, 9.0 * np.eye(2))

    bound = bound_without_forgetting(7, 2, 1.0, 4.0, P0inv)
    assert np.allclose(bound.lower, 3.0 * np.eye(2))
    assert np.allclose(bound.upper, 13.0 * np.eye(2))
    assert bound.valid_from == 7


def test_without_forgetting_needs_a_full_window():
    with pytest.raises(ParameterOutOfRange):
        bound_without_forgetting(2, 2, 1.0, 4.0, np.eye(2))
    with pytest.raises(ParameterOutOfRange):
        bound_without_forgetting(6, 2, 2.0, 1.0, np.eye(2))


def test_schedule_leaves_early_steps_unbounded():
    schedule = without_forgetting_schedule(6, 1, 1.0, 1.0, np.eye(1))
    assert schedule[:2] == [None, None]
    assert all(isinstance(b, BoundPair) for b in schedule[2:])


def test_uniform_forgetting_values():
    PNinv = np.diag([2.0, 3.0])
    bound = bound_uniform_forgetting(1, 1.0, 2.0, 0.5, PNinv)
    assert bound.lower == pytest.approx(1.0 / 3.0)
    assert np.allclose(bound.upper, (2.0 / 0.75) * np.eye(2) + PNinv)
    assert bound.valid_from == 2
    with pytest.raises(ParameterOutOfRange):
        bound_uniform_forgetting(1, 1.0, 2.0, 1.0, PNinv)


def test_uniform_forgetting_close_to_one_is_finite():
    bound = bound_uniform_forgetting(10, 1.0, 2.0, 1.0 - 1e-12, np.eye(1))
    # the lower bound tends to alpha / (N + 1) as lambda -> 1
    assert bound.lower == pytest.approx(1.0 / 11.0, rel=1e-6)


def test_converse_values():
    assert converse_window(0.5, 1.0, 2.0) == 0
    bound = bound_converse(0.5, 1.0, 2.0, 0)
    assert bound.lower == pytest.approx(0.0)
    assert bound.upper == pytest.approx(2.0)

    bound = bound_converse(0.5, 1.0, 2.0, 2)
    assert bound.lower == pytest.approx(1.0)
    assert bound.upper == pytest.approx(14.0)


def test_converse_rejects_short_windows():
    assert converse_window(0.5, 1.0, 5.0) == 3
    with pytest.raises(ParameterOutOfRange):
        bound_converse(0.5, 1.0, 5.0, 2)
    assert bound_converse(0.5, 1.0, 5.0, 3).lower == pytest.approx(0.0, abs=1e-12)


def test_directional_forgetting_has_no_upper_bound():
    bound = bound_directional_forgetting(1, 1.0, 0.5)
    assert bound.lower == pytest.approx(1.0 / 3.0)
    assert math.isinf(bound.upper)
    assert bound.kind == "directional_forgetting"


def test_kappa_bound():
    assert kappa_bound(3, 2.0, 8.0, 1.0) == pytest.approx(4.0)
    with pytest.raises(ParameterOutOfRange):
        kappa_bound(3, 2.0, 8.0, 0.9)
    value = kappa_bound(0, 1.0, 1.0, 0.5, np.eye(1))
    assert value == pytest.approx((1.0 + 0.5) / 0.5)


def test_check_bounds_counts_violations():
    matrices = [2.0 * np.eye(2), 0.5 * np.eye(2), 3.0 * np.eye(2)]
    check = check_bounds(matrices, BoundPair(kind="custom", lower=1.0, upper=2.5))
    assert check.violated_steps == [1, 2]
    assert not check.passed
    assert check.worst_margin == pytest.approx(-0.5)
    assert check.worst_step == 1
    assert check.lower_margins[0] == pytest.approx(1.0)
    assert check.upper_margins[0] == pytest.approx(0.2)
    assert "2 violations" in check.summary()


def test_check_bounds_slack_and_valid_from():
    matrices = [np.zeros((1, 1)), (1.0 - 1e-12) * np.eye(1)]
    check = check_bounds(matrices, BoundPair(kind="custom", lower=1.0, valid_from=1))
    assert check.passed
    assert np.isnan(check.lower_margins[0])
    assert check.upper_margins[1] == math.inf


def test_check_bounds_with_schedule():
    matrices = [np.eye(1), 5.0 * np.eye(1)]
    schedule = [None, BoundPair(kind="without_forgetting", lower=np.eye(1), upper=4.0 * np.eye(1))]
    check = check_bounds(matrices, schedule)
    assert check.kind == "without_forgetting"
    assert check.violated_steps == [1]
    with pytest.raises(DimensionMismatch):
        check_bounds(matrices, schedule[:1])


def test_scalar_uniform_forgetting_replay_stays_within_bounds():
    state = init([0.0], [[1.0]], ForgettingStrategy.uniform(0.9, form="information"))
    matrices = [information_matrix(state)]
    for _ in range(300):
        state, _ = step_information(state, DataPoint([[1.0]], [1.0]))
        matrices.append(information_matrix(state))
    # phi = 1 gives alpha = beta = 1 for N = 0
    bound = bound_uniform_forgetting(0, 1.0, 1.0, 0.9, matrices[0])
    check = check_bounds(matrices, bound)
    assert check.passed
    assert matrices[-1][0, 0] == pytest.approx(10.0, rel=1e-9)
