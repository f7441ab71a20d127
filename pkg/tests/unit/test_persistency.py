import numpy as np
import pytest

from rlsForget.errors import IndexOutOfRange, InsufficientData, SvdFailure
from rlsForget.estimator.core import DataPoint, History
from rlsForget.excitation.persistency import condition_number, pe_scan, stack_regressors, window_gram, window_sums


def test_window_gram_sums_outer_products():
    regressors = [[1.0, 0.0], [0.0, 2.0], [1.0, 1.0]]
    gram = window_gram(regressors, 0, 2)
    assert np.allclose(gram.F, [[2.0, 1.0], [1.0, 5.0]])
    assert gram.sigma[0] >= gram.sigma[1]

    gram = window_gram(regressors, 1, 1)
    assert np.allclose(gram.F, [[1.0, 1.0], [1.0, 5.0]])


def test_window_gram_rejects_out_of_range_windows():
    with pytest.raises(IndexOutOfRange):
        window_gram(np.ones((5, 2)), 3, 2)
    with pytest.raises(IndexOutOfRange):
        window_gram(np.ones((5, 2)), -1, 1)


def test_window_sums_match_direct_windows():
    rng = np.random.default_rng(0)
    regressors = rng.normal(size=(30, 2, 3))
    sums = window_sums(regressors, 4)
    assert sums.shape == (26, 3, 3)
    for j in (0, 7, 25):
        assert np.allclose(sums[j], window_gram(regressors, j, 4).F)


def test_constant_scalar_regressor_is_persistently_exciting():
    history = History([DataPoint([[1.0]], [0.0]) for _ in range(20)])
    report = pe_scan(history, 2)
    assert report.alpha_hat == pytest.approx(3.0)
    assert report.beta_hat == pytest.approx(3.0)
    assert report.is_pe
    assert report.window_count == 18
    assert report.verdict == "observed"


def test_regressor_confined_to_a_line_is_not_persistently_exciting():
    k = np.arange(200)
    regressors = np.sin(2 * np.pi * k / 100)[:, None] * np.array([1.0, 1.0])
    report = pe_scan(regressors, 10)
    assert report.beta_hat > 1.0
    assert report.alpha_hat <= 1e-12 * report.beta_hat
    assert not report.is_pe


def test_zero_tail_is_found_by_the_weakest_window():
    regressors = np.concatenate([np.eye(2)[np.arange(40) % 2], np.zeros((20, 2))])
    report = pe_scan(regressors, 3)
    assert report.alpha_hat == 0.0
    assert not report.is_pe
    assert report.weakest_window() >= 40 - 3


def test_pe_scan_needs_a_full_window():
    with pytest.raises(InsufficientData):
        pe_scan(np.ones((3, 2)), 3)


def test_condition_number():
    assert condition_number(np.diag([4.0, 1.0])) == pytest.approx(4.0)
    assert condition_number(np.diag([1.0, 0.0])) == float("inf")
    with pytest.raises(SvdFailure):
        condition_number(np.array([[np.inf, 0.0], [0.0, 1.0]]))


def test_stack_regressors_shapes():
    assert stack_regressors(np.ones((4, 3))).shape == (4, 1, 3)
    assert stack_regressors(np.ones((4, 2, 3))).shape == (4, 2, 3)
    with pytest.raises(ValueError):
        stack_regressors(np.ones(4))
