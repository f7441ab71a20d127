import numpy as np
import pytest

from rlsForget.errors import InsufficientData
from rlsForget.estimator.core import DataPoint, History, TraceRecord
from rlsForget.scenarios.analysis import (error_norms, freeze_ratio, loglog_slope, max_abs_z, offspan_residuals,
                                          regressor_span, rich_counts, semilog_slope, sigma_max_series)


def test_loglog_slope_of_harmonic_decay():
    k = np.arange(1, 1001)
    assert loglog_slope(k, 3.0 / k, 10, 1000) == pytest.approx(-1.0)
    assert loglog_slope(k, k ** -0.5, 0, 1000) == pytest.approx(-0.5)


def test_semilog_slope_of_geometric_decay():
    k = np.arange(500)
    assert semilog_slope(k, 2.0 * 0.99 ** k, 0, 499) == pytest.approx(np.log(0.99))


def test_slopes_skip_non_positive_samples():
    k = np.arange(1, 11)
    values = 1.0 / k
    values[3] = 0.0
    assert loglog_slope(k, values, 1, 10) == pytest.approx(-1.0)
    with pytest.raises(InsufficientData):
        semilog_slope(k, np.zeros(10), 0, 10)


def test_freeze_ratio():
    assert freeze_ratio([1.0, 2.0, 2.0, 2.0]) == pytest.approx(1.0)
    assert freeze_ratio([1.0, 2.0, 3.0, 4.0]) == pytest.approx(2.0)
    with pytest.raises(InsufficientData):
        freeze_ratio([1.0])


def test_offspan_residuals_of_a_line():
    history = History([DataPoint([[s, s]], [0.0]) for s in (1.0, -2.0, 0.5)])
    basis = regressor_span(history)
    assert basis.shape == (2, 1)
    residuals = offspan_residuals([[1.0, 1.0], [1.0, -1.0]], basis)
    assert residuals[0] == pytest.approx(0.0, abs=1e-15)
    assert residuals[1] == pytest.approx(np.sqrt(2.0))


def test_trace_series():
    traces = [TraceRecord(k=k, z=np.array([2.0 ** -k, -1.0]), theta=np.zeros(2), sigma_P=np.array([k + 1.0, 0.5]),
                          kappa_P=2.0 * (k + 1.0), theta_err_norm=1.0 / (k + 1), rich_count=None if k == 0 else 2)
              for k in range(4)]
    k, err = error_norms(traces)
    assert k.tolist() == [1.0, 2.0, 3.0, 4.0]
    assert err.tolist() == pytest.approx([1.0, 0.5, 1.0 / 3.0, 0.25])
    assert sigma_max_series(traces).tolist() == [1.0, 2.0, 3.0, 4.0]
    assert max_abs_z(traces, 2) == 1.0
    assert rich_counts(traces).tolist() == [-1, 2, 2, 2]


def test_error_norms_without_truth():
    traces = [TraceRecord(k=0, z=np.zeros(1), theta=np.zeros(1), sigma_P=np.ones(1), kappa_P=1.0)]
    k, err = error_norms(traces)
    assert k.size == 0 and err.size == 0
