"""Summaries computed from finished runs: slope fits, subspace residuals, freezing of P_k."""
import logging

import numpy as np
from scipy.linalg import orth

from rlsForget.errors import InsufficientData
from rlsForget.estimator.core import History, TraceRecord


logger = logging.getLogger(__name__)


def _fit_window(k: np.ndarray, values: np.ndarray, k_min: int, k_max: int):
    k = np.asarray(k, dtype=float)
    values = np.asarray(values, dtype=float)
    mask = (k >= k_min) & (k <= k_max) & np.isfinite(values) & (values > 0)
    if np.count_nonzero(mask) < 2:
        logger.error(f"Fewer than two positive samples in [{k_min}, {k_max}]")
        raise InsufficientData(f"need at least two positive samples in [{k_min}, {k_max}]")
    return k[mask], values[mask]


def loglog_slope(k, values, k_min: int, k_max: int) -> float:
    """Least-squares slope of log(values) against log(k) over k_min <= k <= k_max."""
    k, values = _fit_window(k, values, max(k_min, 1), k_max)
    return float(np.polyfit(np.log(k), np.log(values), 1)[0])


def semilog_slope(k, values, k_min: int, k_max: int) -> float:
    """Least-squares slope of log(values) against k; compare with log(lam) for geometric decay."""
    k, values = _fit_window(k, values, k_min, k_max)
    return float(np.polyfit(k, np.log(values), 1)[0])


def error_norms(traces: list[TraceRecord]) -> tuple[np.ndarray, np.ndarray]:
    """(k + 1, |theta_{k+1} - theta|) for every trace row carrying the error norm."""
    rows = [(t.k + 1, t.theta_err_norm) for t in traces if t.theta_err_norm is not None]
    if not rows:
        return np.array([]), np.array([])
    k, err = zip(*rows)
    return np.asarray(k, dtype=float), np.asarray(err, dtype=float)


def sigma_max_series(traces: list[TraceRecord]) -> np.ndarray:
    return np.array([t.sigma_P[0] for t in traces])


def max_abs_z(traces: list[TraceRecord], last: int) -> float:
    """Largest |z_k| entry over the final ``last`` rows."""
    tail = traces[-last:]
    return float(max(np.max(np.abs(t.z)) for t in tail))


def freeze_ratio(values) -> float:
    """max over the second half divided by max over the first half; <= 1 when growth has stopped."""
    values = np.asarray(values, dtype=float)
    half = values.size // 2
    if half == 0:
        raise InsufficientData("need at least two samples")
    return float(values[half:].max() / values[:half].max())


def regressor_span(history: History) -> np.ndarray:
    """Orthonormal basis of the span of every regressor row seen so far."""
    rows = history.phis().reshape(-1, history.shape[1])
    return orth(rows.T)


def offspan_residuals(thetas, basis: np.ndarray) -> np.ndarray:
    """|(I - Q Q') theta_k| for every estimate, Q an orthonormal basis."""
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    projected = thetas @ basis @ basis.T
    return np.linalg.norm(thetas - projected, axis=1)


def rich_counts(traces: list[TraceRecord]) -> np.ndarray:
    return np.array([-1 if t.rich_count is None else t.rich_count for t in traces])
