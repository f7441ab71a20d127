import logging
from dataclasses import dataclass

import numpy as np

from rlsForget.errors import IndexOutOfRange, InsufficientData, SvdFailure
from rlsForget.estimator.core import History


logger = logging.getLogger(__name__)

DEFAULT_PE_TOL = 1e-12


@dataclass(frozen=True)
class WindowGram:
    j: int
    N: int
    F: np.ndarray
    sigma: np.ndarray


@dataclass(frozen=True)
class PEReport:
    """
    Result of scanning every complete window F_{j,j+N} of a finite regressor record.

    ``window_sigma`` holds the descending singular values of each window's Gram
    matrix, one row per start index j. The verdict only covers the windows that
    were available, hence ``verdict = "observed"``.
    """
    N: int
    alpha_hat: float
    beta_hat: float
    is_pe: bool
    tol: float
    window_sigma: np.ndarray
    verdict: str = "observed"

    @property
    def window_count(self) -> int:
        return self.window_sigma.shape[0]

    def weakest_window(self) -> int:
        return int(np.argmin(self.window_sigma[:, -1]))


def stack_regressors(regressors) -> np.ndarray:
    """Regressors as an array of shape (K, p, n); accepts a History, a list of matrices or an array."""
    if isinstance(regressors, History):
        return regressors.phis()
    arr = np.asarray(regressors, dtype=float)
    if arr.ndim == 2:
        arr = arr[:, None, :]
    if arr.ndim != 3:
        logger.error(f"Regressors must stack to (K, p, n), got shape {arr.shape}")
        raise ValueError(f"regressors must stack to (K, p, n), got shape {arr.shape}")
    return arr


def window_gram(regressors, j: int, N: int) -> WindowGram:
    """F_{j,j+N} = sum_{i=j}^{j+N} phi_i' phi_i with its singular values."""
    phis = stack_regressors(regressors)
    if j < 0 or N < 0 or j + N >= phis.shape[0]:
        logger.error(f"Window j={j}, N={N} outside {phis.shape[0]} regressors")
        raise IndexOutOfRange(f"window [{j}, {j + N}] outside 0..{phis.shape[0] - 1}")
    block = phis[j:j + N + 1]
    F = np.einsum("ipn,ipm->nm", block, block)
    return WindowGram(j=j, N=N, F=F, sigma=_singular_values(F))


def window_sums(regressors, N: int) -> np.ndarray:
    """All complete window Gram matrices F_{j,j+N}, j = 0..K-N-1, summed directly per window; shape (J, n, n)."""
    phis = stack_regressors(regressors)
    if N < 0 or phis.shape[0] < N + 1:
        logger.error(f"Need at least N+1={N + 1} regressors, got {phis.shape[0]}")
        raise InsufficientData(f"need at least {N + 1} regressors for N={N}, got {phis.shape[0]}")
    outer = np.einsum("ipn,ipm->inm", phis, phis)
    return np.lib.stride_tricks.sliding_window_view(outer, N + 1, axis=0).sum(axis=-1)


def pe_scan(regressors, N: int, tol: float = DEFAULT_PE_TOL) -> PEReport:
    """
    Persistency-of-excitation scan over all complete windows of length N+1.

    Parameters
    ----------
    regressors : History | list | np.ndarray
        Regressors phi_0 .. phi_{K-1}
    N : int
        Window length parameter; each window holds N+1 regressors
    tol : float
        The record counts as persistently exciting when alpha_hat > tol * beta_hat

    Returns
    -------
    PEReport
        alpha_hat = min over windows of sigma_min(F), beta_hat = max of sigma_max(F)

    Raises
    ------
    InsufficientData: fewer than N+1 regressors
    """
    phis = stack_regressors(regressors)
    count = phis.shape[0]
    logger.info(f"Scanning {count} regressors for persistent excitation with N={N}")
    if N < 0 or count < N + 1:
        logger.error(f"Need at least N+1={N + 1} regressors, got {count}")
        raise InsufficientData(f"need at least {N + 1} regressors for N={N}, got {count}")

    sigma = _singular_values(window_sums(phis, N))

    alpha_hat = float(sigma[:, -1].min())
    beta_hat = float(sigma[:, 0].max())
    is_pe = beta_hat > 0.0 and alpha_hat > tol * beta_hat
    logger.debug(f"N={N}: alpha_hat={alpha_hat:.3e}, beta_hat={beta_hat:.3e}, is_pe={is_pe}")
    return PEReport(N=N, alpha_hat=alpha_hat, beta_hat=beta_hat, is_pe=is_pe, tol=tol, window_sigma=sigma)


def condition_number(P: np.ndarray) -> float:
    """sigma_max(P) / sigma_min(P); inf for a singular P."""
    s = _singular_values(np.asarray(P, dtype=float))
    return float(s[0] / s[-1]) if s[-1] > 0 else float("inf")


def _singular_values(A: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(A)):
        logger.error("Cannot take singular values of a matrix with non-finite entries")
        raise SvdFailure("matrix has non-finite entries")
    try:
        return np.linalg.svd(A, compute_uv=False)
    except np.linalg.LinAlgError as e:
        logger.error(f"SVD did not converge: {e}")
        raise SvdFailure("SVD did not converge") from e
