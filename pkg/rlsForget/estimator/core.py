"""
Estimator state and the uniform-forgetting RLS updates.

The recursion minimizes, at step k,

    sum_{i<=k} lam^(k-i) |phi_i theta - y_i|^2 + lam^(k+1) (theta - theta0)' R (theta - theta0)

with P_0 = R^-1. ``step_covariance`` updates theta first through the p x p
innovation matrix and then P; ``step_information`` carries P^-1 and recovers
P by an n x n solve. ``batch_solve`` evaluates the same minimizer directly and
serves as the oracle for both.
"""
import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from rlsForget.errors import DimensionMismatch, NonSPDInput, NumericalBreakdown, ParameterOutOfRange
from rlsForget.forgetting.strategies import ForgettingStrategy, StrategyTag


logger = logging.getLogger(__name__)


@dataclass
class DataPoint:
    """Regressor phi (p x n) and measurement y (length p)."""
    phi: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.phi = np.atleast_2d(np.asarray(self.phi, dtype=float))
        self.y = np.atleast_1d(np.asarray(self.y, dtype=float)).ravel()
        if self.phi.ndim != 2 or self.phi.size == 0:
            logger.error(f"Regressor must be a nonempty p x n matrix, got shape {self.phi.shape}")
            raise DimensionMismatch(f"regressor must be p x n, got shape {self.phi.shape}")
        if self.y.size != self.phi.shape[0]:
            logger.error(f"Measurement length {self.y.size} != regressor rows {self.phi.shape[0]}")
            raise DimensionMismatch(f"y has {self.y.size} entries, phi has {self.phi.shape[0]} rows")
        if not (np.all(np.isfinite(self.phi)) and np.all(np.isfinite(self.y))):
            logger.error("Data point has non-finite entries")
            raise ParameterOutOfRange("phi and y must be finite")

    @property
    def p(self) -> int:
        return self.phi.shape[0]

    @property
    def n(self) -> int:
        return self.phi.shape[1]


@dataclass
class History:
    """Data points from step 0 on, all with the same (p, n)."""
    points: list[DataPoint] = field(default_factory=list)

    def __post_init__(self):
        points, self.points = self.points, []
        for d in points:
            self.append(d)

    def append(self, d: DataPoint) -> None:
        if self.points and (d.p, d.n) != self.shape:
            logger.error(f"Data point shape {(d.p, d.n)} does not match history shape {self.shape}")
            raise DimensionMismatch(f"expected (p, n) = {self.shape}, got {(d.p, d.n)}")
        self.points.append(d)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, index):
        if isinstance(index, slice):
            return History(self.points[index])
        return self.points[index]

    @property
    def shape(self) -> tuple[int, int]:
        first = self.points[0]
        return first.p, first.n

    def phis(self) -> np.ndarray:
        """Stacked regressors, shape (K, p, n)."""
        return np.stack([d.phi for d in self.points])

    def ys(self) -> np.ndarray:
        """Stacked measurements, shape (K, p)."""
        return np.stack([d.y for d in self.points])


@dataclass(frozen=True)
class EstimatorState:
    k: int
    theta: np.ndarray
    P: np.ndarray
    strategy: ForgettingStrategy
    Pinv_cache: np.ndarray | None = None
    strategy_state: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.theta.size


@dataclass(frozen=True)
class TraceRecord:
    """
    Diagnostics of one step.

    ``z`` is the predicted error of the data point against the estimate before
    the step; every other field describes the state after the step.
    """
    k: int
    z: np.ndarray
    theta: np.ndarray
    sigma_P: np.ndarray
    kappa_P: float
    theta_err_norm: float | None = None
    V: float | None = None
    psi_col_norms: np.ndarray | None = None
    rich_count: int | None = None


def symmetrize(A: np.ndarray) -> np.ndarray:
    return (A + A.T) / 2.0


def spd_factor(A: np.ndarray, what: str = "matrix"):
    """Cholesky factor of an SPD matrix; raises NumericalBreakdown when it fails."""
    try:
        return cho_factor(A)
    except (LinAlgError, ValueError) as e:
        logger.error(f"Cholesky factorization of {what} failed: {e}")
        raise NumericalBreakdown(f"{what} is not numerically positive definite") from e


def spd_inverse(A: np.ndarray, what: str = "matrix") -> np.ndarray:
    return symmetrize(cho_solve(spd_factor(A, what), np.eye(A.shape[0])))


def is_spd(A: np.ndarray) -> bool:
    """Decomposition-based SPD check."""
    if not np.all(np.isfinite(A)) or not np.array_equal(A, A.T):
        return False
    try:
        cho_factor(A)
    except (LinAlgError, ValueError):
        return False
    return True


def init(theta0, R, strategy: ForgettingStrategy | None = None) -> EstimatorState:
    """
    Initial estimator state with P_0 = R^-1.

    Args:
        theta0: initial estimate, length n
        R: SPD n x n regularization matrix
        strategy: forgetting configuration, no forgetting by default

    Returns:
        EstimatorState at k = 0

    Raises:
        DimensionMismatch: R is not n x n
        NonSPDInput: R is not symmetric positive definite
    """
    strategy = ForgettingStrategy.none() if strategy is None else strategy
    theta0 = np.atleast_1d(np.asarray(theta0, dtype=float)).ravel()
    R = np.atleast_2d(np.asarray(R, dtype=float))
    n = theta0.size

    if R.shape != (n, n):
        logger.error(f"R has shape {R.shape}, expected {(n, n)}")
        raise DimensionMismatch(f"R must be {n} x {n}, got {R.shape}")
    if not np.all(np.isfinite(R)) or not np.allclose(R, R.T, rtol=1e-12, atol=0.0):
        logger.error("R is not a finite symmetric matrix")
        raise NonSPDInput("R must be finite and symmetric")
    R = symmetrize(R)
    try:
        c = cho_factor(R)
    except LinAlgError as e:
        logger.error(f"R is not positive definite: {e}")
        raise NonSPDInput("R must be positive definite") from e
    P = symmetrize(cho_solve(c, np.eye(n)))

    strategy_state = {}
    if strategy.cost_consistent:
        strategy_state = {"R_prev": R.copy(), "theta0": theta0.copy()}
    Pinv = R.copy() if strategy.keeps_information else None

    logger.debug(f"Initialized estimator n={n}, strategy={strategy.describe()}")
    return EstimatorState(k=0, theta=theta0.copy(), P=P, strategy=strategy,
                          Pinv_cache=Pinv, strategy_state=strategy_state)


def check_dimensions(state: EstimatorState, d: DataPoint) -> None:
    if d.n != state.n:
        logger.error(f"Regressor has {d.n} columns, estimator has n={state.n}")
        raise DimensionMismatch(f"regressor width {d.n} does not match n={state.n}")


def uniform_lambda(state: EstimatorState) -> float:
    if state.strategy.tag not in (StrategyTag.NONE, StrategyTag.UNIFORM):
        logger.error(f"Uniform update called with strategy {state.strategy.tag}")
        raise ParameterOutOfRange(f"uniform update needs strategy none or uniform, got {state.strategy.tag.value}")
    return state.strategy.lam


def predicted_error(state: EstimatorState, d: DataPoint) -> np.ndarray:
    """z_k = phi_k theta_k - y_k against the current estimate."""
    check_dimensions(state, d)
    return d.phi @ state.theta - d.y


def information_matrix(state: EstimatorState) -> np.ndarray:
    """P^-1 from the cache when present, otherwise by an SPD solve."""
    if state.Pinv_cache is not None:
        return state.Pinv_cache
    return spd_inverse(state.P, "P")


def lyapunov_value(state: EstimatorState, theta_true) -> float:
    """V = theta_err' P^-1 theta_err."""
    err = state.theta - np.asarray(theta_true, dtype=float).ravel()
    if err.size != state.n:
        logger.error(f"theta_true has {err.size} entries, estimator has n={state.n}")
        raise DimensionMismatch(f"theta_true length must be {state.n}")
    if state.Pinv_cache is not None:
        return float(err @ state.Pinv_cache @ err)
    try:
        x = cho_solve(cho_factor(state.P), err)
    except (LinAlgError, ValueError):
        logger.warning(f"P not factorable at k={state.k}; V from least squares")
        x = np.linalg.lstsq(state.P, err, rcond=None)[0]
    return float(err @ x)


def make_trace(k: int, z: np.ndarray, state: EstimatorState, theta_true=None,
               psi_col_norms=None, rich_count=None) -> TraceRecord:
    """Diagnostics of ``state`` after the step that consumed data point ``k``."""
    P = state.P
    if np.all(np.isfinite(P)) and np.all(np.isfinite(state.theta)):
        sigma = np.linalg.svd(P, compute_uv=False)
        kappa = float(sigma[0] / sigma[-1]) if sigma[-1] > 0 else float("inf")
    else:
        sigma = np.full(state.n, np.nan)
        kappa = float("inf")

    err_norm = V = None
    if theta_true is not None:
        theta_true = np.asarray(theta_true, dtype=float).ravel()
        err_norm = float(np.linalg.norm(state.theta - theta_true))
        V = lyapunov_value(state, theta_true) if np.isfinite(kappa) else float("nan")
    return TraceRecord(k=k, z=np.asarray(z, dtype=float), theta=state.theta.copy(), sigma_P=sigma,
                       kappa_P=kappa, theta_err_norm=err_norm, V=V,
                       psi_col_norms=psi_col_norms, rich_count=rich_count)


def step_covariance(state: EstimatorState, d: DataPoint, theta_true=None) -> tuple[EstimatorState, TraceRecord]:
    """
    One RLS step with theta updated before P.

        theta' = theta + P phi' (lam I + phi P phi')^-1 (y - phi theta)
        P'     = (P - P phi' (lam I + phi P phi')^-1 phi P) / lam

    Args:
        state: current state, strategy none or uniform
        d: data point k
        theta_true: optional true parameter for the error diagnostics

    Returns:
        (next state, trace record of step k)
    """
    check_dimensions(state, d)
    lam = uniform_lambda(state)
    phi, P = d.phi, state.P

    z = phi @ state.theta - d.y
    PphiT = P @ phi.T
    S = lam * np.eye(d.p) + phi @ PphiT
    gain = cho_solve(spd_factor(S, "lam I + phi P phi'"), PphiT.T).T

    theta = state.theta - gain @ z
    P_next = symmetrize((P - gain @ PphiT.T) / lam)

    nxt = replace(state, k=state.k + 1, theta=theta, P=P_next, Pinv_cache=None)
    return nxt, make_trace(state.k, z, nxt, theta_true)


def step_information(state: EstimatorState, d: DataPoint, theta_true=None) -> tuple[EstimatorState, TraceRecord]:
    """
    One RLS step on the information matrix.

    P'^-1 = lam P^-1 + phi' phi, P' by an n x n solve, then
    theta' = theta + P' phi' (y - phi theta).
    """
    check_dimensions(state, d)
    lam = uniform_lambda(state)
    phi = d.phi

    z = phi @ state.theta - d.y
    Pinv_next = symmetrize(lam * information_matrix(state) + phi.T @ phi)
    P_next = spd_inverse(Pinv_next, "P^-1")
    theta = state.theta - P_next @ phi.T @ z

    nxt = replace(state, k=state.k + 1, theta=theta, P=P_next, Pinv_cache=Pinv_next)
    return nxt, make_trace(state.k, z, nxt, theta_true)


def update_matrix(state: EstimatorState, d: DataPoint) -> np.ndarray:
    """I_p - phi P phi' (lam I_p + phi P phi')^-1, positive definite for SPD P."""
    check_dimensions(state, d)
    lam = uniform_lambda(state)
    X = d.phi @ state.P @ d.phi.T
    S = lam * np.eye(d.p) + X
    return symmetrize(np.eye(d.p) - cho_solve(spd_factor(S, "lam I + phi P phi'"), X).T)


def error_recursion_forms(prev: EstimatorState, nxt: EstimatorState, d: DataPoint, theta_true):
    """
    Three expressions of the parameter error after a uniform-forgetting step.

    Returns:
        (direct, gain_form, ratio_form) where direct = theta' - theta_true,
        gain_form = (I - P' phi' phi) theta_err and ratio_form = lam P' P^-1 theta_err
    """
    theta_true = np.asarray(theta_true, dtype=float).ravel()
    lam = uniform_lambda(prev)
    err = prev.theta - theta_true
    direct = nxt.theta - theta_true
    gain_form = err - nxt.P @ (d.phi.T @ (d.phi @ err))
    ratio_form = lam * nxt.P @ (information_matrix(prev) @ err)
    return direct, gain_form, ratio_form


def lyapunov_decrement(state: EstimatorState, d: DataPoint, theta_true) -> float:
    """Closed form of V_{k+1} - V_k for uniform forgetting: -[(1 - lam) V_k + z' M z]."""
    lam = uniform_lambda(state)
    z = d.phi @ state.theta - d.y
    M = update_matrix(state, d)
    return -((1.0 - lam) * lyapunov_value(state, theta_true) + float(z @ M @ z))


def batch_solve(history: History, lam: float, R, theta0) -> np.ndarray:
    """
    Minimizer of the weighted least-squares cost by a direct solve of its normal equations.

    (sum lam^(k-i) phi_i' phi_i + lam^(k+1) R) theta = sum lam^(k-i) phi_i' y_i + lam^(k+1) R theta0

    Parameters
    ----------
    history : History
        Data points 0..k, nonempty
    lam : float
        Forgetting factor in (0, 1]
    R : np.ndarray
        SPD regularization matrix
    theta0 : np.ndarray
        Prior estimate

    Returns
    -------
    np.ndarray
        The estimate theta_{k+1}
    """
    if len(history) == 0:
        logger.error("batch_solve called with an empty history")
        raise DimensionMismatch("history must contain at least one data point")
    if not 0.0 < lam <= 1.0:
        logger.error(f"Invalid forgetting factor: {lam}")
        raise ParameterOutOfRange(f"lambda must be in (0, 1], got {lam}")

    phis, ys = history.phis(), history.ys()
    count = phis.shape[0]
    R = np.atleast_2d(np.asarray(R, dtype=float))
    theta0 = np.asarray(theta0, dtype=float).ravel()
    if R.shape != (phis.shape[2], phis.shape[2]) or theta0.size != phis.shape[2]:
        logger.error(f"R {R.shape} / theta0 {theta0.shape} do not match n={phis.shape[2]}")
        raise DimensionMismatch("R and theta0 must match the regressor width")

    weights = lam ** np.arange(count - 1, -1, -1, dtype=float)
    prior = lam ** count
    A = np.einsum("i,ipn,ipm->nm", weights, phis, phis) + prior * R
    b = np.einsum("i,ipn,ip->n", weights, phis, ys) + prior * (R @ theta0)
    return cho_solve(spd_factor(symmetrize(A), "normal matrix"), b)


def _replay_information(history: History, lam: float, R):
    """Yield (data point, P_{i+1}) while replaying the information recursion from P_0 = R^-1."""
    Pinv = symmetrize(np.atleast_2d(np.asarray(R, dtype=float)))
    for d in history:
        Pinv = symmetrize(lam * Pinv + d.phi.T @ d.phi)
        yield d, spd_inverse(Pinv, "P^-1")


def error_transition_product(history: History, lam: float, R) -> np.ndarray:
    """
    Product of the error transition matrices (I - P_{i+1} phi_i' phi_i), newest on the left.

    Applied to the initial parameter error it gives the error after the last step.
    """
    if len(history) == 0:
        logger.error("error_transition_product called with an empty history")
        raise DimensionMismatch("history must contain at least one data point")
    n = history.shape[1]
    product = np.eye(n)
    for d, P_next in _replay_information(history, lam, R):
        product = (np.eye(n) - P_next @ d.phi.T @ d.phi) @ product
    return product


def transition_factor_spectra(history: History, lam: float, R) -> list[np.ndarray]:
    """Real parts of the eigenvalues of P_{i+1} phi_i' phi_i for every step of the replay."""
    return [np.linalg.eigvals(P_next @ d.phi.T @ d.phi).real
            for d, P_next in _replay_information(history, lam, R)]


def information_identity_residual(Pinv_k, history: History, R) -> float:
    """
    Relative distance of P_k^-1 from R + sum_{i<k} phi_i' phi_i, where ``history``
    holds the k data points processed without forgetting.
    """
    R = np.atleast_2d(np.asarray(R, dtype=float))
    expected = R.copy()
    if len(history):
        phis = history.phis()
        expected = expected + np.einsum("ipn,ipm->nm", phis, phis)
    return float(np.linalg.norm(np.asarray(Pinv_k) - expected) / np.linalg.norm(expected))
