"""
Variable-direction forgetting.

The singular vectors U of P (the information directions) split the parameter
space by how much the current regressor excites each direction: column i of
psi = phi U carries the information content along u_i. Directions whose
content exceeds epsilon are information-rich and are forgotten with sqrt(lam);
the others keep their information untouched:

    Lambda    = U diag(lam_bar) U',   lam_bar_i in {sqrt(lam), 1}
    P'^-1     = Lambda P^-1 Lambda + phi' phi
    P_bar     = Lambda^-1 P Lambda^-1
    P'        = P_bar - P_bar phi' (I + phi P_bar phi')^-1 phi P_bar
"""
import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import cho_solve

from rlsForget.errors import NumericalBreakdown, ParameterOutOfRange, SvdFailure
from rlsForget.estimator.core import (DataPoint, EstimatorState, History, TraceRecord, check_dimensions,
                                      information_matrix, make_trace, spd_factor, spd_inverse, symmetrize)


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InformationDecomposition:
    U: np.ndarray
    sigma_inv: np.ndarray
    psi: np.ndarray
    col_norms: np.ndarray
    rich_mask: np.ndarray

    @property
    def rich_count(self) -> int:
        return int(np.count_nonzero(self.rich_mask))

    def information(self) -> np.ndarray:
        """P^-1 reassembled from the decomposition."""
        return symmetrize((self.U * self.sigma_inv) @ self.U.T)


@dataclass(frozen=True)
class ForgettingMatrix:
    lambda_bar_diag: np.ndarray
    Lambda: np.ndarray
    U: np.ndarray

    @property
    def Lambda_inv(self) -> np.ndarray:
        return symmetrize((self.U / self.lambda_bar_diag) @ self.U.T)


def decompose_information(P: np.ndarray, phi: np.ndarray, epsilon: float) -> InformationDecomposition:
    """
    Information directions of P and the content of ``phi`` along each.

    Uses the SVD of P itself: P and P^-1 share singular vectors and have
    reciprocal singular values, so nothing is inverted. Columns are ordered by
    descending singular value of P^-1.

    Raises:
        SvdFailure: the SVD did not converge or P has non-finite entries
        NumericalBreakdown: P has a zero singular value
    """
    if not epsilon > 0:
        logger.error(f"Invalid information threshold: {epsilon}")
        raise ParameterOutOfRange(f"epsilon must be positive, got {epsilon}")
    phi = np.atleast_2d(np.asarray(phi, dtype=float))
    if not np.all(np.isfinite(P)):
        logger.error("Cannot decompose a covariance with non-finite entries")
        raise SvdFailure("P has non-finite entries")
    try:
        U, s, _ = np.linalg.svd(P)
    except np.linalg.LinAlgError as e:
        logger.error(f"SVD of P did not converge: {e}")
        raise SvdFailure("SVD of P did not converge") from e
    if s[-1] <= 0.0:
        logger.error(f"P is singular (smallest singular value {s[-1]})")
        raise NumericalBreakdown("P is singular")

    U = U[:, ::-1]
    sigma_inv = 1.0 / s[::-1]
    psi = phi @ U
    col_norms = np.linalg.norm(psi, axis=0)
    return InformationDecomposition(U=U, sigma_inv=sigma_inv, psi=psi, col_norms=col_norms,
                                    rich_mask=col_norms > epsilon)


def build_forgetting_matrix(decomp: InformationDecomposition, lam: float) -> ForgettingMatrix:
    """Lambda = U diag(lam_bar) U' with sqrt(lam) on the rich directions and 1 elsewhere."""
    if not 0.0 < lam <= 1.0:
        logger.error(f"Invalid forgetting factor: {lam}")
        raise ParameterOutOfRange(f"lambda must be in (0, 1], got {lam}")
    diag = np.where(decomp.rich_mask, np.sqrt(lam), 1.0)
    Lambda = symmetrize((decomp.U * diag) @ decomp.U.T)
    return ForgettingMatrix(lambda_bar_diag=diag, Lambda=Lambda, U=decomp.U)


def vdf_information_update(Pinv: np.ndarray, phi: np.ndarray, forgetting: ForgettingMatrix) -> np.ndarray:
    """Lambda P^-1 Lambda + phi' phi."""
    phi = np.atleast_2d(phi)
    L = forgetting.Lambda
    return symmetrize(L @ Pinv @ L + phi.T @ phi)


def vdf_covariance_update(P: np.ndarray, phi: np.ndarray, forgetting: ForgettingMatrix) -> np.ndarray:
    """Covariance counterpart of ``vdf_information_update`` (rank-p downdate of Lambda^-1 P Lambda^-1)."""
    phi = np.atleast_2d(phi)
    Linv = forgetting.Lambda_inv
    P_bar = symmetrize(Linv @ P @ Linv)
    PbarPhiT = P_bar @ phi.T
    S = np.eye(phi.shape[0]) + phi @ PbarPhiT
    gain = cho_solve(spd_factor(S, "I + phi P_bar phi'"), PbarPhiT.T).T
    return symmetrize(P_bar - gain @ PbarPhiT.T)


def _prepare(state: EstimatorState, d: DataPoint, lam: float, epsilon: float):
    check_dimensions(state, d)
    decomp = decompose_information(state.P, d.phi, epsilon)
    return decomp, build_forgetting_matrix(decomp, lam)


def _trace(state: EstimatorState, z, nxt: EstimatorState, decomp: InformationDecomposition, theta_true):
    return make_trace(state.k, z, nxt, theta_true, psi_col_norms=decomp.col_norms, rich_count=decomp.rich_count)


def vdf_update(state: EstimatorState, d: DataPoint, lam: float, epsilon: float,
               theta_true=None) -> tuple[EstimatorState, TraceRecord]:
    """
    Variable-direction forgetting step in covariance form, theta by the plain gain update.

    Args:
        state: current state
        d: data point k
        lam: forgetting factor applied on the information-rich directions
        epsilon: information-content threshold
        theta_true: optional true parameter for diagnostics

    Returns:
        (next state, trace record with the column norms of psi)
    """
    decomp, forgetting = _prepare(state, d, lam, epsilon)
    z = d.phi @ state.theta - d.y
    P_next = vdf_covariance_update(state.P, d.phi, forgetting)
    theta = state.theta - P_next @ d.phi.T @ z

    nxt = replace(state, k=state.k + 1, theta=theta, P=P_next, Pinv_cache=None)
    return nxt, _trace(state, z, nxt, decomp, theta_true)


def vdf_update_information(state: EstimatorState, d: DataPoint, lam: float, epsilon: float,
                           theta_true=None) -> tuple[EstimatorState, TraceRecord]:
    """Same step as ``vdf_update`` carried on P^-1; P is recovered by an SPD solve."""
    decomp, forgetting = _prepare(state, d, lam, epsilon)
    z = d.phi @ state.theta - d.y
    Pinv_next = vdf_information_update(information_matrix(state), d.phi, forgetting)
    P_next = spd_inverse(Pinv_next, "P^-1")
    theta = state.theta - P_next @ d.phi.T @ z

    nxt = replace(state, k=state.k + 1, theta=theta, P=P_next, Pinv_cache=Pinv_next)
    return nxt, _trace(state, z, nxt, decomp, theta_true)


def vdf_update_cost_consistent(state: EstimatorState, d: DataPoint, lam: float, epsilon: float, theta0,
                               theta_true=None) -> tuple[EstimatorState, TraceRecord]:
    """
    Variable-direction forgetting whose estimate minimizes a running quadratic cost.

    The regularization matrix follows R_k = R_{k-1} + Lambda P^-1 Lambda - P^-1
    (R_{-1} = R) and theta picks up the correction P' (R_k - R_{k-1}) (theta0 - theta),
    so theta_{k+1} solves (sum_{i<=k} phi_i' phi_i + R_k) theta = sum phi_i' y_i + R_k theta0.
    The increment R_k - R_{k-1} is read off the decomposition, so P is not inverted.

    Raises:
        ParameterOutOfRange: the state does not carry R_{k-1}
    """
    if "R_prev" not in state.strategy_state:
        logger.error("Cost-consistent update needs R_{k-1} in the strategy state")
        raise ParameterOutOfRange("state was not initialized for cost-consistent forgetting")
    decomp, forgetting = _prepare(state, d, lam, epsilon)
    theta0 = np.asarray(theta0, dtype=float).ravel()

    z = d.phi @ state.theta - d.y
    delta_R = symmetrize((decomp.U * ((forgetting.lambda_bar_diag ** 2 - 1.0) * decomp.sigma_inv)) @ decomp.U.T)
    R_k = symmetrize(state.strategy_state["R_prev"] + delta_R)

    P_next = vdf_covariance_update(state.P, d.phi, forgetting)
    theta = state.theta - P_next @ d.phi.T @ z + P_next @ delta_R @ (theta0 - state.theta)

    strategy_state = dict(state.strategy_state, R_prev=R_k)
    nxt = replace(state, k=state.k + 1, theta=theta, P=P_next, Pinv_cache=None, strategy_state=strategy_state)
    return nxt, _trace(state, z, nxt, decomp, theta_true)


def vdf_cost_minimizer(history: History, R_k, theta0) -> np.ndarray:
    """Direct solve of (sum phi_i' phi_i + R_k) theta = sum phi_i' y_i + R_k theta0."""
    phis, ys = history.phis(), history.ys()
    R_k = np.atleast_2d(np.asarray(R_k, dtype=float))
    theta0 = np.asarray(theta0, dtype=float).ravel()
    A = np.einsum("ipn,ipm->nm", phis, phis) + R_k
    b = np.einsum("ipn,ip->n", phis, ys) + R_k @ theta0
    try:
        return np.linalg.solve(symmetrize(A), b)
    except np.linalg.LinAlgError as e:
        logger.error(f"Direct solve of the cost-consistent normal equations failed: {e}")
        raise NumericalBreakdown("normal equations are singular") from e
