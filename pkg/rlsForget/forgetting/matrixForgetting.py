import logging
from dataclasses import replace

import numpy as np
from scipy.linalg import cho_solve

from rlsForget.errors import ParameterOutOfRange, ScalarOnly
from rlsForget.estimator.core import (DataPoint, EstimatorState, check_dimensions, information_matrix,
                                      spd_factor, spd_inverse, symmetrize)


logger = logging.getLogger(__name__)


def general_matrix_update(state: EstimatorState, d: DataPoint, M: np.ndarray) -> EstimatorState:
    """
    Matrix-forgetting step P'^-1 = (I + M P) P^-1 + phi' phi, theta by the plain gain update.

    M = (lam - 1) P^-1 gives uniform forgetting.
    """
    check_dimensions(state, d)
    phi = d.phi
    z = phi @ state.theta - d.y
    Pinv_next = symmetrize(information_matrix(state) + M + phi.T @ phi)
    P_next = spd_inverse(Pinv_next, "P^-1")
    theta = state.theta - P_next @ phi.T @ z
    return replace(state, k=state.k + 1, theta=theta, P=P_next, Pinv_cache=Pinv_next)


def kreisselmeier_matrix(P: np.ndarray, Pinv: np.ndarray, lam: float, alpha: float, beta: float,
                         n_odd: int, variant: str) -> np.ndarray:
    """
    Forgetting matrix M_k of the two Kreisselmeier variants.

    I:  M = -(1 - lam) (I - alpha P)^N P^-1
    II: M = -(1 - lam) (P^-1 - alpha I)^N (P^-1 + beta I)^-N P^-1

    Both shrink P^-1 towards alpha I but never below it.
    """
    n = P.shape[0]
    eye = np.eye(n)
    if variant == "I":
        M = -(1.0 - lam) * np.linalg.matrix_power(eye - alpha * P, n_odd) @ Pinv
    elif variant == "II":
        shifted_inv = spd_inverse(Pinv + beta * eye, "P^-1 + beta I")
        M = -(1.0 - lam) * (np.linalg.matrix_power(Pinv - alpha * eye, n_odd)
                            @ np.linalg.matrix_power(shifted_inv, n_odd) @ Pinv)
    else:
        logger.error(f"Unknown Kreisselmeier variant: {variant}")
        raise ParameterOutOfRange(f"variant must be 'I' or 'II', got {variant!r}")
    return symmetrize(M)


def kreisselmeier_update(state: EstimatorState, d: DataPoint, lam: float, alpha: float, beta: float,
                         n_odd: int, variant: str) -> EstimatorState:
    """
    Kreisselmeier forgetting step.

    Parameters
    ----------
    state : EstimatorState
        Current state (P nonsingular)
    d : DataPoint
        Data point k
    lam : float
        Forgetting factor in (0, 1]
    alpha : float
        Floor for the eigenvalues of P^-1
    beta : float
        Shift used by variant II
    n_odd : int
        Odd positive exponent N
    variant : str
        "I" or "II"

    Returns
    -------
    EstimatorState
        State after the step, with P^-1 cached
    """
    if n_odd < 1 or n_odd % 2 == 0:
        logger.error(f"Kreisselmeier exponent must be odd and positive, got {n_odd}")
        raise ParameterOutOfRange(f"N must be an odd positive integer, got {n_odd}")
    Pinv = information_matrix(state)
    M = kreisselmeier_matrix(state.P, Pinv, lam, alpha, beta, n_odd, variant)
    return general_matrix_update(replace(state, Pinv_cache=Pinv), d, M)


def cao_update(state: EstimatorState, d: DataPoint, lam: float) -> EstimatorState:
    """
    Subspace forgetting for scalar measurements.

    Forgetting acts only along P^-1 phi', the direction the current regressor
    excites:

        P_bar = P + ((1 - lam) / lam) (phi P^-1 phi')^-1 phi' phi      (P_bar = P when phi = 0)
        P'    = P_bar - P_bar phi' (1 + phi P_bar phi')^-1 phi P_bar

    Raises:
        ScalarOnly: the data point has p != 1
    """
    check_dimensions(state, d)
    if d.p != 1:
        logger.error(f"Cao forgetting needs a scalar measurement, got p={d.p}")
        raise ScalarOnly(f"cao_update requires p = 1, got p = {d.p}")
    if not 0.0 < lam <= 1.0:
        logger.error(f"Invalid forgetting factor: {lam}")
        raise ParameterOutOfRange(f"lambda must be in (0, 1], got {lam}")

    phi, P = d.phi, state.P
    z = phi @ state.theta - d.y
    if np.any(phi) and lam < 1.0:
        info = (phi @ cho_solve(spd_factor(P, "P"), phi.T)).item()
        P_bar = symmetrize(P + ((1.0 - lam) / lam / info) * (phi.T @ phi))
    else:
        P_bar = P

    PbarPhiT = P_bar @ phi.T
    P_next = symmetrize(P_bar - (PbarPhiT @ PbarPhiT.T) / (1.0 + (phi @ PbarPhiT).item()))
    theta = state.theta - P_next @ phi.T @ z
    return replace(state, k=state.k + 1, theta=theta, P=P_next, Pinv_cache=None)
