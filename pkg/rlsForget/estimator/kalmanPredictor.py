import logging

import numpy as np
from scipy.linalg import cho_solve

from rlsForget.errors import DimensionMismatch
from rlsForget.estimator.core import spd_factor, symmetrize


logger = logging.getLogger(__name__)


def kalman_gain(P, A, C, Rn) -> np.ndarray:
    """K = A P C' (Rn + C P C')^-1."""
    P, A, C, Rn = (np.atleast_2d(np.asarray(m, dtype=float)) for m in (P, A, C, Rn))
    S = Rn + C @ P @ C.T
    APCt = A @ P @ C.T
    return cho_solve(spd_factor(symmetrize(S), "Rn + C P C'"), APCt.T).T


def kalman_predictor_step(xhat, P, A, B, C, Q, Rn, u, y) -> tuple[np.ndarray, np.ndarray]:
    """
    One step of the optimal one-step state predictor.

        x'  = A x + B u + K (y - C x)
        P'  = A P A' + Q - A P C' (Rn + C P C')^-1 C P A'

    With A = I, B = 0, C = phi, Q = 0 and Rn = I this is RLS without forgetting.

    Args:
        xhat: predicted state, length n
        P: state error covariance, n x n
        A, B, C: system matrices (B may be None)
        Q, Rn: process and measurement noise covariances
        u: input, y: measurement (length p)

    Returns:
        (xhat', P')
    """
    xhat = np.atleast_1d(np.asarray(xhat, dtype=float)).ravel()
    P, A, C, Q, Rn = (np.atleast_2d(np.asarray(m, dtype=float)) for m in (P, A, C, Q, Rn))
    y = np.atleast_1d(np.asarray(y, dtype=float)).ravel()
    n = xhat.size
    if P.shape != (n, n) or A.shape != (n, n) or C.shape[1] != n or C.shape[0] != y.size:
        logger.error(f"Inconsistent shapes: x {xhat.shape}, P {P.shape}, A {A.shape}, C {C.shape}, y {y.shape}")
        raise DimensionMismatch("predictor matrices do not agree with the state and measurement sizes")

    K = kalman_gain(P, A, C, Rn)

    drive = np.zeros(n)
    if B is not None:
        B = np.atleast_2d(np.asarray(B, dtype=float))
        drive = B @ np.atleast_1d(np.asarray(u, dtype=float)).ravel()

    x_next = A @ xhat + drive + K @ (y - C @ xhat)
    P_next = symmetrize(A @ P @ A.T + Q - K @ C @ P @ A.T)
    return x_next, P_next
