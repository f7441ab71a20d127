import logging

import numpy as np

from rlsForget.errors import DimensionMismatch, ParameterOutOfRange


logger = logging.getLogger(__name__)


class LtiSiso:
    """
    Discrete SISO transfer function num(q)/den(q) run as a difference equation.

    num = [b0, b1, ..., bm]   b0*q^m + ... + bm
    den = [1, a1, ..., an]    q^n + a1*q^(n-1) + ... + an

    With num padded to n+1 coefficients the output obeys
    y_k = sum_j b_j u_{k-j} - sum_{j>=1} a_j y_{k-j}, starting from zero initial conditions.
    """

    def __init__(self, num, den):
        num = np.atleast_1d(np.asarray(num, dtype=float))
        den = np.atleast_1d(np.asarray(den, dtype=float))
        if den.size == 0 or den[0] == 0:
            logger.error(f"Denominator must have a nonzero leading coefficient, got {den}")
            raise ParameterOutOfRange("den leading coefficient must be nonzero")
        if num.size > den.size:
            logger.error(f"Improper system: deg num {num.size - 1} > deg den {den.size - 1}")
            raise ParameterOutOfRange("num degree must not exceed den degree")
        if den[0] != 1.0:
            logger.warning(f"Normalizing non-monic denominator (leading coefficient {den[0]})")
            num = num / den[0]
            den = den / den[0]

        self.num = num
        self.den = den
        self.order = den.size - 1
        self.b = np.concatenate([np.zeros(den.size - num.size), num])
        self.a = den
        self.reset()

    def reset(self) -> None:
        """Zero the delay lines."""
        self._u_past = np.zeros(self.order)
        self._y_past = np.zeros(self.order)

    def update(self, u: float) -> float:
        """Advance one step with input u_k and return y_k."""
        y = self.b[0] * u + self.b[1:] @ self._u_past - self.a[1:] @ self._y_past
        if self.order:
            self._u_past[1:] = self._u_past[:-1]
            self._u_past[0] = u
            self._y_past[1:] = self._y_past[:-1]
            self._y_past[0] = y
        return float(y)

    def dc_gain(self) -> float:
        return float(np.sum(self.b) / np.sum(self.a))


def simulate(system: LtiSiso, inputs, steps: int | None = None) -> np.ndarray:
    """
    Output sequence of ``system`` driven by ``inputs`` from zero initial conditions.

    Args:
        system: transfer function to run (its delay lines are reset first)
        inputs: input samples u_0, u_1, ...
        steps: number of samples to produce, defaults to len(inputs)

    Returns:
        np.ndarray with y_0 .. y_{steps-1}
    """
    inputs = np.asarray(inputs, dtype=float).ravel()
    steps = inputs.size if steps is None else steps
    if steps > inputs.size:
        logger.error(f"Requested {steps} steps from {inputs.size} input samples")
        raise DimensionMismatch(f"need {steps} input samples, got {inputs.size}")

    system.reset()
    out = np.empty(steps)
    for k in range(steps):
        out[k] = system.update(inputs[k])
    return out


def arx_regressor(u_hist, y_hist, nb: int, na: int, outputs_first: bool = False) -> np.ndarray:
    """
    ARX regressor row built from past samples only.

    ``u_hist`` and ``y_hist`` hold samples up to k-1; anything before time 0
    counts as zero. The row is [u_{k-1} .. u_{k-nb}, y_{k-1} .. y_{k-na}], or
    outputs first when ``outputs_first`` is set.

    Returns:
        np.ndarray of shape (1, nb + na)
    """
    if nb < 0 or na < 0:
        logger.error(f"Invalid ARX orders nb={nb}, na={na}")
        raise ParameterOutOfRange(f"nb and na must be >= 0, got nb={nb}, na={na}")
    u_part = _lagged(u_hist, nb)
    y_part = _lagged(y_hist, na)
    parts = (y_part, u_part) if outputs_first else (u_part, y_part)
    return np.concatenate(parts).reshape(1, -1)


def _lagged(hist, count: int) -> np.ndarray:
    hist = np.asarray(hist, dtype=float).ravel()
    out = np.zeros(count)
    available = min(count, hist.size)
    if available:
        out[:available] = hist[::-1][:available]
    return out


def arx_theta(system: LtiSiso, nb: int, na: int, outputs_first: bool = False) -> np.ndarray:
    """
    Parameter vector matching ``arx_regressor`` for ``system``.

    Numerator coefficients enter as they are, denominator coefficients past the
    monic term enter negated.

    Raises:
        ParameterOutOfRange: the system has direct feedthrough, or nb/na drop nonzero coefficients
    """
    if system.b[0] != 0.0:
        logger.error("System has direct feedthrough; ARX regressor uses past inputs only")
        raise ParameterOutOfRange("num degree must be below den degree for an ARX regressor")

    b = system.b[1:]
    a = system.a[1:]
    if np.any(b[nb:] != 0.0) or np.any(a[na:] != 0.0):
        logger.error(f"nb={nb}, na={na} too small for system of order {system.order}")
        raise ParameterOutOfRange(f"nb={nb}, na={na} cannot represent a system of order {system.order}")

    theta_b = np.zeros(nb)
    theta_b[:min(nb, b.size)] = b[:nb]
    theta_a = np.zeros(na)
    theta_a[:min(na, a.size)] = -a[:na]
    parts = (theta_a, theta_b) if outputs_first else (theta_b, theta_a)
    return np.concatenate(parts)
