"""
Spectral bounds on P_k^-1 implied by persistent excitation, and the checker that
replays recorded matrices against them.

Indexing follows the estimator: P_k^-1 has absorbed data points 0..k-1, so for
lam = 1 it equals P_0^-1 + F_{0,k-1}.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from rlsForget.errors import DimensionMismatch, ParameterOutOfRange
from rlsForget.estimator.core import symmetrize


logger = logging.getLogger(__name__)

DEFAULT_SLACK = 1e-9

BOUND_KINDS = ("without_forgetting", "uniform_forgetting", "converse", "directional_forgetting", "custom")


@dataclass(frozen=True)
class BoundPair:
    """
    Lower and upper bound on a symmetric matrix, each a scalar (times I) or an n x n matrix.

    ``valid_from`` is the first step the pair applies to when used as a constant bound.
    """
    kind: str
    lower: float | np.ndarray = 0.0
    upper: float | np.ndarray = math.inf
    valid_from: int = 0


@dataclass
class BoundCheck:
    kind: str
    slack: float
    lower_margins: np.ndarray
    upper_margins: np.ndarray
    violated_steps: list[int] = field(default_factory=list)

    @property
    def violations(self) -> int:
        return len(self.violated_steps)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    @property
    def worst_margin(self) -> float:
        """Smallest normalized margin over every checked step, negative when a bound is crossed."""
        margins = np.concatenate([self.lower_margins, self.upper_margins])
        margins = margins[~np.isnan(margins)]
        return float(margins.min()) if margins.size else math.inf

    @property
    def worst_step(self) -> int | None:
        both = np.fmin(self.lower_margins, self.upper_margins)
        if np.all(np.isnan(both)):
            return None
        return int(np.nanargmin(both))

    def summary(self) -> str:
        return f"{self.kind}: {self.violations} violations, worst margin {self.worst_margin:.3e}"


def _check_pe_constants(alpha: float, beta: float) -> None:
    if not (alpha > 0 and beta >= alpha and math.isfinite(beta)):
        logger.error(f"Invalid excitation constants alpha={alpha}, beta={beta}")
        raise ParameterOutOfRange(f"need 0 < alpha <= beta < inf, got alpha={alpha}, beta={beta}")


def _check_window(N: int) -> None:
    if N < 0 or int(N) != N:
        logger.error(f"Invalid window parameter N={N}")
        raise ParameterOutOfRange(f"N must be a nonnegative integer, got {N}")


def _check_forgetting(lam: float) -> None:
    if not 0.0 < lam < 1.0:
        logger.error(f"Bound needs a forgetting factor in (0, 1), got {lam}")
        raise ParameterOutOfRange(f"lambda must be in (0, 1), got {lam}")


def _one_minus_power(lam: float, power: int) -> float:
    """1 - lam^power without cancellation for lam close to 1."""
    return -math.expm1(power * math.log(lam))


def _square(M, what: str) -> np.ndarray:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        logger.error(f"{what} must be square, got shape {M.shape}")
        raise DimensionMismatch(f"{what} must be square, got shape {M.shape}")
    return symmetrize(M)


def bound_without_forgetting(k: int, N: int, alpha: float, beta: float, P0inv) -> BoundPair:
    """
    Bounds on P_k^-1 without forgetting for a persistently exciting regressor.

        floor(k/(N+1)) alpha I + P_0^-1  <=  P_k^-1  <=  ceil(k/(N+1)) beta I + P_0^-1

    Valid for k >= N+1.
    """
    _check_window(N)
    _check_pe_constants(alpha, beta)
    if k < N + 1:
        logger.error(f"Bound without forgetting needs k >= N+1, got k={k}, N={N}")
        raise ParameterOutOfRange(f"k must be at least N+1={N + 1}, got {k}")
    P0inv = _square(P0inv, "P0inv")
    eye = np.eye(P0inv.shape[0])
    lower = (k // (N + 1)) * alpha * eye + P0inv
    upper = (-(-k // (N + 1))) * beta * eye + P0inv
    return BoundPair(kind="without_forgetting", lower=lower, upper=upper, valid_from=k)


def bound_uniform_forgetting(N: int, alpha: float, beta: float, lam: float, PNinv) -> BoundPair:
    """
    Bounds on P_k^-1 under uniform forgetting, valid for all k >= N+1.

        lam^N (1 - lam) alpha / (1 - lam^(N+1)) I  <=  P_k^-1  <=  beta / (1 - lam^(N+1)) I + P_N^-1

    Parameters
    ----------
    N, alpha, beta : excitation constants of the regressor
    lam : float
        Forgetting factor in (0, 1)
    PNinv : np.ndarray
        P_N^-1 of the same run

    Returns
    -------
    BoundPair
        Scalar lower bound, matrix upper bound
    """
    _check_window(N)
    _check_pe_constants(alpha, beta)
    _check_forgetting(lam)
    PNinv = _square(PNinv, "PNinv")
    denom = _one_minus_power(lam, N + 1)
    lower = lam ** N * (1.0 - lam) * alpha / denom
    upper = (beta / denom) * np.eye(PNinv.shape[0]) + PNinv
    return BoundPair(kind="uniform_forgetting", lower=lower, upper=upper, valid_from=N + 1)


def converse_window(lam: float, alpha_bar: float, beta_bar: float) -> int:
    """Smallest admissible N for the converse bounds, (lam beta_bar - alpha_bar) / ((1 - lam) alpha_bar) rounded up."""
    _check_forgetting(lam)
    _check_pe_constants(alpha_bar, beta_bar)
    return max(0, math.ceil((lam * beta_bar - alpha_bar) / ((1.0 - lam) * alpha_bar)))


def bound_converse(lam: float, alpha_bar: float, beta_bar: float, N: int) -> BoundPair:
    """
    Window-sum bounds implied by alpha_bar I <= P_k^-1 <= beta_bar I under uniform forgetting.

        [(1 + (1 - lam) N) alpha_bar - lam beta_bar] I  <=  F_{j,j+N}  <=  (1 - lam^(N+1)) / (lam^N (1 - lam)) beta_bar I

    for every j. These certify persistent excitation with the returned constants.

    Raises:
        ParameterOutOfRange: N below ``converse_window(lam, alpha_bar, beta_bar)``
    """
    _check_window(N)
    required = converse_window(lam, alpha_bar, beta_bar)
    if N < required:
        logger.error(f"Converse bounds need N >= {required}, got {N}")
        raise ParameterOutOfRange(f"N must be at least {required} for these constants, got {N}")
    lower = (1.0 + (1.0 - lam) * N) * alpha_bar - lam * beta_bar
    upper = _one_minus_power(lam, N + 1) / (lam ** N * (1.0 - lam)) * beta_bar
    return BoundPair(kind="converse", lower=lower, upper=upper, valid_from=0)


def bound_directional_forgetting(N: int, alpha: float, lam: float) -> BoundPair:
    """Lower bound lam^N (1 - lam) alpha / (1 - lam^(N+1)) I on P_k^-1 under variable-direction forgetting, k >= N+1."""
    _check_window(N)
    if not alpha > 0:
        logger.error(f"Invalid excitation constant alpha={alpha}")
        raise ParameterOutOfRange(f"alpha must be positive, got {alpha}")
    _check_forgetting(lam)
    lower = lam ** N * (1.0 - lam) * alpha / _one_minus_power(lam, N + 1)
    return BoundPair(kind="directional_forgetting", lower=lower, upper=math.inf, valid_from=N + 1)


def kappa_bound(N: int, alpha: float, beta: float, lam: float, PNinv=None) -> float:
    """
    Upper bound on the condition number of P_k that persistent excitation guarantees.

    beta / alpha asymptotically without forgetting; otherwise the ratio of the
    uniform-forgetting bounds, (beta + (1 - lam^(N+1)) |P_N^-1|) / (lam^N (1 - lam) alpha).
    """
    _check_window(N)
    _check_pe_constants(alpha, beta)
    if lam == 1.0:
        return beta / alpha
    _check_forgetting(lam)
    if PNinv is None:
        logger.error("kappa_bound with forgetting needs P_N^-1")
        raise ParameterOutOfRange("PNinv is required when lambda < 1")
    norm = float(np.linalg.norm(_square(PNinv, "PNinv"), 2))
    return (beta + _one_minus_power(lam, N + 1) * norm) / (lam ** N * (1.0 - lam) * alpha)


def without_forgetting_schedule(count: int, N: int, alpha: float, beta: float, P0inv) -> list[BoundPair | None]:
    """Per-step bounds for P_0^-1 .. P_{count-1}^-1; steps before N+1 carry no bound."""
    return [bound_without_forgetting(k, N, alpha, beta, P0inv) if k >= N + 1 else None for k in range(count)]


def _margin(difference: np.ndarray, scale: float) -> float:
    return float(np.linalg.eigvalsh(symmetrize(difference)).min()) / max(1.0, scale)


def _scale(bound) -> float:
    if np.isscalar(bound):
        return abs(float(bound))
    return float(np.linalg.norm(bound, 2))


def check_bounds(matrices: Sequence[np.ndarray], bounds: BoundPair | Sequence[BoundPair | None],
                 slack: float = DEFAULT_SLACK) -> BoundCheck:
    """
    Count the steps at which a recorded symmetric matrix leaves its bounds.

    Args:
        matrices: P_k^-1 (or window Gram) matrices indexed by step
        bounds: one BoundPair applied from its ``valid_from`` step on, or one entry per step (None skips)
        slack: tolerated crossing, relative to max(1, |bound|)

    Returns:
        BoundCheck with per-step normalized margins (nan where unchecked)
    """
    count = len(matrices)
    if isinstance(bounds, BoundPair):
        kind = bounds.kind
        schedule = [bounds if k >= bounds.valid_from else None for k in range(count)]
    else:
        schedule = list(bounds)
        if len(schedule) != count:
            logger.error(f"{len(schedule)} bounds for {count} matrices")
            raise DimensionMismatch(f"bounds and matrices must align, got {len(schedule)} and {count}")
        kind = next((b.kind for b in schedule if b is not None), "custom")

    lower_margins = np.full(count, np.nan)
    upper_margins = np.full(count, np.nan)
    violated = []
    for k, (M, bound) in enumerate(zip(matrices, schedule)):
        if bound is None:
            continue
        M = np.atleast_2d(np.asarray(M, dtype=float))
        eye = np.eye(M.shape[0])

        lower = bound.lower * eye if np.isscalar(bound.lower) else bound.lower
        lower_margins[k] = _margin(M - lower, _scale(bound.lower))
        if np.isscalar(bound.upper) and math.isinf(bound.upper):
            upper_margins[k] = math.inf
        else:
            upper = bound.upper * eye if np.isscalar(bound.upper) else bound.upper
            upper_margins[k] = _margin(upper - M, _scale(bound.upper))

        if lower_margins[k] < -slack or upper_margins[k] < -slack:
            violated.append(k)

    check = BoundCheck(kind=kind, slack=slack, lower_margins=lower_margins,
                       upper_margins=upper_margins, violated_steps=violated)
    if violated:
        logger.warning(f"{check.summary()} (first at step {violated[0]})")
    else:
        logger.debug(check.summary())
    return check
