import logging
from dataclasses import dataclass
from enum import Enum

from rlsForget.errors import ParameterOutOfRange


logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 1e-8
FORMS = ("covariance", "information")


class StrategyTag(str, Enum):
    NONE = "none"
    UNIFORM = "uniform"
    VARIABLE_DIRECTION = "vdf"
    KREISSELMEIER_I = "kreisselmeier_1"
    KREISSELMEIER_II = "kreisselmeier_2"
    CAO = "cao"


@dataclass(frozen=True)
class ForgettingStrategy:
    """
    Tagged forgetting configuration.

    Attributes:
        tag: which scheme runs
        lam: forgetting factor in (0, 1]; 1 means no forgetting
        epsilon: information-content threshold for variable-direction forgetting
        alpha, beta, n_odd: Kreisselmeier floor, shift and odd exponent
        form: "covariance" or "information" for the uniform and variable-direction updates
        cost_consistent: variable-direction forgetting with the cost-consistent theta correction
    """
    tag: StrategyTag = StrategyTag.NONE
    lam: float = 1.0
    epsilon: float = DEFAULT_EPSILON
    alpha: float = 1.0
    beta: float = 0.0
    n_odd: int = 1
    form: str = "covariance"
    cost_consistent: bool = False

    def __post_init__(self):
        problems = self.problems()
        if problems:
            logger.error(f"Invalid forgetting strategy {self.tag}: {problems}")
            raise ParameterOutOfRange("; ".join(problems))

    def problems(self) -> list[str]:
        found = []
        if not 0.0 < self.lam <= 1.0:
            found.append(f"lambda must be in (0, 1], got {self.lam}")
        if self.tag == StrategyTag.NONE and self.lam != 1.0:
            found.append(f"strategy 'none' requires lambda = 1, got {self.lam}")
        if self.form not in FORMS:
            found.append(f"form must be one of {FORMS}, got {self.form!r}")
        if self.tag == StrategyTag.VARIABLE_DIRECTION and not self.epsilon > 0:
            found.append(f"epsilon must be positive, got {self.epsilon}")
        if self.is_kreisselmeier:
            if not self.alpha > 0:
                found.append(f"alpha must be positive, got {self.alpha}")
            if not self.beta >= 0:
                found.append(f"beta must be >= 0, got {self.beta}")
            if int(self.n_odd) != self.n_odd or self.n_odd < 1 or self.n_odd % 2 == 0:
                found.append(f"N must be an odd positive integer, got {self.n_odd}")
        if self.cost_consistent and self.tag != StrategyTag.VARIABLE_DIRECTION:
            found.append("cost_consistent applies to variable-direction forgetting only")
        return found

    @property
    def is_kreisselmeier(self) -> bool:
        return self.tag in (StrategyTag.KREISSELMEIER_I, StrategyTag.KREISSELMEIER_II)

    @property
    def keeps_information(self) -> bool:
        """True when the update carries P^-1 alongside P."""
        return self.form == "information" or self.is_kreisselmeier

    @classmethod
    def none(cls, form: str = "covariance") -> "ForgettingStrategy":
        return cls(StrategyTag.NONE, 1.0, form=form)

    @classmethod
    def uniform(cls, lam: float, form: str = "covariance") -> "ForgettingStrategy":
        return cls(StrategyTag.UNIFORM, lam, form=form)

    @classmethod
    def variable_direction(cls, lam: float, epsilon: float = DEFAULT_EPSILON,
                           cost_consistent: bool = False, form: str = "covariance") -> "ForgettingStrategy":
        return cls(StrategyTag.VARIABLE_DIRECTION, lam, epsilon=epsilon, form=form, cost_consistent=cost_consistent)

    @classmethod
    def kreisselmeier(cls, lam: float, alpha: float, beta: float = 0.0, n_odd: int = 1,
                      variant: str = "I") -> "ForgettingStrategy":
        tag = {"I": StrategyTag.KREISSELMEIER_I, "II": StrategyTag.KREISSELMEIER_II}.get(variant)
        if tag is None:
            logger.error(f"Unknown Kreisselmeier variant: {variant}")
            raise ParameterOutOfRange(f"variant must be 'I' or 'II', got {variant!r}")
        return cls(tag, lam, alpha=alpha, beta=beta, n_odd=n_odd)

    @classmethod
    def cao(cls, lam: float) -> "ForgettingStrategy":
        return cls(StrategyTag.CAO, lam)

    @property
    def config_name(self) -> str:
        """Strategy name as written in scenario files."""
        if self.cost_consistent:
            return "vdf_cost"
        return self.tag.value

    def describe(self) -> str:
        if self.tag == StrategyTag.NONE:
            return "none (lambda=1)"
        if self.tag == StrategyTag.VARIABLE_DIRECTION:
            return f"{self.config_name} (lambda={self.lam:g}, epsilon={self.epsilon:g})"
        if self.is_kreisselmeier:
            return f"{self.tag.value} (lambda={self.lam:g}, alpha={self.alpha:g}, beta={self.beta:g}, N={self.n_odd})"
        return f"{self.tag.value} (lambda={self.lam:g})"
