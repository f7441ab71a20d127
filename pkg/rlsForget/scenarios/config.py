"""
Scenario documents: parsing, validation and serialization.

A scenario is one JSON object (or an equivalent builtin dict) describing the
data generator, how regressors are formed from it, the estimator and what the
run should emit. Validation collects every problem before raising so a broken
file is reported in one pass.
"""
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from rlsForget.errors import ConfigError, ParameterOutOfRange
from rlsForget.estimator.core import is_spd
from rlsForget.forgetting.strategies import DEFAULT_EPSILON, FORMS, ForgettingStrategy, StrategyTag
from rlsForget.signals.inputs import GeneratorKind, GeneratorSpec


logger = logging.getLogger(__name__)

DEFAULT_GUARD_KAPPA = 1e14

REGRESSOR_KINDS = ("scripted", "arx", "input_window")
STRATEGY_NAMES = ("none", "uniform", "vdf", "vdf_cost", "kreisselmeier_1", "kreisselmeier_2", "cao")
SCENARIO_KEYS = {"name", "description", "demonstrates", "generator", "regressor", "theta_true", "estimator",
                 "steps", "seed", "pe_windows", "outputs", "guard_kappa"}
ESTIMATOR_KEYS = {"strategy", "lambda", "epsilon", "alpha", "beta", "n_odd", "form", "theta0", "R"}
OUTPUT_KEYS = {"V", "psi", "plots"}


@dataclass(frozen=True)
class RegressorSpec:
    """
    How regressors are built from the generated sequence.

    scripted:      phi_k = s_k * direction, y_k = phi_k theta
    arx:           u = s drives num/den, phi_k = [u_{k-1}..u_{k-nb}, y_{k-1}..y_{k-na}]
    input_window:  phi_k = [u_k .. u_{k-width+1}], y_k = phi_k theta
    """
    kind: str = "scripted"
    num: tuple[float, ...] = ()
    den: tuple[float, ...] = ()
    nb: int = 0
    na: int = 0
    outputs_first: bool = False
    width: int = 1

    def width_for(self, generator: GeneratorSpec) -> int:
        if self.kind == "arx":
            return self.nb + self.na
        if self.kind == "input_window":
            return self.width
        return generator.regressor_direction.size

    def to_dict(self) -> dict:
        if self.kind == "arx":
            return {"kind": "arx", "num": list(self.num), "den": list(self.den), "nb": self.nb, "na": self.na,
                    "outputs_first": self.outputs_first}
        if self.kind == "input_window":
            return {"kind": "input_window", "width": self.width}
        return {"kind": "scripted"}


@dataclass(frozen=True)
class EstimatorConfig:
    strategy: ForgettingStrategy
    theta0: tuple[float, ...] | None = None
    R: float | tuple = 1.0

    def theta0_vector(self, n: int) -> np.ndarray:
        if self.theta0 is None:
            return np.zeros(n)
        return np.asarray(self.theta0, dtype=float)

    def R_matrix(self, n: int) -> np.ndarray:
        """R from its scalar, diagonal or full-matrix form."""
        R = np.asarray(self.R, dtype=float)
        if R.ndim == 0:
            return float(R) * np.eye(n)
        if R.ndim == 1:
            return np.diag(R)
        return R

    def to_dict(self) -> dict:
        s = self.strategy
        data = {"strategy": s.config_name, "lambda": s.lam, "form": s.form}
        if s.tag == StrategyTag.VARIABLE_DIRECTION:
            data["epsilon"] = s.epsilon
        if s.is_kreisselmeier:
            data.update(alpha=s.alpha, beta=s.beta, n_odd=s.n_odd)
        if self.theta0 is not None:
            data["theta0"] = list(self.theta0)
        R = np.asarray(self.R, dtype=float)
        data["R"] = R.tolist() if R.ndim else float(R)
        return data


@dataclass(frozen=True)
class OutputSpec:
    V: bool = False
    psi: bool = False
    plots: bool = False


@dataclass(frozen=True)
class Scenario:
    name: str
    generator: GeneratorSpec
    regressor: RegressorSpec
    estimator: EstimatorConfig
    steps: int
    seed: int = 0
    theta_true: tuple[float, ...] | None = None
    description: str = ""
    demonstrates: str = ""
    pe_windows: tuple[int, ...] = ()
    outputs: OutputSpec = field(default_factory=OutputSpec)
    guard_kappa: float = DEFAULT_GUARD_KAPPA

    @property
    def n(self) -> int:
        return self.regressor.width_for(self.generator)

    @property
    def strategy(self) -> ForgettingStrategy:
        return self.estimator.strategy


def build_strategy(data: dict) -> ForgettingStrategy:
    """ForgettingStrategy from the ``estimator`` section of a scenario."""
    name = data.get("strategy", "none")
    lam = float(data.get("lambda", 1.0))
    form = data.get("form", "covariance")
    if name == "none":
        return ForgettingStrategy(StrategyTag.NONE, lam, form=form)
    if name == "uniform":
        return ForgettingStrategy.uniform(lam, form=form)
    if name in ("vdf", "vdf_cost"):
        return ForgettingStrategy.variable_direction(lam, float(data.get("epsilon", DEFAULT_EPSILON)),
                                                     cost_consistent=name == "vdf_cost", form=form)
    if name in ("kreisselmeier_1", "kreisselmeier_2"):
        variant = "I" if name == "kreisselmeier_1" else "II"
        return ForgettingStrategy.kreisselmeier(lam, float(data.get("alpha", 1.0)), float(data.get("beta", 0.0)),
                                                int(data.get("n_odd", 1)), variant)
    if name == "cao":
        return ForgettingStrategy.cao(lam)
    raise ParameterOutOfRange(f"strategy must be one of {STRATEGY_NAMES}, got {name!r}")


def _unknown_keys(data: dict, allowed: set, prefix: str) -> list[str]:
    return [f"{prefix}{key}: unknown key" for key in sorted(set(data) - allowed)]


def _is_int(value) -> bool:
    return isinstance(value, (int, np.integer)) and not isinstance(value, bool)


def _parse_generator(data, errors: list[str]) -> GeneratorSpec | None:
    if not isinstance(data, dict) or "kind" not in data:
        errors.append("generator: must be an object with a 'kind'")
        return None
    try:
        spec = GeneratorSpec.from_dict(data)
    except ValueError as e:
        kinds = [k.value for k in GeneratorKind]
        errors.append(f"generator.kind: must be one of {kinds} ({e})")
        return None
    except TypeError as e:
        errors.append(f"generator: {e}")
        return None
    errors.extend(spec.validate())
    return spec


def _parse_regressor(data, errors: list[str]) -> RegressorSpec | None:
    data = {"kind": "scripted"} if data is None else data
    if not isinstance(data, dict):
        errors.append("regressor: must be an object")
        return None
    kind = data.get("kind", "scripted")
    if kind not in REGRESSOR_KINDS:
        errors.append(f"regressor.kind: must be one of {list(REGRESSOR_KINDS)}, got {kind!r}")
        return None

    if kind == "arx":
        num, den = data.get("num"), data.get("den")
        nb, na = data.get("nb"), data.get("na")
        if not isinstance(den, list) or not den or den[0] == 0:
            errors.append("regressor.den: must be a nonempty list with a nonzero leading coefficient")
            return None
        if not isinstance(num, list) or not num or len(num) > len(den):
            errors.append("regressor.num: must be a nonempty list no longer than den")
            return None
        order = len(den) - 1
        nb = order if nb is None else nb
        na = order if na is None else na
        if not (_is_int(nb) and _is_int(na) and nb >= 0 and na >= 0 and nb + na >= 1):
            errors.append(f"regressor.nb/na: must be nonnegative integers with nb + na >= 1, got {nb}, {na}")
            return None
        return RegressorSpec(kind="arx", num=tuple(float(x) for x in num), den=tuple(float(x) for x in den),
                             nb=int(nb), na=int(na), outputs_first=bool(data.get("outputs_first", False)))

    if kind == "input_window":
        width = data.get("width", 1)
        if not _is_int(width) or width < 1:
            errors.append(f"regressor.width: must be a positive integer, got {width!r}")
            return None
        return RegressorSpec(kind="input_window", width=int(width))
    return RegressorSpec(kind="scripted")


def _parse_R(raw, n: int, errors: list[str]):
    try:
        R = np.asarray(raw, dtype=float)
    except (TypeError, ValueError):
        errors.append("estimator.R: must be a number, a list or a list of lists")
        return 1.0
    if R.ndim == 0:
        if not (math.isfinite(float(R)) and float(R) > 0):
            errors.append(f"estimator.R: scalar must be positive, got {raw}")
        return float(R)
    if R.ndim == 1:
        if R.size != n or not np.all(np.isfinite(R)) or np.any(R <= 0):
            errors.append(f"estimator.R: diagonal must hold {n} positive entries")
        return tuple(R.tolist())
    if R.shape != (n, n):
        errors.append(f"estimator.R: matrix must be {n} x {n}, got {R.shape[0]} x {R.shape[1]}")
    elif not is_spd(R):
        errors.append("estimator.R: matrix must be symmetric positive definite")
    return tuple(tuple(row) for row in R.tolist())


def _parse_estimator(data, n: int | None, errors: list[str]) -> EstimatorConfig | None:
    if not isinstance(data, dict):
        errors.append("estimator: must be an object")
        return None
    errors.extend(_unknown_keys(data, ESTIMATOR_KEYS, "estimator."))
    name = data.get("strategy", "none")
    if name not in STRATEGY_NAMES:
        errors.append(f"estimator.strategy: must be one of {list(STRATEGY_NAMES)}, got {name!r}")
        return None
    if data.get("form", "covariance") not in FORMS:
        errors.append(f"estimator.form: must be one of {list(FORMS)}, got {data.get('form')!r}")
        return None
    try:
        strategy = build_strategy(data)
    except (ParameterOutOfRange, TypeError, ValueError) as e:
        errors.extend(f"estimator: {msg}" for msg in str(e).split("; "))
        return None
    if n is None:
        return None

    theta0 = data.get("theta0")
    if theta0 is not None:
        if not isinstance(theta0, list) or len(theta0) != n:
            errors.append(f"estimator.theta0: must be a list of {n} numbers")
        else:
            theta0 = tuple(float(x) for x in theta0)
    R = _parse_R(data.get("R", 1.0), n, errors)
    return EstimatorConfig(strategy=strategy, theta0=theta0, R=R)


def scenario_from_dict(data: dict, source: str = "<dict>") -> Scenario:
    """
    Validate a scenario document and build the Scenario.

    Args:
        data: parsed JSON object or builtin dict
        source: where the document came from, for messages

    Returns:
        Scenario

    Raises:
        ConfigError: listing every field-level problem found
    """
    if not isinstance(data, dict):
        raise ConfigError([f"scenario: {source} must hold a JSON object"])
    errors = _unknown_keys(data, SCENARIO_KEYS, "")

    name = data.get("name")
    if not isinstance(name, str) or not name:
        errors.append("name: must be a nonempty string")

    steps = data.get("steps")
    if not _is_int(steps) or steps < 1:
        errors.append(f"steps: must be an integer >= 1, got {steps!r}")

    seed = data.get("seed", 0)
    if not _is_int(seed) or seed < 0:
        errors.append(f"seed: must be a nonnegative integer, got {seed!r}")
        seed = 0

    generator = _parse_generator(data.get("generator"), errors)
    if generator is not None:
        generator = replace(generator, seed=int(seed))
    regressor = _parse_regressor(data.get("regressor"), errors)
    n = regressor.width_for(generator) if (regressor is not None and generator is not None) else None

    theta_true = data.get("theta_true")
    if theta_true is not None:
        if not isinstance(theta_true, list) or (n is not None and len(theta_true) != n):
            errors.append(f"theta_true: must be a list of {n} numbers")
            theta_true = None
        else:
            theta_true = tuple(float(x) for x in theta_true)
    if regressor is not None and regressor.kind == "input_window" and theta_true is None:
        errors.append("theta_true: required for input_window regressors (measurements are phi theta_true)")

    estimator = _parse_estimator(data.get("estimator", {}), n, errors)

    pe_windows = data.get("pe_windows", [])
    if not isinstance(pe_windows, list) or not all(_is_int(N) and N >= 0 for N in pe_windows):
        errors.append(f"pe_windows: must be a list of nonnegative integers, got {pe_windows!r}")
        pe_windows = []

    outputs = data.get("outputs", {})
    if not isinstance(outputs, dict):
        errors.append("outputs: must be an object")
        outputs = {}
    errors.extend(_unknown_keys(outputs, OUTPUT_KEYS, "outputs."))

    guard_kappa = data.get("guard_kappa", DEFAULT_GUARD_KAPPA)
    if not isinstance(guard_kappa, (int, float)) or not guard_kappa > 1:
        errors.append(f"guard_kappa: must be a number > 1, got {guard_kappa!r}")

    if errors:
        logger.error(f"[CONFIG] {source}: {len(errors)} problem(s)")
        for msg in errors:
            logger.error(f"[CONFIG]   {msg}")
        raise ConfigError(errors)

    return Scenario(name=name, generator=generator, regressor=regressor, estimator=estimator, steps=int(steps),
                    seed=int(seed), theta_true=theta_true, description=str(data.get("description", "")),
                    demonstrates=str(data.get("demonstrates", "")), pe_windows=tuple(int(N) for N in pe_windows),
                    outputs=OutputSpec(V=bool(outputs.get("V", False)), psi=bool(outputs.get("psi", False)),
                                       plots=bool(outputs.get("plots", False))),
                    guard_kappa=float(guard_kappa))


def scenario_to_dict(scenario: Scenario) -> dict:
    """Scenario document that ``scenario_from_dict`` maps back to the same Scenario."""
    generator = scenario.generator.to_dict()
    generator.pop("seed", None)
    data = {
        "name": scenario.name,
        "description": scenario.description,
        "demonstrates": scenario.demonstrates,
        "generator": generator,
        "regressor": scenario.regressor.to_dict(),
        "estimator": scenario.estimator.to_dict(),
        "steps": scenario.steps,
        "seed": scenario.seed,
        "pe_windows": list(scenario.pe_windows),
        "outputs": {"V": scenario.outputs.V, "psi": scenario.outputs.psi, "plots": scenario.outputs.plots},
        "guard_kappa": scenario.guard_kappa,
    }
    if scenario.theta_true is not None:
        data["theta_true"] = list(scenario.theta_true)
    return data


def with_overrides(scenario: Scenario, steps: int | None = None, seed: int | None = None,
                   plots: bool | None = None) -> Scenario:
    """Copy of ``scenario`` with command-line overrides applied."""
    errors = []
    if steps is not None and steps < 1:
        errors.append(f"steps: must be >= 1, got {steps}")
    if seed is not None and seed < 0:
        errors.append(f"seed: must be >= 0, got {seed}")
    if errors:
        raise ConfigError(errors)

    updated = scenario
    if steps is not None:
        updated = replace(updated, steps=steps)
    if seed is not None:
        updated = replace(updated, seed=seed, generator=replace(updated.generator, seed=seed))
    if plots is not None:
        updated = replace(updated, outputs=replace(updated.outputs, plots=plots))
    return updated
