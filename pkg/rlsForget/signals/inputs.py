import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from rlsForget.errors import DimensionMismatch, ParameterOutOfRange


logger = logging.getLogger(__name__)

DEFAULT_PERIODS = (17, 23, 53)
PRNG_NAME = "numpy.random.PCG64"


class GeneratorKind(str, Enum):
    THREE_SINE = "ThreeSine"
    CONSTANT = "Constant"
    SWITCHED = "SwitchedThreeSineToConstant"
    GAUSSIAN_WHITE = "GaussianWhite"
    HARMONIC_DECAY = "HarmonicDecay"
    ZERO_AFTER = "ZeroAfter"
    SUBSPACE_SINE = "SubspaceSine"


@dataclass(frozen=True)
class GeneratorSpec:
    """Description of a deterministic scalar sequence s_k.

    Input-type kinds feed a system or an input window; scripted kinds become
    regressors directly as ``phi_k = s_k * direction``.
    """
    kind: GeneratorKind
    periods: tuple[int, ...] = DEFAULT_PERIODS
    value: float = 1.0
    switch_step: int = 2500
    seed: int = 0
    std: float = 1.0
    k0: int = 0
    period: int = 100
    direction: tuple[float, ...] = field(default=())

    def validate(self) -> list[str]:
        """Return field-level problems, empty when the spec is usable."""
        problems = []
        if any(int(p) <= 0 for p in self.periods):
            problems.append(f"generator.periods: must be positive, got {list(self.periods)}")
        if self.kind == GeneratorKind.SWITCHED and self.switch_step < 0:
            problems.append(f"generator.switch_step: must be >= 0, got {self.switch_step}")
        if self.kind == GeneratorKind.GAUSSIAN_WHITE and not self.std > 0:
            problems.append(f"generator.std: must be > 0, got {self.std}")
        if self.kind == GeneratorKind.ZERO_AFTER and self.k0 < 0:
            problems.append(f"generator.k0: must be >= 0, got {self.k0}")
        if self.kind == GeneratorKind.SUBSPACE_SINE and self.period <= 0:
            problems.append(f"generator.period: must be positive, got {self.period}")
        if not np.all(np.isfinite(self.direction)):
            problems.append("generator.direction: entries must be finite")
        return problems

    @property
    def regressor_direction(self) -> np.ndarray:
        if self.direction:
            return np.asarray(self.direction, dtype=float)
        if self.kind == GeneratorKind.SUBSPACE_SINE:
            return np.array([1.0, 1.0])
        return np.array([1.0])

    @classmethod
    def from_dict(cls, data: dict) -> "GeneratorSpec":
        kind = GeneratorKind(data["kind"])
        kwargs = {key: data[key] for key in ("value", "switch_step", "seed", "std", "k0", "period") if key in data}
        if "periods" in data:
            kwargs["periods"] = tuple(int(p) for p in data["periods"])
        if "direction" in data:
            kwargs["direction"] = tuple(float(x) for x in data["direction"])
        return cls(kind=kind, **kwargs)

    def to_dict(self) -> dict:
        data = {"kind": self.kind.value}
        if self.kind in (GeneratorKind.THREE_SINE, GeneratorKind.SWITCHED):
            data["periods"] = list(self.periods)
        if self.kind in (GeneratorKind.CONSTANT, GeneratorKind.SWITCHED, GeneratorKind.ZERO_AFTER):
            data["value"] = self.value
        if self.kind == GeneratorKind.SWITCHED:
            data["switch_step"] = self.switch_step
        if self.kind == GeneratorKind.GAUSSIAN_WHITE:
            data["seed"] = self.seed
            data["std"] = self.std
        if self.kind == GeneratorKind.ZERO_AFTER:
            data["k0"] = self.k0
        if self.kind == GeneratorKind.SUBSPACE_SINE:
            data["period"] = self.period
        if self.direction:
            data["direction"] = list(self.direction)
        return data


def three_sine(k, periods=DEFAULT_PERIODS):
    """Sum of unit sines with the given integer periods; accepts a scalar or an array of steps."""
    k = np.asarray(k, dtype=float)
    total = sum(np.sin(2.0 * np.pi * k / p) for p in periods)
    if total.ndim == 0:
        return float(total)
    return total


def gaussian_white(seed: int, std: float, steps: int) -> np.ndarray:
    """
    Zero-mean Gaussian white noise from a seeded PCG64 generator.

    Parameters
    ----------
    seed : int
        Generator seed; the same seed always yields the same stream
    std : float
        Standard deviation, must be positive
    steps : int
        Number of samples

    Returns
    -------
    np.ndarray
        Samples u_0 .. u_{steps-1}
    """
    if not std > 0:
        logger.error(f"Invalid white-noise std: {std}")
        raise ParameterOutOfRange(f"std must be positive, got {std}")
    if steps < 0:
        logger.error(f"Invalid sample count: {steps}")
        raise ParameterOutOfRange(f"steps must be >= 0, got {steps}")
    rng = np.random.default_rng(seed)
    return rng.normal(0.0, std, size=steps)


def input_signal(spec: GeneratorSpec, steps: int) -> np.ndarray:
    """Scalar sequence s_0 .. s_{steps-1} described by ``spec``."""
    k = np.arange(steps, dtype=float)
    if spec.kind == GeneratorKind.THREE_SINE:
        return three_sine(k, spec.periods)
    if spec.kind == GeneratorKind.CONSTANT:
        return np.full(steps, float(spec.value))
    if spec.kind == GeneratorKind.SWITCHED:
        return np.where(k < spec.switch_step, three_sine(k, spec.periods), float(spec.value))
    if spec.kind == GeneratorKind.GAUSSIAN_WHITE:
        return gaussian_white(spec.seed, spec.std, steps)
    if spec.kind == GeneratorKind.HARMONIC_DECAY:
        return 1.0 / np.sqrt(k + 1.0)
    if spec.kind == GeneratorKind.ZERO_AFTER:
        return np.where(k < spec.k0, float(spec.value), 0.0)
    if spec.kind == GeneratorKind.SUBSPACE_SINE:
        return np.sin(2.0 * np.pi * k / spec.period)
    logger.error(f"Unknown generator kind: {spec.kind}")
    raise ParameterOutOfRange(f"Unknown generator kind: {spec.kind}")


def default_theta(spec: GeneratorSpec) -> np.ndarray:
    if spec.kind == GeneratorKind.SUBSPACE_SINE and not spec.direction:
        return np.array([0.4, 1.4])
    return np.ones(spec.regressor_direction.size)


def scripted_regressors(spec: GeneratorSpec, steps: int, theta=None) -> list[tuple[np.ndarray, np.ndarray]]:
    """
    Regressor/measurement pairs for the scripted sequences.

    Each regressor is the scalar sequence times a fixed direction, so
    SubspaceSine gives ``sin(2 pi k / 100) [1 1]`` and the scalar kinds give
    1x1 regressors. Measurements follow the exact model ``y = phi theta``.

    Args:
        spec: generator description
        steps: number of pairs
        theta: true parameter; defaults to [0.4, 1.4] for SubspaceSine and ones otherwise

    Returns:
        list of (phi 1xn, y of length 1)

    Raises:
        DimensionMismatch: theta length differs from the regressor direction
    """
    direction = spec.regressor_direction
    theta = default_theta(spec) if theta is None else np.asarray(theta, dtype=float).ravel()
    if theta.size != direction.size:
        logger.error(f"theta has {theta.size} entries, regressor direction has {direction.size}")
        raise DimensionMismatch(f"theta length {theta.size} does not match regressor width {direction.size}")

    seq = input_signal(spec, steps)
    pairs = []
    for s in seq:
        phi = (s * direction).reshape(1, -1)
        pairs.append((phi, phi @ theta))
    return pairs

