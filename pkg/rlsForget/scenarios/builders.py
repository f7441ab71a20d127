import logging
from dataclasses import dataclass

import numpy as np

from rlsForget.errors import ConfigError, ParameterOutOfRange
from rlsForget.estimator.core import DataPoint, History
from rlsForget.scenarios.config import Scenario
from rlsForget.signals.inputs import default_theta, input_signal, scripted_regressors
from rlsForget.signals.lti import LtiSiso, arx_regressor, arx_theta, simulate


logger = logging.getLogger(__name__)

ARX_SELF_TEST_TOL = 1e-10


@dataclass
class ScenarioData:
    history: History
    theta_true: np.ndarray
    u: np.ndarray | None = None
    y: np.ndarray | None = None


def input_window_regressors(u: np.ndarray, width: int) -> np.ndarray:
    """Rows [u_k, u_{k-1}, .., u_{k-width+1}] for every k, zero before time 0; shape (K, width)."""
    padded = np.concatenate([np.zeros(width - 1), np.asarray(u, dtype=float)])
    windows = np.lib.stride_tricks.sliding_window_view(padded, width)
    return windows[:, ::-1].copy()


def _arx_data(scenario: Scenario) -> ScenarioData:
    reg = scenario.regressor
    try:
        system = LtiSiso(reg.num, reg.den)
        theta = arx_theta(system, reg.nb, reg.na, reg.outputs_first)
    except ParameterOutOfRange as e:
        raise ConfigError([f"regressor: {e}"]) from e

    if scenario.theta_true is not None and not np.allclose(scenario.theta_true, theta, rtol=0.0, atol=1e-12):
        logger.error(f"[CONFIG] theta_true {scenario.theta_true} disagrees with the ARX coefficients {theta}")
        raise ConfigError([f"theta_true: does not match the coefficients of num/den, expected {theta.tolist()}"])

    u = input_signal(scenario.generator, scenario.steps)
    y = simulate(system, u)
    history = History()
    worst = 0.0
    for k in range(scenario.steps):
        phi = arx_regressor(u[:k], y[:k], reg.nb, reg.na, reg.outputs_first)
        residual = abs(y[k] - (phi @ theta).item()) / max(1.0, abs(y[k]))
        worst = max(worst, residual)
        history.append(DataPoint(phi, y[k]))

    # num/den -> theta is derived mechanically; the rewrite must reproduce y exactly
    if worst > ARX_SELF_TEST_TOL:
        logger.error(f"[CONFIG] ARX self-test failed: max |y - phi theta| = {worst:.3e}")
        raise ConfigError([f"regressor: ARX rewrite does not reproduce the outputs (residual {worst:.3e})"])
    logger.debug(f"ARX self-test passed, max residual {worst:.3e}")
    return ScenarioData(history=history, theta_true=theta, u=u, y=y)


def build_data(scenario: Scenario) -> ScenarioData:
    """
    Generate the data points of ``scenario``.

    Measurements follow the exact model y_k = phi_k theta_true; no noise is added.

    Raises:
        ConfigError: the regressor description cannot produce consistent data
    """
    logger.info(f"Building {scenario.steps} data points for {scenario.name} ({scenario.regressor.kind})")
    kind = scenario.regressor.kind

    if kind == "arx":
        return _arx_data(scenario)

    if kind == "input_window":
        theta = np.asarray(scenario.theta_true, dtype=float)
        u = input_signal(scenario.generator, scenario.steps)
        phis = input_window_regressors(u, scenario.regressor.width)
        y = phis @ theta
        history = History([DataPoint(phi.reshape(1, -1), yk) for phi, yk in zip(phis, y)])
        return ScenarioData(history=history, theta_true=theta, u=u, y=y)

    theta = (default_theta(scenario.generator) if scenario.theta_true is None
             else np.asarray(scenario.theta_true, dtype=float))
    pairs = scripted_regressors(scenario.generator, scenario.steps, theta)
    history = History([DataPoint(phi, y) for phi, y in pairs])
    return ScenarioData(history=history, theta_true=theta, y=np.array([float(y[0]) for _, y in pairs]))
