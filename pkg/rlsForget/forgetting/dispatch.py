import logging
from dataclasses import replace

from rlsForget.errors import ParameterOutOfRange
from rlsForget.estimator.core import (DataPoint, EstimatorState, TraceRecord, make_trace, predicted_error,
                                      step_covariance, step_information)
from rlsForget.forgetting.matrixForgetting import cao_update, kreisselmeier_update
from rlsForget.forgetting.strategies import StrategyTag
from rlsForget.forgetting.variableDirection import (decompose_information, vdf_update,
                                                    vdf_update_cost_consistent, vdf_update_information)


logger = logging.getLogger(__name__)


def advance(state: EstimatorState, d: DataPoint, theta_true=None,
            with_psi: bool = False) -> tuple[EstimatorState, TraceRecord]:
    """
    Run one step with whatever strategy ``state`` carries.

    Args:
        state: current state
        d: data point k
        theta_true: optional true parameter for the error diagnostics
        with_psi: attach information content to the trace for strategies that do not compute it

    Returns:
        (next state, trace record of step k)
    """
    strategy = state.strategy
    tag = strategy.tag

    if tag in (StrategyTag.NONE, StrategyTag.UNIFORM):
        step = step_information if strategy.form == "information" else step_covariance
        if not with_psi:
            return step(state, d, theta_true)
        decomp = decompose_information(state.P, d.phi, strategy.epsilon)
        nxt, trace = step(state, d, theta_true)
        return nxt, replace(trace, psi_col_norms=decomp.col_norms, rich_count=decomp.rich_count)

    if tag == StrategyTag.VARIABLE_DIRECTION:
        if strategy.cost_consistent:
            return vdf_update_cost_consistent(state, d, strategy.lam, strategy.epsilon,
                                              state.strategy_state["theta0"], theta_true)
        if strategy.form == "information":
            return vdf_update_information(state, d, strategy.lam, strategy.epsilon, theta_true)
        return vdf_update(state, d, strategy.lam, strategy.epsilon, theta_true)

    z = predicted_error(state, d)
    decomp = decompose_information(state.P, d.phi, strategy.epsilon) if with_psi else None
    if strategy.is_kreisselmeier:
        variant = "I" if tag == StrategyTag.KREISSELMEIER_I else "II"
        nxt = kreisselmeier_update(state, d, strategy.lam, strategy.alpha, strategy.beta, strategy.n_odd, variant)
    elif tag == StrategyTag.CAO:
        nxt = cao_update(state, d, strategy.lam)
    else:
        logger.error(f"No update registered for strategy {tag}")
        raise ParameterOutOfRange(f"unsupported strategy {tag}")

    if decomp is None:
        return nxt, make_trace(state.k, z, nxt, theta_true)
    return nxt, make_trace(state.k, z, nxt, theta_true, psi_col_norms=decomp.col_norms,
                           rich_count=decomp.rich_count)
