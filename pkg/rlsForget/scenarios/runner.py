"""
Scenario execution: generate data, advance the estimator, watch for divergence
and emit the trace file.
"""
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from rlsForget.errors import InsufficientData, NumericalBreakdown
from rlsForget.estimator.core import EstimatorState, History, TraceRecord, information_matrix, init
from rlsForget.excitation.persistency import PEReport, pe_scan
from rlsForget.forgetting.dispatch import advance
from rlsForget.scenarios.builders import build_data
from rlsForget.scenarios.config import Scenario, scenario_to_dict
from rlsForget.scenarios.plots import render_plots
from rlsForget.scenarios.traceFile import build_header, traces_to_frame, write_trace


logger = logging.getLogger(__name__)

ILL_CONDITIONED_KAPPA = 1e10


@dataclass(frozen=True)
class GuardEvent:
    k: int
    reason: str

    def footer(self) -> str:
        return f"guard: tripped at k={self.k} ({self.reason})"


@dataclass
class RunResult:
    scenario: Scenario
    history: History
    theta_true: np.ndarray
    traces: list[TraceRecord]
    final_state: EstimatorState
    guard: GuardEvent | None = None
    pe_reports: dict[int, PEReport] = field(default_factory=dict)
    pinv_history: list[np.ndarray] | None = None
    frame: pd.DataFrame | None = None
    csv_path: str | None = None
    plot_paths: list[str] = field(default_factory=list)

    @property
    def tripped(self) -> bool:
        return self.guard is not None

    @property
    def completed_steps(self) -> int:
        return len(self.traces)


def _guard_reason(trace: TraceRecord, guard_kappa: float) -> str | None:
    finite = (np.all(np.isfinite(trace.theta)) and np.all(np.isfinite(trace.z))
              and np.all(np.isfinite(trace.sigma_P)))
    if not finite:
        return "non-finite value"
    if not math.isfinite(trace.kappa_P) or trace.kappa_P > guard_kappa:
        return f"kappa(P) = {trace.kappa_P:.3e} > {guard_kappa:.0e}"
    return None


def default_out_dir() -> str:
    return os.getenv("RLS_OUT_DIR", "output")


def run(scenario: Scenario, out_dir: str | None = None, write: bool = True,
        keep_information: bool = False) -> RunResult:
    """
    Run one scenario.

    Args:
        scenario: validated scenario
        out_dir: where the CSV (and plots) go; RLS_OUT_DIR or ./output by default
        write: write the trace file; tests replay in memory with write=False
        keep_information: also record P_k^-1 for k = 0..K (bound checks)

    Returns:
        RunResult; ``guard`` is set when the run stopped at the divergence guard
    """
    logger.info(f"[RUN] {scenario.name}: {scenario.steps} steps, {scenario.strategy.describe()}")
    data = build_data(scenario)
    n = scenario.n
    state = init(scenario.estimator.theta0_vector(n), scenario.estimator.R_matrix(n), scenario.strategy)

    traces = []
    pinv_history = [information_matrix(state)] if keep_information else None
    guard = None
    warned = False
    for d in data.history:
        k = state.k
        try:
            nxt, trace = advance(state, d, data.theta_true, with_psi=scenario.outputs.psi)
            if keep_information:
                pinv_history.append(information_matrix(nxt))
        except NumericalBreakdown as e:
            guard = GuardEvent(k, f"numerical breakdown: {e}")
            break
        traces.append(trace)
        state = nxt

        reason = _guard_reason(trace, scenario.guard_kappa)
        if reason is not None:
            guard = GuardEvent(k, reason)
            break
        if not warned and trace.kappa_P > ILL_CONDITIONED_KAPPA:
            logger.warning(f"[RUN] {scenario.name}: P_k ill-conditioned at k={k} (kappa {trace.kappa_P:.3e})")
            warned = True

    if guard is not None:
        logger.warning(f"[GUARD] {scenario.name}: tripped at k={guard.k}: {guard.reason}")

    pe_reports = {}
    for N in scenario.pe_windows:
        try:
            pe_reports[N] = pe_scan(data.history, N)
        except InsufficientData as e:
            logger.warning(f"[RUN] {scenario.name}: skipped PE scan for N={N}: {e}")

    result = RunResult(scenario=scenario, history=data.history, theta_true=data.theta_true, traces=traces,
                       final_state=state, guard=guard, pe_reports=pe_reports, pinv_history=pinv_history)
    p, _ = data.history.shape
    result.frame = traces_to_frame(traces, p, n, with_V=scenario.outputs.V, with_psi=scenario.outputs.psi)

    if write:
        out_dir = out_dir or default_out_dir()
        header = build_header(scenario_to_dict(scenario), scenario.seed, data.theta_true)
        footer = [guard.footer()] if guard is not None else None
        result.csv_path = write_trace(os.path.join(out_dir, f"{scenario.name}.csv"), result.frame, header, footer)
        if scenario.outputs.plots:
            result.plot_paths = render_plots(result.csv_path)

    for N, report in pe_reports.items():
        logger.info(f"[RUN] {scenario.name}: N={N} alpha_hat={report.alpha_hat:.3e} "
                    f"beta_hat={report.beta_hat:.3e} pe={report.is_pe} ({report.verdict})")
    logger.info(f"[RUN] {scenario.name}: finished {result.completed_steps}/{scenario.steps} steps")
    return result


def run_many(scenarios: list[Scenario], out_dir: str | None = None, workers: int = 1) -> list[RunResult]:
    """Run independent scenarios, in a thread pool when ``workers`` > 1; results keep the input order."""
    if workers <= 1 or len(scenarios) <= 1:
        return [run(s, out_dir) for s in scenarios]
    logger.info(f"[RUN] {len(scenarios)} scenarios on {workers} workers")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda s: run(s, out_dir), scenarios))
