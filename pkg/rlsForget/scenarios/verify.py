"""
Self-verification suites.

oracle      recursive estimates against direct solves and equivalent formulations
invariants  properties every run must show (monotone V, subspace confinement, floors, ...)
bounds      recorded P_k^-1 against the excitation bounds

Each check returns CheckResult entries with the observed value, the threshold
and the margin, so a report shows how close a pass was.
"""
import logging
import math
from copy import deepcopy
from dataclasses import dataclass, field, replace

import numpy as np

from rlsForget.estimator.core import (DataPoint, History, batch_solve, error_recursion_forms,
                                      error_transition_product, information_identity_residual, init,
                                      lyapunov_decrement, lyapunov_value,
                                      spd_inverse, step_covariance, step_information, symmetrize,
                                      transition_factor_spectra, update_matrix)
from rlsForget.estimator.kalmanPredictor import kalman_predictor_step
from rlsForget.excitation.bounds import (bound_converse, bound_directional_forgetting, bound_uniform_forgetting,
                                         check_bounds, converse_window, kappa_bound, without_forgetting_schedule)
from rlsForget.excitation.persistency import condition_number, pe_scan, window_sums
from rlsForget.forgetting.strategies import ForgettingStrategy
from rlsForget.forgetting.variableDirection import (build_forgetting_matrix, decompose_information,
                                                    vdf_cost_minimizer, vdf_covariance_update,
                                                    vdf_information_update, vdf_update,
                                                    vdf_update_cost_consistent)
from rlsForget.scenarios import analysis
from rlsForget.scenarios.builders import build_data
from rlsForget.scenarios.catalog import BUILTINS, builtin
from rlsForget.scenarios.config import scenario_from_dict, with_overrides
from rlsForget.scenarios.runner import run


logger = logging.getLogger(__name__)

SUITE_NAMES = ("oracle", "invariants", "bounds", "all")
SLOPE_SEEDS = (0, 1, 2)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    observed: float
    threshold: float
    relation: str = "<="
    detail: str = ""

    @property
    def margin(self) -> float:
        if self.relation == "<=":
            return self.threshold - self.observed
        return self.observed - self.threshold

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = (f"{status}  {self.name}: observed {self.observed:.6g} {self.relation} {self.threshold:.6g} "
                f"(margin {self.margin:.3g})")
        return f"{text}  {self.detail}" if self.detail else text


@dataclass
class VerifyReport:
    suite: str
    checks: list[CheckResult] = field(default_factory=list)
    corrupt_lambda: float | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def render(self) -> str:
        lines = [c.line() for c in self.checks]
        replay = "" if self.corrupt_lambda is None else f", replayed with lambda={self.corrupt_lambda:g}"
        lines.append(f"{len(self.checks) - len(self.failures)}/{len(self.checks)} checks passed "
                     f"(suite {self.suite}{replay})")
        return "\n".join(lines)


@dataclass(frozen=True)
class VerifyOptions:
    corrupt_lambda: float | None = None


def check(name: str, observed: float, threshold: float, relation: str = "<=", detail: str = "") -> CheckResult:
    observed = float(observed)
    if math.isnan(observed):
        passed = False
    elif relation == "<=":
        passed = observed <= threshold
    else:
        passed = observed >= threshold
    return CheckResult(name=name, passed=passed, observed=observed, threshold=threshold,
                       relation=relation, detail=detail)


def _variant(name: str, steps: int | None = None, seed: int | None = None, **estimator):
    """Builtin scenario with estimator fields replaced."""
    data = deepcopy(BUILTINS[name])
    data["estimator"].update(estimator)
    if steps is not None:
        data["steps"] = steps
    if seed is not None:
        data["seed"] = seed
    return scenario_from_dict(data, source=f"variant of {name}")


def _rel(a, b) -> float:
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)) / max(1.0, np.linalg.norm(b)))


def _random_config(rng: np.random.Generator):
    n = int(rng.integers(1, 7))
    p = int(rng.integers(1, 4))
    steps = int(rng.integers(20, 201))
    lam = float(rng.choice([1.0, 0.99, 0.9]))
    A = rng.normal(size=(n, n))
    R = A @ A.T + n * np.eye(n)
    theta0 = rng.normal(size=n)
    history = History([DataPoint(rng.normal(size=(p, n)), rng.normal(size=p)) for _ in range(steps)])
    return n, p, lam, R, theta0, history


def _uniform(lam: float, form: str = "covariance") -> ForgettingStrategy:
    return ForgettingStrategy.none(form=form) if lam == 1.0 else ForgettingStrategy.uniform(lam, form=form)


# ---------------------------------------------------------------- oracle suite

def check_batch_oracle(options: VerifyOptions) -> list[CheckResult]:
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(20):
        _, _, lam, R, theta0, history = _random_config(rng)
        state = init(theta0, R, _uniform(lam))
        for k, d in enumerate(history):
            state, _ = step_covariance(state, d)
            worst = max(worst, _rel(state.theta, batch_solve(history[:k + 1], lam, R, theta0)))
    return [check("oracle: recursive theta vs batch normal equations (20 configs)", worst, 1e-8)]


def check_form_equivalence(options: VerifyOptions) -> list[CheckResult]:
    rng = np.random.default_rng(2025)
    worst_theta = worst_P = 0.0
    for _ in range(20):
        _, _, lam, R, theta0, history = _random_config(rng)
        cov = init(theta0, R, _uniform(lam))
        info = init(theta0, R, _uniform(lam, form="information"))
        for d in history:
            cov, _ = step_covariance(cov, d)
            info, _ = step_information(info, d)
            worst_theta = max(worst_theta, _rel(info.theta, cov.theta))
            worst_P = max(worst_P, float(np.linalg.norm(info.P - cov.P) / np.linalg.norm(cov.P)))
    return [check("oracle: covariance vs information form, theta", worst_theta, 1e-9),
            check("oracle: covariance vs information form, P", worst_P, 1e-9)]


def check_kalman_equivalence(options: VerifyOptions) -> list[CheckResult]:
    rng = np.random.default_rng(7)
    n, p = 4, 2
    state = init(rng.normal(size=n), np.eye(n))
    x, P = state.theta.copy(), state.P.copy()
    worst = 0.0
    for _ in range(100):
        d = DataPoint(rng.normal(size=(p, n)), rng.normal(size=p))
        state, _ = step_covariance(state, d)
        x, P = kalman_predictor_step(x, P, np.eye(n), None, d.phi, np.zeros((n, n)), np.eye(p), None, d.y)
        worst = max(worst, _rel(x, state.theta), _rel(P, state.P))
    return [check("oracle: RLS without forgetting vs one-step Kalman predictor", worst, 1e-12)]


def _cost_consistent_worst(history: History, lam: float, theta0, R) -> float:
    state = init(theta0, R, ForgettingStrategy.variable_direction(lam, cost_consistent=True))
    worst = 0.0
    for k, d in enumerate(history):
        state, _ = vdf_update_cost_consistent(state, d, lam, state.strategy.epsilon, theta0)
        direct = vdf_cost_minimizer(history[:k + 1], state.strategy_state["R_prev"], theta0)
        worst = max(worst, _rel(state.theta, direct))
    return worst


def check_cost_consistency(options: VerifyOptions) -> list[CheckResult]:
    subspace = build_data(builtin("vdf-cost-subspace"))
    rng = np.random.default_rng(11)
    white = History([DataPoint(rng.normal(size=(1, 3)), rng.normal(size=1)) for _ in range(50)])
    return [
        check("oracle: cost-consistent VDF vs direct minimizer, subspace regressor",
              _cost_consistent_worst(subspace.history[:50], 0.95, np.zeros(2), np.eye(2)), 1e-8),
        check("oracle: cost-consistent VDF vs direct minimizer, white-noise regressor",
              _cost_consistent_worst(white, 0.95, np.zeros(3), np.eye(3)), 1e-8),
    ]


def check_vdf_uniform_reduction(options: VerifyOptions) -> list[CheckResult]:
    data = build_data(_variant("fir3-rate-099", steps=500))
    lam, epsilon = 0.99, 1e-30
    # the first regressors are zero padded, so P_k stays diagonal until the window fills
    uniform = init(np.zeros(3), np.eye(3), ForgettingStrategy.uniform(lam))
    for d in data.history[:5]:
        uniform, _ = step_covariance(uniform, d)
    directional = replace(uniform, strategy=ForgettingStrategy.variable_direction(lam, epsilon))
    worst, min_norm = 0.0, math.inf
    for d in data.history[5:]:
        uniform, _ = step_covariance(uniform, d)
        directional, trace = vdf_update(directional, d, lam, epsilon)
        min_norm = min(min_norm, float(trace.psi_col_norms.min()))
        worst = max(worst, _rel(directional.theta, uniform.theta),
                    float(np.linalg.norm(directional.P - uniform.P) / np.linalg.norm(uniform.P)))
    return [check("oracle: VDF with every direction rich equals uniform forgetting", worst, 1e-8,
                  detail=f"smallest column norm {min_norm:.3e} > epsilon {epsilon:g}")]


def check_transition_product(options: VerifyOptions) -> list[CheckResult]:
    history = build_data(_variant("fir3-rate-099", steps=2000)).history
    product = error_transition_product(history, 0.99, np.eye(3))
    spectra = np.concatenate(transition_factor_spectra(history, 0.99, np.eye(3)))
    return [check("oracle: norm of the error transition product at k = 2000", np.linalg.norm(product, 2), 1e-6),
            check("oracle: transition factor eigenvalues, lowest", spectra.min(), -1e-10, relation=">="),
            check("oracle: transition factor eigenvalues, highest", spectra.max(), 1.0 + 1e-10)]


# ------------------------------------------------------------ invariants suite

def _V_increments(values: np.ndarray) -> float:
    """Largest step-to-step increase of V, relative to max(1, V)."""
    previous = values[:-1]
    return float(np.max((values[1:] - previous) / np.maximum(1.0, previous)))


def _V_series(result) -> np.ndarray:
    n = result.scenario.n
    V0 = lyapunov_value(init(result.scenario.estimator.theta0_vector(n), result.scenario.estimator.R_matrix(n),
                             result.scenario.strategy), result.theta_true)
    return np.array([V0] + [t.V for t in result.traces])


def check_lyapunov(options: VerifyOptions) -> list[CheckResult]:
    uniform = run(builtin("pe-bounds"), write=False)
    directional = run(builtin("subspace-sine-vdf"), write=False)
    results = [check("invariants: V nonincreasing under uniform forgetting", _V_increments(_V_series(uniform)), 1e-12),
               check("invariants: V nonincreasing under VDF", _V_increments(_V_series(directional)), 1e-12)]

    data = build_data(_variant("fir3-rate-099", steps=300))
    state = init(np.zeros(3), np.eye(3), ForgettingStrategy.uniform(0.99))
    worst_decrement = worst_forms = 0.0
    min_update_eig = math.inf
    for d in data.history:
        V = lyapunov_value(state, data.theta_true)
        predicted = lyapunov_decrement(state, d, data.theta_true)
        min_update_eig = min(min_update_eig, float(np.linalg.eigvalsh(update_matrix(state, d)).min()))
        nxt, _ = step_covariance(state, d)
        actual = lyapunov_value(nxt, data.theta_true) - V
        worst_decrement = max(worst_decrement, abs(actual - predicted) / max(1.0, V))
        direct, gain_form, ratio_form = error_recursion_forms(state, nxt, d, data.theta_true)
        scale = max(1.0, float(np.linalg.norm(state.theta - data.theta_true)))
        worst_forms = max(worst_forms, float(np.linalg.norm(direct - gain_form)) / scale,
                          float(np.linalg.norm(direct - ratio_form)) / scale)
        state = nxt
    results += [check("invariants: closed-form V decrement", worst_decrement, 1e-8),
                check("invariants: parameter-error recursion forms agree", worst_forms, 1e-9),
                check("invariants: update matrix positive definite", min_update_eig, 0.0, relation=">=")]
    return results


def check_subspace_confinement(options: VerifyOptions) -> list[CheckResult]:
    result = run(builtin("subspace-sine"), write=False)
    thetas = np.array([t.theta for t in result.traces])
    residuals = analysis.offspan_residuals(thetas, analysis.regressor_span(result.history))
    norms = np.linalg.norm(thetas, axis=1)
    relative = np.where(norms > 0, residuals / np.where(norms > 0, norms, 1.0), residuals)
    return [check("invariants: estimates stay in the regressor span", relative.max(), 1e-9)]


def check_information_identity(options: VerifyOptions) -> list[CheckResult]:
    result = run(builtin("pe-lost-bounds-nf"), write=False, keep_information=True)
    R = result.pinv_history[0]
    worst = 0.0
    for k in range(1, len(result.pinv_history), 250):
        worst = max(worst, information_identity_residual(result.pinv_history[k], result.history[:k], R))
    return [check("invariants: P_k^-1 = P_0^-1 + F_(0,k-1) without forgetting", worst, 1e-10)]


def check_vdf_matrices(options: VerifyOptions) -> list[CheckResult]:
    rng = np.random.default_rng(5)
    n, lam = 4, 0.9
    worst_lower = worst_upper = worst_duality = 0.0
    for _ in range(20):
        Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
        P = symmetrize((Q * rng.uniform(0.1, 10.0, size=n)) @ Q.T)
        phi = (rng.normal(size=2) @ Q[:, :2].T).reshape(1, -1)
        decomp = decompose_information(P, phi, 1e-8)
        fm = build_forgetting_matrix(decomp, lam)
        Pinv = spd_inverse(P)
        scale = float(np.linalg.norm(Pinv, 2))
        squeezed = fm.Lambda @ Pinv @ fm.Lambda
        worst_lower = max(worst_lower, -float(np.linalg.eigvalsh(symmetrize(squeezed - lam * Pinv)).min()) / scale)
        worst_upper = max(worst_upper, -float(np.linalg.eigvalsh(symmetrize(Pinv - squeezed)).min()) / scale)
        product = vdf_information_update(Pinv, phi, fm) @ vdf_covariance_update(P, phi, fm)
        worst_duality = max(worst_duality, float(np.linalg.norm(product - np.eye(n))) / condition_number(P))
    return [check("invariants: lam P^-1 <= Lambda P^-1 Lambda", worst_lower, 1e-10),
            check("invariants: Lambda P^-1 Lambda <= P^-1", worst_upper, 1e-10),
            check("invariants: VDF information and covariance updates are inverse", worst_duality, 1e-8)]


def check_non_rich_preservation(options: VerifyOptions) -> list[CheckResult]:
    scenario = builtin("subspace-sine-vdf")
    data = build_data(scenario)
    lam, epsilon = scenario.strategy.lam, scenario.strategy.epsilon
    state = init(scenario.estimator.theta0_vector(2), scenario.estimator.R_matrix(2), scenario.strategy)
    worst, checked = 0.0, 0
    for d in data.history:
        decomp = decompose_information(state.P, d.phi, epsilon)
        nxt, _ = vdf_update(state, d, lam, epsilon)
        Pinv_next = spd_inverse(nxt.P)
        for i in np.flatnonzero(~decomp.rich_mask):
            u = decomp.U[:, i]
            worst = max(worst, abs(float(u @ Pinv_next @ u) - decomp.sigma_inv[i]) / decomp.sigma_inv[i])
            checked += 1
        state = nxt
    return [check("invariants: non-rich singular values of P^-1 unchanged by VDF", worst, 1e-9,
                  detail=f"{checked} direction-steps checked")]


def check_matrix_forgetting(options: VerifyOptions) -> list[CheckResult]:
    results = []
    for name in ("kreisselmeier-floor", "kreisselmeier-floor-2"):
        result = run(builtin(name), write=False, keep_information=True)
        alpha = result.scenario.strategy.alpha
        floor = min(float(np.linalg.eigvalsh(M).min()) for M in result.pinv_history)
        results.append(check(f"invariants: {name} keeps P^-1 >= alpha I", floor, alpha - 1e-9, relation=">=",
                             detail=f"{result.completed_steps} steps"))

    cao = run(builtin("cao-subspace"), write=False)
    sigma_max = analysis.sigma_max_series(cao.traces)
    results.append(check("invariants: Cao forgetting keeps P bounded", sigma_max.max(), 2.0,
                         detail=f"guard {'tripped' if cao.tripped else 'quiet'}, "
                                f"freeze ratio {analysis.freeze_ratio(sigma_max):.4f}"))
    results.append(check("invariants: Cao forgetting completes", float(cao.completed_steps),
                         float(cao.scenario.steps), relation=">="))
    return results


def check_pe_verdicts(options: VerifyOptions) -> list[CheckResult]:
    results = []
    for name, N, expected in (("pe-bounds", 2, True), ("pe-bounds", 10, True), ("pe-lost-bounds", 2, False),
                              ("subspace-sine", 10, False)):
        report = pe_scan(build_data(builtin(name)).history, N)
        ratio = report.alpha_hat / report.beta_hat if report.beta_hat > 0 else 0.0
        results.append(CheckResult(name=f"invariants: {name} N={N} persistently exciting = {expected}",
                                   passed=report.is_pe == expected, observed=ratio, threshold=report.tol,
                                   relation=">=" if expected else "<=",
                                   detail=f"alpha_hat {report.alpha_hat:.3e}, beta_hat {report.beta_hat:.3e}"))
    return results


def check_scalar_asymptotics(options: VerifyOptions) -> list[CheckResult]:
    constant = run(builtin("scalar-constant"), write=False)
    P_final = constant.traces[-1].sigma_P[0]

    zero_after = run(builtin("scalar-zero-after"), write=False)
    lam = zero_after.scenario.strategy.lam
    k0 = zero_after.scenario.generator.k0
    P = analysis.sigma_max_series(zero_after.traces)
    thetas = np.array([t.theta[0] for t in zero_after.traces])
    ratio_error = float(np.max(np.abs(P[k0:] / P[k0 - 1:-1] * lam - 1.0)))
    drift = float(np.max(np.abs(np.diff(thetas[k0 - 1:]))))
    return [check("invariants: constant scalar regressor, P_final - (1 - lam)", abs(P_final - 0.1), 1e-10),
            check("invariants: zero regressor, P grows by 1/lam per step", ratio_error, 1e-12),
            check("invariants: zero regressor, theta frozen", drift, 0.0)]


def check_z_convergence(options: VerifyOptions) -> list[CheckResult]:
    results = []
    for scenario in (with_overrides(builtin("first-order-const"), steps=20000), builtin("first-order-noise"),
                     builtin("arx5-vdf")):
        result = run(scenario, write=False)
        results.append(check(f"invariants: {scenario.name} max |z_k| over the last 100 steps",
                             analysis.max_abs_z(result.traces, 100), 1e-6,
                             detail=f"{result.completed_steps} steps"))
    return results


def check_loss_of_excitation(options: VerifyOptions) -> list[CheckResult]:
    uniform = run(builtin("arx5-uniform"), write=False)
    kappa = max(t.kappa_P for t in uniform.traces)
    results = [CheckResult(name="invariants: arx5-uniform trips the guard or exceeds kappa 1e10",
                           passed=uniform.tripped or kappa > 1e10, observed=kappa, threshold=1e10, relation=">=",
                           detail=f"guard {uniform.guard.footer() if uniform.tripped else 'quiet'}")]

    for name in ("arx5-vdf", "arx5-vdf-slow"):
        results += _vdf_run_checks(run(builtin(name), write=False), freeze=name == "arx5-vdf")
    return results


def _vdf_run_checks(directional, freeze: bool) -> list[CheckResult]:
    name = directional.scenario.name
    sigma_max = analysis.sigma_max_series(directional.traces)
    P0_max = float(np.linalg.norm(spd_inverse(directional.scenario.estimator.R_matrix(directional.scenario.n)), 2))
    # reported only; the growth before the freeze exceeds 1e3 sigma_max(P_0) for both lambdas
    margin = f"max sigma_max(P) / sigma_max(P_0) = {sigma_max.max() / P0_max:.3e}"
    rich = analysis.rich_counts(directional.traces[-50:])
    results = [
        check(f"invariants: {name} completes without tripping the guard", float(directional.tripped), 0.0),
        check(f"invariants: {name} completes every step", float(directional.completed_steps),
              float(directional.scenario.steps), relation=">=", detail=margin),
        CheckResult(name=f"invariants: {name} six rich directions at steady state",
                    passed=bool(np.all(rich == 6)), observed=float(rich.min()), threshold=6.0, relation=">=",
                    detail=f"rich counts over the last 50 steps: {sorted(set(rich.tolist()))}"),
    ]
    if freeze:
        results.append(check(f"invariants: {name} sigma_max(P) frozen (second half / first half)",
                             analysis.freeze_ratio(sigma_max), 1.001, detail=margin))
    return results


def check_condition_number(options: VerifyOptions) -> list[CheckResult]:
    result = run(builtin("arx5-condition"), write=False)
    kappa = max(t.kappa_P for t in result.traces)
    return [CheckResult(name="invariants: arx5-condition kappa(P_k) exceeds 1e10 before k = 1e4",
                        passed=result.tripped or kappa > 1e10, observed=kappa, threshold=1e10, relation=">=")]


def check_convergence_rates(options: VerifyOptions) -> list[CheckResult]:
    results = []
    for seed in SLOPE_SEEDS:
        k, err = analysis.error_norms(run(with_overrides(builtin("fir3-rate"), seed=seed), write=False).traces)
        slope = analysis.loglog_slope(k, err, 100, 10000)
        results.append(check(f"invariants: fir3 lam=1 log-log slope distance from -1, seed {seed}",
                             abs(slope + 1.0), 0.3, detail=f"slope {slope:.4f}"))
        for name, lam, window in (("fir3-rate-0999", 0.999, (3000, 10000)), ("fir3-rate-099", 0.99, (500, 2000))):
            k, err = analysis.error_norms(run(with_overrides(builtin(name), seed=seed), write=False).traces)
            slope = analysis.semilog_slope(k, err, *window)
            deviation = abs(slope - math.log(lam)) / abs(math.log(lam))
            results.append(check(f"invariants: fir3 lam={lam} semilog slope vs log(lam), seed {seed}",
                                 deviation, 0.15, detail=f"slope {slope:.4e}, log(lam) {math.log(lam):.4e}"))
    return results


# ---------------------------------------------------------------- bounds suite

def _replay_lambda(nominal: float, options: VerifyOptions) -> float:
    return nominal if options.corrupt_lambda is None else options.corrupt_lambda


def _replay(name: str, options: VerifyOptions, strategy: str, lam: float, **extra):
    replay_lam = _replay_lambda(lam, options)
    if strategy == "none" and replay_lam != 1.0:
        strategy = "uniform"
    scenario = _variant(name, strategy=strategy, form="information", **{"lambda": replay_lam}, **extra)
    return run(scenario, write=False, keep_information=True)


def check_uniform_bounds(options: VerifyOptions) -> list[CheckResult]:
    lam = 0.99
    result = _replay("pe-bounds", options, "uniform", lam)
    results = []
    for N in (2, 10):
        report = pe_scan(result.history, N)
        bound = bound_uniform_forgetting(N, report.alpha_hat, report.beta_hat, lam, result.pinv_history[N])
        outcome = check_bounds(result.pinv_history, bound)
        results.append(check(f"bounds: uniform_forgetting N={N} violations", outcome.violations, 0,
                             detail=f"worst margin {outcome.worst_margin:.3e}"))

        ceiling = kappa_bound(N, report.alpha_hat, report.beta_hat, lam, result.pinv_history[N])
        kappa = max(condition_number(M) for M in result.pinv_history[N + 1:])
        results.append(check(f"bounds: kappa(P_k) within the excitation bound, N={N}", kappa, ceiling))
    return results


def check_no_forgetting_bounds(options: VerifyOptions) -> list[CheckResult]:
    result = _replay("pe-bounds", options, "none", 1.0)
    N = 2
    report = pe_scan(result.history, N)
    schedule = without_forgetting_schedule(len(result.pinv_history), N, report.alpha_hat, report.beta_hat,
                                           result.pinv_history[0])
    outcome = check_bounds(result.pinv_history, schedule)
    return [check(f"bounds: without_forgetting N={N} violations", outcome.violations, 0,
                  detail=f"worst margin {outcome.worst_margin:.3e}")]


def check_directional_bounds(options: VerifyOptions) -> list[CheckResult]:
    lam = 0.99
    result = _replay("pe-bounds", options, "vdf", lam, epsilon=1e-8)
    results = []
    for N in (2, 10):
        report = pe_scan(result.history, N)
        outcome = check_bounds(result.pinv_history, bound_directional_forgetting(N, report.alpha_hat, lam))
        results.append(check(f"bounds: directional_forgetting N={N} violations", outcome.violations, 0,
                             detail=f"worst margin {outcome.worst_margin:.3e}"))
    return results


def check_converse_bounds(options: VerifyOptions) -> list[CheckResult]:
    lam = 0.9
    data = {"name": "converse-round-trip", "generator": {"kind": "GaussianWhite", "std": 1.0},
            "regressor": {"kind": "input_window", "width": 2}, "theta_true": [1.0, -0.5],
            "estimator": {"strategy": "uniform", "lambda": _replay_lambda(lam, options), "form": "information",
                          "R": 10.0},
            "steps": 3000, "seed": 0}
    result = run(scenario_from_dict(data), write=False, keep_information=True)
    eigs = np.array([np.linalg.eigvalsh(M) for M in result.pinv_history])
    alpha_bar, beta_bar = float(eigs.min()), float(eigs.max())
    N = converse_window(lam, alpha_bar, beta_bar)
    bound = bound_converse(lam, alpha_bar, beta_bar, N)
    outcome = check_bounds(list(window_sums(result.history, N)), bound)
    return [check(f"bounds: converse N={N} violations", outcome.violations, 0,
                  detail=f"alpha_bar {alpha_bar:.3e}, beta_bar {beta_bar:.3e}, certified lower {bound.lower:.3e}")]


SUITES = {
    "oracle": (check_batch_oracle, check_form_equivalence, check_kalman_equivalence, check_cost_consistency,
               check_vdf_uniform_reduction, check_transition_product),
    "invariants": (check_lyapunov, check_subspace_confinement, check_information_identity, check_vdf_matrices,
                   check_non_rich_preservation, check_matrix_forgetting, check_pe_verdicts, check_scalar_asymptotics,
                   check_z_convergence, check_loss_of_excitation, check_condition_number, check_convergence_rates),
    "bounds": (check_uniform_bounds, check_no_forgetting_bounds, check_directional_bounds, check_converse_bounds),
}


def verify(suite: str = "all", corrupt_lambda: float | None = None) -> VerifyReport:
    """
    Run a verification suite.

    Args:
        suite: oracle, invariants, bounds or all
        corrupt_lambda: replay the bounds scenarios with this forgetting factor while the
            bounds keep the nominal one (negative control)

    Returns:
        VerifyReport; ``passed`` is False when any check fails or raises
    """
    if suite not in SUITE_NAMES:
        logger.error(f"[VERIFY] Unknown suite: {suite}")
        raise ValueError(f"suite must be one of {SUITE_NAMES}, got {suite!r}")
    if corrupt_lambda is not None and not 0.0 < corrupt_lambda <= 1.0:
        logger.error(f"[VERIFY] Invalid corrupt lambda: {corrupt_lambda}")
        raise ValueError(f"corrupt lambda must be in (0, 1], got {corrupt_lambda}")

    options = VerifyOptions(corrupt_lambda=corrupt_lambda)
    names = ("oracle", "invariants", "bounds") if suite == "all" else (suite,)
    report = VerifyReport(suite=suite, corrupt_lambda=corrupt_lambda)
    for name in names:
        logger.info(f"[VERIFY] Running {name} suite")
        for fn in SUITES[name]:
            try:
                report.checks.extend(fn(options))
            except Exception as e:
                logger.error(f"[VERIFY] {fn.__name__} raised {type(e).__name__}: {e}")
                logger.exception(e)
                report.checks.append(CheckResult(name=f"{name}: {fn.__name__}", passed=False, observed=math.nan,
                                                 threshold=math.nan, detail=f"{type(e).__name__}: {e}"))
    for failure in report.failures:
        logger.warning(f"[VERIFY] {failure.line()}")
    logger.info(f"[VERIFY] {suite}: {'passed' if report.passed else 'FAILED'}")
    return report
