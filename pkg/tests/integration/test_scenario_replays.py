import numpy as np
import pytest

from rlsForget.estimator.core import information_matrix
from rlsForget.excitation.bounds import bound_uniform_forgetting, check_bounds
from rlsForget.scenarios import analysis
from rlsForget.scenarios.catalog import builtin
from rlsForget.scenarios.config import with_overrides
from rlsForget.scenarios.runner import run, run_many


@pytest.mark.integration
class TestScalarReplays:
    """Scalar regressors with and without persistent excitation"""

    @pytest.fixture(scope="class")
    def constant(self):
        return run(builtin("scalar-constant"), write=False)

    @pytest.fixture(scope="class")
    def zero_after(self):
        return run(builtin("scalar-zero-after"), write=False)

    def test_constant_regressor_P_limit(self, constant):
        assert not constant.tripped
        assert constant.final_state.P[0, 0] == pytest.approx(0.1, abs=1e-10)
        assert constant.pe_reports[1].is_pe

    def test_constant_regressor_V_nonincreasing(self, constant):
        V = np.array([t.V for t in constant.traces])
        assert np.all(np.diff(V) <= 1e-12 * np.maximum(1.0, V[:-1]))
        assert analysis.max_abs_z(constant.traces, 100) < 1e-10

    def test_zero_regressor_inflates_P(self, zero_after):
        sigma = analysis.sigma_max_series(zero_after.traces)
        ratios = sigma[51:] / sigma[50:-1]
        assert np.allclose(ratios, 1.0 / 0.9, rtol=1e-12)
        thetas = np.array([t.theta for t in zero_after.traces[50:]])
        assert np.all(thetas == thetas[0])


@pytest.mark.integration
class TestSubspaceReplays:
    """Regressor confined to the line spanned by [1 1]"""

    @pytest.fixture(scope="class")
    def no_forgetting(self):
        return run(builtin("subspace-sine"), write=False)

    @pytest.fixture(scope="class")
    def directional(self):
        return run(builtin("subspace-sine-vdf"), write=False)

    def test_estimates_stay_in_the_regressor_span(self, no_forgetting):
        basis = analysis.regressor_span(no_forgetting.history)
        thetas = np.array([t.theta for t in no_forgetting.traces])
        residuals = analysis.offspan_residuals(thetas, basis)
        assert residuals.max() <= 1e-9 * max(1.0, np.abs(thetas).max())

    def test_one_singular_value_decays(self, no_forgetting):
        sigma = no_forgetting.traces[-1].sigma_P
        assert sigma[0] == pytest.approx(1.0, rel=1e-9)
        assert sigma[1] < 1e-2
        assert not no_forgetting.pe_reports[10].is_pe

    def test_vdf_keeps_the_unexcited_direction(self, directional):
        assert not directional.tripped
        # at most one forgetting step can act on [1 -1], while P_0 = I is still degenerate
        sigma_max = analysis.sigma_max_series(directional.traces)
        assert sigma_max.max() <= 1.0 / 0.99 + 1e-9
        assert analysis.freeze_ratio(sigma_max) <= 1.0 + 1e-9
        assert analysis.rich_counts(directional.traces)[-500:].max() <= 1


@pytest.mark.integration
class TestPersistentExcitationReplay:
    """Two-tap input window driven by the three-sine input"""

    @pytest.fixture(scope="class")
    def replay(self):
        return run(builtin("pe-bounds"), write=False, keep_information=True)

    def test_record_is_persistently_exciting(self, replay):
        for N in (2, 10):
            assert replay.pe_reports[N].is_pe
            assert replay.pe_reports[N].alpha_hat > 0.0

    def test_uniform_forgetting_bounds_hold(self, replay):
        assert len(replay.pinv_history) == replay.scenario.steps + 1
        report = replay.pe_reports[2]
        bound = bound_uniform_forgetting(2, report.alpha_hat, report.beta_hat, 0.99, replay.pinv_history[2])
        assert check_bounds(replay.pinv_history, bound).passed

    def test_estimate_converges(self, replay):
        assert np.allclose(replay.final_state.theta, [1.0, -0.5], atol=1e-8)
        assert np.allclose(information_matrix(replay.final_state), replay.pinv_history[-1])


@pytest.mark.integration
class TestFirstOrderReplays:
    """0.8/(q - 0.4) under both readings of its input"""

    @pytest.fixture(scope="class")
    def noise(self):
        return run(builtin("first-order-noise"), write=False)

    @pytest.fixture(scope="class")
    def constant(self):
        return run(with_overrides(builtin("first-order-const"), steps=20000), write=False)

    def test_white_noise_reaches_the_true_parameters(self, noise):
        assert noise.completed_steps == 10000
        assert analysis.max_abs_z(noise.traces, 100) < 1e-6
        assert np.allclose(noise.final_state.theta, [0.4, 0.8], rtol=0.0, atol=1e-5)

    def test_constant_input_limit_fits_the_steady_state(self, constant):
        assert analysis.max_abs_z(constant.traces, 100) < 1e-6
        # u = 1 settles y at 0.8 / 0.6, so only theta_1 y + theta_2 = y is identified
        y_ss = 0.8 / 0.6
        a, b = constant.final_state.theta
        assert a * y_ss + b == pytest.approx(y_ss, abs=1e-6)


@pytest.mark.integration
class TestVariableDirectionArx:
    """Fifth-order ARX fit under variable-direction forgetting with lambda 0.999"""

    @pytest.fixture(scope="class")
    def slow(self):
        return run(builtin("arx5-vdf-slow"), write=False)

    def test_completes_without_guard_trip(self, slow):
        assert not slow.tripped
        assert slow.completed_steps == 20000
        assert np.all(np.isfinite(analysis.sigma_max_series(slow.traces)))

    def test_six_rich_directions_at_steady_state(self, slow):
        assert np.all(analysis.rich_counts(slow.traces[-50:]) == 6)


@pytest.mark.integration
class TestTraceDeterminism:
    """Same scenario and seed give byte-identical trace bodies"""

    @staticmethod
    def body(path):
        with open(path, "r", encoding="utf-8") as f:
            return [line for line in f if not line.startswith("# created:")]

    def test_repeat_runs_match(self, tmp_path):
        scenario = with_overrides(builtin("first-order-noise"), steps=500, seed=3)
        first = run(scenario, out_dir=str(tmp_path / "a"))
        second = run(scenario, out_dir=str(tmp_path / "b"))
        assert self.body(first.csv_path) == self.body(second.csv_path)

    def test_parallel_runs_match_sequential(self, tmp_path):
        scenarios = [with_overrides(builtin(name), steps=300) for name in ("scalar-constant", "arx5-vdf", "pe-bounds")]
        sequential = run_many(scenarios, str(tmp_path / "seq"), workers=1)
        parallel = run_many(scenarios, str(tmp_path / "par"), workers=3)
        assert [r.scenario.name for r in parallel] == [s.name for s in scenarios]
        for a, b in zip(sequential, parallel):
            assert self.body(a.csv_path) == self.body(b.csv_path)

    def test_parallel_plots_keep_their_own_titles(self, tmp_path):
        names = ("scalar-constant", "pe-bounds", "subspace-sine-vdf")
        scenarios = [with_overrides(builtin(name), steps=200, plots=True) for name in names]
        results = run_many(scenarios, str(tmp_path), workers=3)
        for result in results:
            own = result.scenario.name
            assert len(result.plot_paths) >= 3
            for path in result.plot_paths:
                with open(path, "r", encoding="utf-8") as f:
                    svg = f.read()
                assert f"{own}: " in svg
                assert not any(f"{other}: " in svg for other in names if other != own)
