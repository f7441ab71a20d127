import numpy as np
import pytest

from rlsForget.errors import DimensionMismatch, NonSPDInput, ParameterOutOfRange
from rlsForget.estimator.core import (DataPoint, History, batch_solve, error_recursion_forms,
                                      error_transition_product, information_identity_residual, information_matrix,
                                      init, is_spd, lyapunov_decrement, lyapunov_value, predicted_error,
                                      step_covariance, step_information, transition_factor_spectra, update_matrix)
from rlsForget.forgetting.strategies import ForgettingStrategy


def random_history(seed=0, steps=60, p=2, n=3, theta=None):
    """Data points y = phi theta (+ noise when theta is None)."""
    rng = np.random.default_rng(seed)
    points = []
    for _ in range(steps):
        phi = rng.normal(size=(p, n))
        y = phi @ theta if theta is not None else rng.normal(size=p)
        points.append(DataPoint(phi, y))
    return History(points)


def test_data_point_validation():
    d = DataPoint([1.0, 2.0], 3.0)
    assert d.phi.shape == (1, 2)
    assert d.p == 1 and d.n == 2
    with pytest.raises(DimensionMismatch):
        DataPoint(np.ones((2, 3)), [1.0])
    with pytest.raises(ParameterOutOfRange):
        DataPoint([np.nan, 1.0], 0.0)


def test_history_rejects_mixed_shapes():
    history = History([DataPoint([1.0, 2.0], 0.0)])
    with pytest.raises(DimensionMismatch):
        history.append(DataPoint([1.0, 2.0, 3.0], 0.0))
    assert history[:1].shape == (1, 2)


def test_init_inverts_R():
    R = np.array([[2.0, 0.5], [0.5, 1.0]])
    state = init([1.0, -1.0], R)
    assert state.k == 0
    assert np.allclose(state.P @ R, np.eye(2))
    assert state.Pinv_cache is None
    info = init([1.0, -1.0], R, ForgettingStrategy.uniform(0.9, form="information"))
    assert np.array_equal(info.Pinv_cache, R)


def test_init_rejects_bad_R():
    with pytest.raises(NonSPDInput):
        init([0.0, 0.0], [[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(NonSPDInput):
        init([0.0, 0.0], [[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(DimensionMismatch):
        init([0.0, 0.0], np.eye(3))


def test_is_spd():
    assert is_spd(np.eye(3))
    assert not is_spd(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert not is_spd(np.array([[1.0, 0.1], [0.0, 1.0]]))


def test_scalar_step_by_hand():
    state = init([0.0], [[1.0]])
    nxt, trace = step_covariance(state, DataPoint([[1.0]], [2.0]))
    assert nxt.k == 1
    assert nxt.theta[0] == pytest.approx(1.0)
    assert nxt.P[0, 0] == pytest.approx(0.5)
    assert trace.k == 0
    assert trace.z[0] == pytest.approx(-2.0)
    assert trace.sigma_P[0] == pytest.approx(0.5)
    assert trace.kappa_P == pytest.approx(1.0)


def test_scalar_step_with_forgetting():
    state = init([0.0], [[1.0]], ForgettingStrategy.uniform(0.5))
    nxt, _ = step_covariance(state, DataPoint([[1.0]], [2.0]))
    assert nxt.theta[0] == pytest.approx(4.0 / 3.0)
    assert nxt.P[0, 0] == pytest.approx(2.0 / 3.0)


def test_zero_regressor_only_inflates_P():
    state = init([0.3], [[1.0]], ForgettingStrategy.uniform(0.9))
    nxt, _ = step_covariance(state, DataPoint([[0.0]], [0.0]))
    assert nxt.theta[0] == 0.3
    assert nxt.P[0, 0] == pytest.approx(1.0 / 0.9, rel=1e-15)


@pytest.mark.parametrize("lam", [1.0, 0.99, 0.9])
def test_step_matches_batch_solve(lam):
    history = random_history(seed=1, steps=80)
    R = np.diag([1.0, 2.0, 3.0])
    theta0 = np.array([0.5, -0.5, 1.0])
    strategy = ForgettingStrategy.none() if lam == 1.0 else ForgettingStrategy.uniform(lam)
    state = init(theta0, R, strategy)
    for k, d in enumerate(history):
        state, _ = step_covariance(state, d)
        expected = batch_solve(history[:k + 1], lam, R, theta0)
        assert np.linalg.norm(state.theta - expected) <= 1e-8 * max(1.0, np.linalg.norm(expected))


def test_covariance_and_information_forms_agree():
    history = random_history(seed=2, steps=100)
    cov = init(np.zeros(3), np.eye(3), ForgettingStrategy.uniform(0.95))
    info = init(np.zeros(3), np.eye(3), ForgettingStrategy.uniform(0.95, form="information"))
    for d in history:
        cov, _ = step_covariance(cov, d)
        info, _ = step_information(info, d)
        assert np.allclose(cov.theta, info.theta, rtol=0.0, atol=1e-9)
        assert np.linalg.norm(cov.P - info.P) <= 1e-9 * np.linalg.norm(cov.P)
    assert np.allclose(information_matrix(info) @ info.P, np.eye(3), atol=1e-9)


def test_uniform_step_rejects_other_strategies():
    state = init(np.zeros(2), np.eye(2), ForgettingStrategy.cao(0.9))
    with pytest.raises(ParameterOutOfRange):
        step_covariance(state, DataPoint([1.0, 0.0], 1.0))


def test_dimension_mismatch_on_step():
    state = init(np.zeros(2), np.eye(2))
    with pytest.raises(DimensionMismatch):
        step_covariance(state, DataPoint([1.0, 0.0, 0.0], 1.0))


def test_predicted_error_and_lyapunov_value():
    state = init([1.0, 2.0], np.diag([2.0, 4.0]))
    d = DataPoint([[1.0, 1.0]], [2.5])
    assert predicted_error(state, d)[0] == pytest.approx(0.5)
    # V = err' P^-1 err with err = theta - theta_true
    assert lyapunov_value(state, [0.0, 1.0]) == pytest.approx(2.0 * 1.0 + 4.0 * 1.0)


def test_lyapunov_decrement_matches_difference():
    theta_true = np.array([1.0, -2.0, 0.5])
    history = random_history(seed=3, steps=40, p=2, theta=theta_true)
    state = init(np.zeros(3), np.eye(3), ForgettingStrategy.uniform(0.9))
    for d in history:
        before = lyapunov_value(state, theta_true)
        predicted = lyapunov_decrement(state, d, theta_true)
        state, _ = step_covariance(state, d)
        after = lyapunov_value(state, theta_true)
        assert predicted <= 0.0
        assert after - before == pytest.approx(predicted, abs=1e-9 * max(1.0, before))


def test_update_matrix_positive_definite():
    history = random_history(seed=4, steps=20, p=3)
    state = init(np.zeros(3), np.eye(3), ForgettingStrategy.uniform(0.9))
    for d in history:
        eig = np.linalg.eigvalsh(update_matrix(state, d))
        assert np.all(eig > 0.0) and np.all(eig <= 1.0 + 1e-12)
        state, _ = step_covariance(state, d)


def test_error_recursion_forms_agree():
    theta_true = np.array([0.3, 0.7, -1.0])
    history = random_history(seed=5, steps=30, p=1, theta=theta_true)
    state = init(np.zeros(3), np.eye(3), ForgettingStrategy.uniform(0.95))
    for d in history:
        nxt, _ = step_covariance(state, d)
        direct, gain_form, ratio_form = error_recursion_forms(state, nxt, d, theta_true)
        assert np.allclose(direct, gain_form, atol=1e-10)
        assert np.allclose(direct, ratio_form, atol=1e-10)
        state = nxt


def test_transition_product_maps_initial_error_to_final():
    theta_true = np.array([1.0, 0.8, 0.5])
    history = random_history(seed=6, steps=50, p=1, theta=theta_true)
    state = init(np.zeros(3), np.eye(3), ForgettingStrategy.uniform(0.9))
    for d in history:
        state, _ = step_covariance(state, d)
    product = error_transition_product(history, 0.9, np.eye(3))
    assert np.allclose(product @ (0.0 - theta_true), state.theta - theta_true, atol=1e-10)

    spectra = np.concatenate(transition_factor_spectra(history, 0.9, np.eye(3)))
    assert spectra.min() >= -1e-10
    assert spectra.max() <= 1.0 + 1e-10


def test_information_identity_without_forgetting():
    history = random_history(seed=7, steps=25)
    R = 2.0 * np.eye(3)
    state = init(np.zeros(3), R, ForgettingStrategy.none(form="information"))
    for d in history:
        state, _ = step_information(state, d)
    assert information_identity_residual(information_matrix(state), history, R) < 1e-12
    assert information_identity_residual(R, History(), R) == 0.0


def test_batch_solve_validates_inputs():
    with pytest.raises(DimensionMismatch):
        batch_solve(History(), 1.0, np.eye(2), np.zeros(2))
    history = random_history(steps=3)
    with pytest.raises(ParameterOutOfRange):
        batch_solve(history, 1.5, np.eye(3), np.zeros(3))
    with pytest.raises(DimensionMismatch):
        batch_solve(history, 1.0, np.eye(2), np.zeros(2))


def test_trace_carries_error_norm_and_V():
    theta_true = np.array([1.0, 2.0])
    state = init(np.zeros(2), np.eye(2))
    nxt, trace = step_covariance(state, DataPoint([[1.0, 0.0]], [1.0]), theta_true)
    assert trace.theta_err_norm == pytest.approx(np.linalg.norm(nxt.theta - theta_true))
    assert trace.V == pytest.approx(lyapunov_value(nxt, theta_true))
    assert trace.psi_col_norms is None
