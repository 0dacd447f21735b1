import math

import numpy as np
import pytest

from ltvmpc import (
    Mlp,
    NonFiniteLoss,
    SystemSpec,
    TrainConfig,
    build_ground_truth,
    flatten_stage,
    forward,
    forward_batch,
    load_checkpoints,
    mean_prediction_error,
    mse_loss,
    predict_problem_data,
    prediction_error_profile,
    save_checkpoints,
    stage_data_at,
    train,
)
from ltvmpc.mlp import init_mlp, loss_and_grads, training_data


def finite_difference_grads(m, X, Y, h=1e-5, probe=None):
    """Central-difference gradient of the loss; the independent oracle."""
    params = list(m.weights) + list(m.biases)
    fd = [np.zeros_like(p) for p in params]
    picked = []
    for j, p in enumerate(params):
        flat = p.ravel()
        idx = (range(flat.size) if probe is None
               else np.random.default_rng(7).choice(
                   flat.size, min(probe, flat.size), replace=False))
        for i in idx:
            orig = flat[i]
            flat[i] = orig + h
            lp = mse_loss(m, X, Y)
            flat[i] = orig - h
            lm = mse_loss(m, X, Y)
            flat[i] = orig
            fd[j].ravel()[i] = (lp - lm) / (2 * h)
            picked.append((j, i))
    return fd, picked


def max_relative_error(analytic, fd, picked):
    worst = 0.0
    for j, i in picked:
        a = analytic[j].ravel()[i]
        b = fd[j].ravel()[i]
        worst = max(worst, abs(a - b) / max(1.0, abs(a), abs(b)))
    return worst


def test_zero_network_outputs_bias():
    sizes = (1, 4, 4, 3)
    zero = Mlp(weights=tuple(np.zeros((a, b)) for a, b in zip(sizes, sizes[1:])),
               biases=tuple(np.zeros(b) for b in sizes[1:]))
    np.testing.assert_array_equal(forward(zero, 3.7), np.zeros(3))


def test_output_layer_is_linear():
    m = init_mlp(11, sizes=(1, 8, 8, 5))
    doubled = Mlp(
        weights=(m.weights[0], m.weights[1], 2.0 * m.weights[2]),
        biases=(m.biases[0], m.biases[1], np.zeros(5)),
    )
    base = Mlp(
        weights=m.weights,
        biases=(m.biases[0], m.biases[1], np.zeros(5)),
    )
    x = 2.5
    np.testing.assert_allclose(forward(doubled, x), 2.0 * forward(base, x))


def test_gradients_match_finite_differences_small_net():
    m = init_mlp(0, sizes=(1, 8, 8, 5))
    rng = np.random.default_rng(1)
    X = rng.uniform(0, 10, size=(8, 1))
    Y = rng.normal(size=(8, 5))
    _, gW, gb = loss_and_grads(m, X, Y)
    fd, picked = finite_difference_grads(m, X, Y)
    assert max_relative_error(gW + gb, fd, picked) < 1e-4


def test_gradients_match_finite_differences_full_net_subsample():
    truth = build_ground_truth(SystemSpec(T=20, base_seed=5))
    X, Y = training_data(truth)
    m = init_mlp(3)
    _, gW, gb = loss_and_grads(m, X, Y)
    fd, picked = finite_difference_grads(m, X, Y, probe=12)
    assert max_relative_error(gW + gb, fd, picked) < 1e-4


def test_forward_batch_matches_forward():
    # BLAS may reorder accumulation across batch sizes; agreement is to
    # rounding, not bitwise.
    m = init_mlp(2, sizes=(1, 16, 16, 20))
    times = np.array([0.0, 0.1, 5.0])
    batch = forward_batch(m, times[:, None])
    for i, t in enumerate(times):
        np.testing.assert_allclose(batch[i], forward(m, t),
                                   rtol=1e-12, atol=1e-14)


def test_training_is_deterministic():
    truth = build_ground_truth(SystemSpec(T=30, base_seed=9))
    cfg = TrainConfig(total_steps=50, checkpoint_steps=(10, 50), init_seed=4)
    a = train(truth, cfg)
    b = train(truth, cfg)
    assert [ck.step for ck in a] == [10, 50]
    for ca, cb in zip(a, b):
        assert ca.mean_error == cb.mean_error
        for Wa, Wb in zip(ca.model.weights, cb.model.weights):
            assert np.array_equal(Wa, Wb)


def test_loss_decreases_within_first_thousand_steps():
    truth = build_ground_truth(SystemSpec(T=100, base_seed=0))
    X, Y = training_data(truth)
    loss0 = mse_loss(init_mlp(0), X, Y)
    cfg = TrainConfig(total_steps=1000, checkpoint_steps=(10, 1000),
                      init_seed=0)
    cks = train(truth, cfg)
    loss1000 = mse_loss(cks[-1].model, X, Y)
    assert loss1000 < loss0


def test_mean_error_shrinks_over_full_training(full_training):
    cks = full_training["checkpoints"]
    assert cks[0].step == 10 and cks[-1].step == 50000
    assert cks[-1].mean_error < cks[0].mean_error


def test_non_finite_loss_aborts():
    # An absurd learning rate overflows the step-2 forward pass.
    truth = build_ground_truth(SystemSpec(T=20, base_seed=1))
    cfg = TrainConfig(total_steps=10, checkpoint_steps=(10,),
                      learning_rate=1e200, init_seed=0)
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(NonFiniteLoss) as exc:
            train(truth, cfg)
    assert exc.value.step == 2


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(checkpoint_steps=(10, 10, 50000))
    with pytest.raises(ValueError):
        TrainConfig(total_steps=100, checkpoint_steps=(10, 99))
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=0.0)


def test_predict_problem_data_identity_stub(monkeypatch):
    """A predictor that emits the exact flattened truth reproduces it."""
    truth = build_ground_truth(SystemSpec(T=15, base_seed=6))
    spec = SystemSpec(T=15, base_seed=6)
    exact = np.zeros((16, 20))
    for t, s in enumerate(truth.stages):
        exact[t] = flatten_stage(s)
    exact[15] = flatten_stage(stage_data_at(15, truth.dt, np.zeros(2)))

    import ltvmpc.mlp as mlp_module
    monkeypatch.setattr(mlp_module, "forward_batch", lambda m, X: exact)
    pred = predict_problem_data(init_mlp(0), spec)
    assert pred.setting == "nn"
    assert math.isnan(pred.epsilon)
    for p, s in zip(pred.stages, truth.stages):
        assert np.array_equal(flatten_stage(p), flatten_stage(s))
    np.testing.assert_array_equal(pred.P_terminal, truth.P_terminal)
    np.testing.assert_array_equal(pred.xbar_terminal, truth.xbar_terminal)


def test_trained_predictor_error_tracks_disturbance_floor(full_training):
    """Late in training the per-stage residual is set by the random
    disturbance target, not by the smooth matrix components."""
    truth = full_training["truth"]
    model = full_training["checkpoints"][-1].model
    spec = SystemSpec(T=truth.T, dt=truth.dt, x0=truth.x0)
    pred = predict_problem_data(model, spec)
    profile = prediction_error_profile(pred, truth)
    w_resid = np.array([
        np.linalg.norm(p.w - s.w) for p, s in zip(pred.stages, truth.stages)])
    # The disturbance block carries most of the residual norm.
    assert np.mean(w_resid) >= 0.5 * np.mean(profile)


def test_checkpoint_save_load_round_trip(tmp_path):
    truth = build_ground_truth(SystemSpec(T=10, base_seed=2))
    cfg = TrainConfig(total_steps=20, checkpoint_steps=(10, 20), init_seed=1)
    cks = train(truth, cfg)
    path = tmp_path / "ckpt.npz"
    save_checkpoints(path, cks)
    loaded = load_checkpoints(path)
    assert [c.step for c in loaded] == [10, 20]
    for a, b in zip(cks, loaded):
        assert a.mean_error == b.mean_error
        for Wa, Wb in zip(a.model.weights, b.model.weights):
            assert np.array_equal(Wa, Wb)
        for ba, bb in zip(a.model.biases, b.model.biases):
            assert np.array_equal(ba, bb)


def test_mean_prediction_error_definition():
    truth = build_ground_truth(SystemSpec(T=8, base_seed=3))
    m = init_mlp(0)
    X, Y = training_data(truth)
    out = forward_batch(m, X)
    expected = float(np.mean(np.linalg.norm(out - Y, axis=1)))
    assert mean_prediction_error(m, truth) == pytest.approx(expected)
