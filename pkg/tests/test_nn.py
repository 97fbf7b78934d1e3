"""Dense nets, Gaussian head, Adam and gradient checks."""
import math

import numpy as np
import pytest

from src.agents.policies import DistilledPolicy, ModelFreePolicy
from src.nn.dense import DenseNet, HeadLayout, NetSpec, backward, forward, orthogonal, param_count
from src.nn.gaussian import gaussian_entropy, gaussian_logprob, gaussian_sample
from src.nn.gradcheck import EXPERIMENT_SPECS, check_net, run_suite
from src.nn.optim import Adam, AdamState, NonFiniteGradientError, ParamLabel, adam_step
from src.utils.rng import make_rng


@pytest.mark.parametrize("hidden,separate,combined", [
    ((32,), 549, 325),
    ((64, 64), 9413, 4805),
    ((128, 128, 128, 128), 101253, 50821),
])
def test_param_count_table(hidden, separate, combined):
    spec = NetSpec(6, hidden, 2)
    assert param_count(spec, HeadLayout.ACTOR_CRITIC_SEPARATE) == separate
    assert param_count(spec, 'combined-distilled') == combined


def test_zero_net_outputs_zero():
    net = DenseNet(NetSpec(6, (5,), 3))
    np.testing.assert_array_equal(net.forward(np.ones(6)), np.zeros(3))


def test_single_hidden_unit_with_zero_weight_outputs_bias():
    net = DenseNet(NetSpec(4, (1,), 4))
    net.biases[-1][...] = [0.1, -0.2, 0.3, 0.4]
    np.testing.assert_array_equal(net.forward(np.array([1.0, 2.0, 3.0, 4.0])), net.biases[-1])


def test_forward_matches_loop_oracle(rng):
    net = DenseNet.initialize(NetSpec(6, (64, 64), 3), rng)
    for b in net.biases:
        b[...] = rng.normal(size=b.shape)
    x = rng.uniform(-1, 1, 6)

    h = list(x)
    for layer, (w, b) in enumerate(zip(net.weights, net.biases)):
        out = []
        for j in range(w.shape[1]):
            s = b[j]
            for i in range(w.shape[0]):
                s += h[i] * w[i, j]
            out.append(math.tanh(s) if layer < len(net.weights) - 1 else s)
        h = out
    assert np.max(np.abs(forward(net, x) - np.array(h))) < 1e-12


def test_batched_forward_matches_rows(rng):
    net = DenseNet.initialize(NetSpec(6, (8,), 2), rng)
    x = rng.normal(size=(5, 6))
    np.testing.assert_allclose(net.forward(x), np.stack([net.forward(row) for row in x]))


def test_zero_output_gradient_gives_zero_grads(rng):
    net = DenseNet.initialize(NetSpec(6, (8, 8), 3), rng)
    grads, _ = backward(net, rng.normal(size=6), np.zeros(3))
    assert all(np.all(g == 0) for g in grads.as_list())


def test_linear_unit_gradient():
    # one tanh hidden unit with unit input weight and zero bias, then identity output
    net = DenseNet(NetSpec(1, (1,), 1))
    net.weights[0][...] = 1.0
    net.weights[1][...] = 2.0
    x = np.array([0.3])
    grads, input_grad = net.backward(x, np.array([1.0]))
    assert grads.biases[1][0] == pytest.approx(1.0)
    assert grads.weights[1][0, 0] == pytest.approx(math.tanh(0.3))
    assert input_grad[0] == pytest.approx(2.0 * (1 - math.tanh(0.3) ** 2))


def test_backward_matches_finite_differences(rng):
    assert check_net(NetSpec(6, (32,), 3), rng, probes=100) < 1e-6


def test_suite_covers_every_experiment_shape():
    results = run_suite(seed=3, probes=30)
    assert len(results) == len(EXPERIMENT_SPECS)
    assert max(r.max_relative_error for r in results) < 1e-6


def test_forward_is_deterministic(rng):
    net = DenseNet.initialize(NetSpec(6, (16,), 2), rng)
    x = rng.normal(size=6)
    assert np.array_equal(net.forward(x), net.forward(x))


def test_orthogonal_gain(rng):
    w = orthogonal((64, 64), math.sqrt(2.0), rng)
    np.testing.assert_allclose(w.T @ w, 2.0 * np.eye(64), atol=1e-10)


def test_initialize_head_gains(rng):
    net = DenseNet.initialize(NetSpec(6, (64,), 3), rng, output_gain=[0.01, 0.01, 1.0])
    norms = np.linalg.norm(net.weights[-1], axis=0)
    assert norms[0] == pytest.approx(0.01)
    assert norms[2] == pytest.approx(1.0)


def test_spec_rejects_bad_dims():
    with pytest.raises(ValueError):
        NetSpec(6, (), 2)
    with pytest.raises(ValueError):
        NetSpec(6, (0,), 2)


def test_shape_mismatch_is_rejected():
    with pytest.raises(ValueError):
        DenseNet(NetSpec(6, (4,), 2)).forward(np.zeros(5))


# ---------------------------------------------------------------- Gaussian

def test_logprob_values():
    assert gaussian_logprob([0, 0], [0, 0], [0, 0]) == pytest.approx(-1.837877, abs=1e-6)
    assert gaussian_logprob([0, 0], [0, 0], [1, 0]) == pytest.approx(-2.337877, abs=1e-6)
    s = np.array([0.3, -0.7])
    assert gaussian_logprob([1, 2], s, [1, 2]) == pytest.approx(-s.sum() - math.log(2 * math.pi))


def test_logprob_integrates_to_one():
    rng = make_rng(0)
    log_std = np.array([0.2, -0.3])
    sigma = np.exp(log_std)
    points = rng.uniform(-6 * sigma, 6 * sigma, size=(2_000_000, 2))
    volume = np.prod(12 * sigma)
    estimate = np.exp(gaussian_logprob(np.zeros(2), log_std, points)).mean() * volume
    assert estimate == pytest.approx(1.0, rel=0.01)


def test_sample_degenerate_variance(rng):
    mean = np.array([0.4, -0.2])
    assert np.max(np.abs(gaussian_sample(mean, [-20, -20], rng) - mean)) < 1e-6


def test_sample_reproducible():
    a = gaussian_sample(np.zeros(2), np.zeros(2), make_rng(7))
    b = gaussian_sample(np.zeros(2), np.zeros(2), make_rng(7))
    assert np.array_equal(a, b)


def test_sample_moments():
    rng = make_rng(11)
    draws = gaussian_sample(np.zeros((100_000, 2)), np.zeros(2), rng)
    assert np.all(np.abs(draws.mean(axis=0)) < 0.02)
    assert np.all(np.abs(draws.std(axis=0) - 1.0) < 0.02)


def test_entropy_unit_gaussian():
    assert gaussian_entropy([0, 0]) == pytest.approx(1.0 + math.log(2 * math.pi))


# ---------------------------------------------------------------- Adam

def test_adam_zero_gradients_leave_params():
    params = [np.array([1.0, -2.0])]
    new, state = adam_step(params, [np.zeros(2)], AdamState.for_params(params))
    np.testing.assert_array_equal(new[0], params[0])
    assert state.step_count == 1


def test_adam_first_step_moves_by_lr():
    params = [np.array([0.0])]
    new, _ = adam_step(params, [np.array([1.0])], AdamState.for_params(params, lr=0.1))
    assert new[0][0] == pytest.approx(-0.1, abs=1e-6)


def test_adam_descends_quadratic():
    x = np.array([1.0])
    opt = Adam([x], lr=0.1)
    for _ in range(10):
        opt.step([2.0 * x])
    assert abs(x[0]) < 1.0


def test_adam_rejects_non_finite_and_keeps_params():
    params = [np.ones((2, 2)), np.ones(2), np.ones((2, 1)), np.ones(1)]
    before = [p.copy() for p in params]
    opt = Adam(params)
    grads = [np.zeros_like(p) for p in params]
    grads[2] = np.array([[np.nan], [0.0]])
    with pytest.raises(NonFiniteGradientError) as excinfo:
        opt.step(grads)
    assert excinfo.value.param_index == 2
    assert excinfo.value.layer_index is None
    for p, b in zip(params, before):
        np.testing.assert_array_equal(p, b)
    assert opt.state.step_count == 0


@pytest.mark.parametrize("index,network,layer,role", [
    (0, 'actor', 0, 'W'),
    (3, 'actor', 1, 'b'),
    (4, 'critic', 0, 'W'),
    (7, 'critic', 1, 'b'),
    (8, 'policy', None, 'log_std'),
])
def test_non_finite_gradient_names_the_owning_layer(index, network, layer, role):
    policy = ModelFreePolicy.initialize((8,), make_rng(0))
    before = [p.copy() for p in policy.parameters()]
    opt = Adam.for_model(policy)
    grads = [np.zeros_like(p) for p in policy.parameters()]
    grads[index].flat[0] = np.nan
    with pytest.raises(NonFiniteGradientError) as excinfo:
        opt.step(grads)
    assert excinfo.value.label == ParamLabel(network, layer, role)
    assert excinfo.value.layer_index == layer
    assert str(excinfo.value.label) in str(excinfo.value)
    for p, b in zip(policy.parameters(), before):
        np.testing.assert_array_equal(p, b)


def test_labels_cover_every_parameter():
    policy = ModelFreePolicy.initialize((8, 8), make_rng(0))
    distilled = DistilledPolicy.initialize((8,), make_rng(1))
    assert len(policy.parameter_labels()) == len(policy.parameters())
    assert len(distilled.parameter_labels()) == len(distilled.parameters())
    assert str(distilled.parameter_labels()[-1]) == 'distilled.log_std'
    assert str(policy.parameter_labels()[6]) == 'critic.layer0.W'


def test_adam_label_count_must_match():
    with pytest.raises(ValueError):
        Adam([np.zeros(2)], labels=[])


def test_adam_shape_mismatch():
    with pytest.raises(ValueError):
        adam_step([np.zeros(2)], [np.zeros(3)], AdamState())
