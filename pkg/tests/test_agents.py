import numpy as np
import pytest

import src.agents.agent as agent_module
from src.agents.agent import ActionMode, Agent, AgentConfig, AgentKind, act, select_mode
from src.agents.policies import (
    DistilledPolicy,
    ModelFreePolicy,
    act_model_free,
    distilled_self_model,
    self_model_query,
    shared_self_model,
)
from src.env.reflex import ReflexConfig
from src.errors import ConfigError
from src.planning.planner import PlanConfig, plan
from src.training.buffers import DistillBatch
from src.training.updates import TrainHyper, distill_loss_and_grads
from src.nn.optim import Adam
from src.utils.rng import make_rng
from tests.conftest import make_state

FAR_STATE = make_state((5, 5), (9, 9), (1, 1))
CLOSE_STATE = make_state((5, 5), (9, 9), (5.5, 5))


def _history(rng):
    obs = rng.uniform(-1, 1, 6)
    return [obs, obs]


@pytest.mark.parametrize("hidden,mf,distilled", [
    ((32,), 549, 325),
    ((64, 64), 9413, 4805),
    ((128, 128, 128, 128), 101253, 50821),
])
def test_assembled_parameter_counts(hidden, mf, distilled, rng):
    agent = Agent.build(AgentConfig(AgentKind.DUAL, hidden, hidden), rng)
    counts = agent.num_parameters()
    assert counts['model_free'] == mf == agent.policy.expected_parameters()
    assert counts['distilled'] == distilled == agent.distilled.expected_parameters()


def test_kinds_own_the_right_networks(agent_factory, rng):
    simple, shared, dual = (agent_factory(k, rng) for k in ('simple', 'shared', 'dual'))
    assert simple.world_model is None and simple.distilled is None
    assert shared.world_model is not None and shared.distilled is None
    assert dual.world_model is not None and dual.distilled is not None


def test_inconsistent_assembly_rejected(rng):
    policy = ModelFreePolicy.initialize((8,), rng)
    with pytest.raises(ConfigError):
        Agent(AgentKind.SHARED, policy)


def test_plan_probability_range():
    with pytest.raises(ConfigError):
        AgentConfig(plan_probability=1.5)


def test_degenerate_variance_gives_mean(rng):
    policy = ModelFreePolicy.initialize((8,), rng)
    policy.head.log_std[...] = -20.0
    obs = rng.uniform(-1, 1, 6)
    assert np.max(np.abs(act_model_free(policy, obs, rng) - policy.action_mean(obs))) < 1e-6


def test_deterministic_and_seeded_actions(rng):
    policy = ModelFreePolicy.initialize((8,), rng)
    obs = rng.uniform(-1, 1, 6)
    np.testing.assert_array_equal(act_model_free(policy, obs, rng, True), act_model_free(policy, obs, rng, True))
    np.testing.assert_array_equal(act_model_free(policy, obs, make_rng(4)), act_model_free(policy, obs, make_rng(4)))


def test_select_mode_extremes(rng):
    assert all(select_mode(rng, 0.0) is ActionMode.MODEL_FREE for _ in range(1000))
    assert all(select_mode(rng, 1.0) is ActionMode.PLANNED for _ in range(1000))


def test_select_mode_frequency():
    rng = make_rng(0)
    planned = sum(select_mode(rng, 0.5) is ActionMode.PLANNED for _ in range(100_000))
    assert abs(planned / 100_000 - 0.5) < 0.01


def test_simple_agent_never_plans(agent_factory, rng):
    agent = agent_factory('simple', rng, plan_probability=1.0, reflex=ReflexConfig('freeze'))
    history = _history(rng)
    modes = {act(agent, history, s, rng).mode for s in (FAR_STATE, CLOSE_STATE) for _ in range(50)}
    assert modes <= {ActionMode.MODEL_FREE, ActionMode.REFLEX}


def test_reflex_overrides_everything(agent_factory, rng, monkeypatch):
    calls = {'plan': 0, 'policy': 0}

    def counting_plan(*args, **kwargs):
        calls['plan'] += 1
        return plan(*args, **kwargs)

    def counting_policy(*args, **kwargs):
        calls['policy'] += 1
        return act_model_free(*args, **kwargs)

    monkeypatch.setattr(agent_module, 'plan', counting_plan)
    monkeypatch.setattr(agent_module, 'act_model_free', counting_policy)
    for kind in ('simple', 'shared', 'dual'):
        for p in (0.0, 0.5, 1.0):
            agent = agent_factory(kind, rng, plan_probability=p, reflex=ReflexConfig('freeze'))
            record = act(agent, _history(rng), CLOSE_STATE, rng)
            assert record.mode is ActionMode.REFLEX
            np.testing.assert_array_equal(record.action, np.zeros(2))
            assert record.log_prob is None
    assert calls == {'plan': 0, 'policy': 0}


def test_dual_planned_action_replays_planner(agent_factory, rng):
    agent = agent_factory('dual', rng, plan_probability=1.0)
    history = _history(rng)
    record = act(agent, history, FAR_STATE, make_rng(1), plan_rng=make_rng(2))
    expected = plan(agent.world_model, agent.self_model(), history, agent.plan_config, make_rng(2))
    assert record.mode is ActionMode.PLANNED
    np.testing.assert_array_equal(record.action, expected.chosen_action)


def test_model_free_record_carries_log_prob(agent_factory, rng):
    agent = agent_factory('shared', rng, plan_probability=0.0)
    record = act(agent, _history(rng), FAR_STATE, rng)
    assert record.mode is ActionMode.MODEL_FREE
    assert record.log_prob is not None
    assert record.value_estimate == pytest.approx(agent.policy.value(record.observation))


def test_shared_view_is_the_policy(rng):
    policy = ModelFreePolicy.initialize((8,), rng)
    obs = rng.uniform(-1, 1, 6)
    mean, log_std, value = self_model_query(shared_self_model(policy), obs)
    np.testing.assert_array_equal(mean, policy.action_mean(obs))
    assert value == policy.critic.forward(obs)[0]


def test_distilled_view_splits_one_forward_pass(rng):
    distilled = DistilledPolicy.initialize((8,), rng)
    obs = rng.uniform(-1, 1, 6)
    out = distilled.trunk.forward(obs)
    mean, _, value = distilled_self_model(distilled).query(obs)
    np.testing.assert_array_equal(mean, out[:2])
    assert value == out[2]


def test_dual_planning_ignores_model_free_actor(agent_factory, rng):
    agent = agent_factory('dual', rng, plan_probability=1.0)
    history = _history(rng)
    before = act(agent, history, FAR_STATE, make_rng(1), plan_rng=make_rng(2)).action
    for w in agent.policy.actor.weights:
        w += 0.5
    after = act(agent, history, FAR_STATE, make_rng(1), plan_rng=make_rng(2)).action
    np.testing.assert_array_equal(before, after)


def test_views_agree_after_toy_distillation(rng):
    policy = ModelFreePolicy.initialize((16,), rng)
    distilled = DistilledPolicy.initialize((16,), rng)
    obs = rng.uniform(-1, 1, 6)
    target = policy.action_mean(obs)
    batch = DistillBatch(np.tile(obs, (32, 1)), np.tile(target, (32, 1)), np.full(32, policy.value(obs)))
    hyper = TrainHyper(lr_distill=1e-2)
    opt = Adam(distilled.parameters(), lr=1e-2)
    for _ in range(300):
        _, grads, _ = distill_loss_and_grads(distilled, batch, hyper)
        opt.step(grads)
    shared_mean = shared_self_model(policy).query(obs)[0]
    dual_mean = distilled_self_model(distilled).query(obs)[0]
    assert np.max(np.abs(shared_mean - dual_mean)) < 0.05


def test_clone_is_independent(agent_factory, rng):
    agent = agent_factory('dual', rng)
    copy = agent.clone()
    copy.policy.actor.weights[0] += 1.0
    assert not np.array_equal(copy.policy.actor.weights[0], agent.policy.actor.weights[0])


def test_build_uses_plan_config(rng):
    agent = Agent.build(AgentConfig(AgentKind.SHARED, (8,), (8,), (8,)), rng, PlanConfig(max_depth=2))
    assert agent.plan_config.max_depth == 2
