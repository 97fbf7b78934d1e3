"""Shared fixtures."""
import numpy as np
import pytest

from src.agents.agent import Agent, AgentConfig, AgentKind
from src.config import Config, ExperimentConfig
from src.env.survival_env import EnvConfig, EnvState
from src.planning.planner import PlanConfig
from src.utils.rng import make_rng


@pytest.fixture
def rng():
    return make_rng(1234)


@pytest.fixture
def env_config():
    return EnvConfig()


@pytest.fixture
def quiet_env():
    """Noiseless predator, otherwise defaults."""
    return EnvConfig(predator_noise_std=0.0)


def make_state(agent, goal, predator, step_index=0):
    return EnvState(np.array(agent, dtype=float), np.array(goal, dtype=float), np.array(predator, dtype=float), step_index)


@pytest.fixture
def state_factory():
    return make_state


def build_agent(kind, rng, hidden=(16,), plan_probability=0.5, reflex=None):
    config = AgentConfig(kind=AgentKind(kind), hidden_policy=hidden, hidden_distilled=hidden,
                         hidden_wm=hidden, plan_probability=plan_probability)
    return Agent.build(config, rng, PlanConfig(), reflex)


@pytest.fixture
def agent_factory():
    return build_agent


@pytest.fixture
def tiny_experiment():
    """Seconds-scale experiment config."""
    def make(**overrides):
        values = {
            'seeds': [0, 1],
            'eval_episodes': 3,
            'train.total_steps': 300,
            'train.rollout_interval': 100,
            'train.ppo_epochs': 1,
            'train.minibatch': 32,
            'train.wm_epochs': 1,
            'train.distill_epochs': 1,
            'agent.hidden_policy': [8],
            'agent.hidden_distilled': [8],
            'world_model.hidden': [8],
            'env.max_steps': 30,
            'plot.window': 2,
            'workers': 1,
        }
        values.update(overrides)
        return ExperimentConfig.from_config(Config(values))
    return make
