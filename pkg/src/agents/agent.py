"""Agent assemblies (simple / shared / dual) and per-step action selection."""
from __future__ import annotations

import copy
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..env.reflex import ReflexConfig, reflex_override
from ..env.survival_env import EnvState
from ..errors import ConfigError
from ..nn.gaussian import gaussian_logprob
from ..planning.planner import PlanConfig, plan
from ..planning.world_model import DEFAULT_WM_HIDDEN, WorldModelNet
from .policies import (
    DistilledPolicy,
    ModelFreePolicy,
    SelfModelView,
    act_model_free,
    distilled_self_model,
    shared_self_model,
)

logger = logging.getLogger(__name__)


class AgentKind(str, Enum):
    SIMPLE = 'simple'
    SHARED = 'shared'
    DUAL = 'dual'


class ActionMode(str, Enum):
    MODEL_FREE = 'modelfree'
    PLANNED = 'planned'
    REFLEX = 'reflex'


@dataclass(frozen=True)
class AgentConfig:
    kind: AgentKind = AgentKind.DUAL
    hidden_policy: Tuple[int, ...] = (64, 64)
    hidden_distilled: Tuple[int, ...] = (64, 64)
    hidden_wm: Tuple[int, ...] = DEFAULT_WM_HIDDEN
    plan_probability: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, 'kind', AgentKind(self.kind))
        for name in ('hidden_policy', 'hidden_distilled', 'hidden_wm'):
            object.__setattr__(self, name, tuple(int(h) for h in getattr(self, name)))
        if not 0.0 <= self.plan_probability <= 1.0:
            raise ConfigError(f"agent.plan_probability must lie in [0, 1], got {self.plan_probability}")


@dataclass
class ActionRecord:
    """One executed step: what was observed, done, and where the action came from."""
    observation: np.ndarray
    action: np.ndarray
    mode: ActionMode
    value_estimate: float
    reward: float = 0.0
    done: bool = False
    # behaviour log-prob, present exactly on model-free steps
    log_prob: Optional[float] = None


@dataclass
class Agent:
    kind: AgentKind
    policy: ModelFreePolicy
    plan_config: PlanConfig = field(default_factory=PlanConfig)
    reflex: ReflexConfig = field(default_factory=ReflexConfig)
    plan_probability: float = 0.5
    world_model: Optional[WorldModelNet] = None
    distilled: Optional[DistilledPolicy] = None

    def __post_init__(self):
        self.kind = AgentKind(self.kind)
        needs_wm = self.kind is not AgentKind.SIMPLE
        if needs_wm != (self.world_model is not None):
            raise ConfigError(f"{self.kind.value} agent world model presence is wrong")
        if (self.kind is AgentKind.DUAL) != (self.distilled is not None):
            raise ConfigError(f"{self.kind.value} agent distilled policy presence is wrong")

    @classmethod
    def build(
        cls,
        config: AgentConfig,
        rng: np.random.Generator,
        plan_config: Optional[PlanConfig] = None,
        reflex: Optional[ReflexConfig] = None,
    ) -> 'Agent':
        """Assemble the networks each kind owns (simple: policy only)."""
        policy = ModelFreePolicy.initialize(config.hidden_policy, rng)
        world_model = distilled = None
        if config.kind is not AgentKind.SIMPLE:
            world_model = WorldModelNet.initialize(config.hidden_wm, rng)
        if config.kind is AgentKind.DUAL:
            distilled = DistilledPolicy.initialize(config.hidden_distilled, rng)
        return cls(
            kind=config.kind,
            policy=policy,
            plan_config=plan_config or PlanConfig(),
            reflex=reflex or ReflexConfig(),
            plan_probability=config.plan_probability,
            world_model=world_model,
            distilled=distilled,
        )

    def self_model(self) -> SelfModelView:
        if self.kind is AgentKind.DUAL:
            return distilled_self_model(self.distilled)
        return shared_self_model(self.policy)

    def num_parameters(self) -> dict:
        counts = {'model_free': self.policy.num_parameters()}
        if self.world_model is not None:
            counts['world_model'] = self.world_model.num_parameters()
        if self.distilled is not None:
            counts['distilled'] = self.distilled.num_parameters()
        return counts

    def clone(self) -> 'Agent':
        return copy.deepcopy(self)


def select_mode(rng: np.random.Generator, plan_probability: float) -> ActionMode:
    if not 0.0 <= plan_probability <= 1.0:
        raise ValueError(f"plan_probability must lie in [0, 1], got {plan_probability}")
    return ActionMode.PLANNED if rng.random() < plan_probability else ActionMode.MODEL_FREE


def act(
    agent: Agent,
    obs_history: Sequence[np.ndarray],
    state: EnvState,
    rng: np.random.Generator,
    plan_rng: Optional[np.random.Generator] = None,
    deterministic: bool = False,
) -> ActionRecord:
    """Reflex first, then a random switch between model-free and planned action."""
    if len(obs_history) < 2:
        raise ValueError("act() needs the two most recent observations")
    obs = np.asarray(obs_history[-1], dtype=float)
    value = agent.policy.value(obs)

    reflex_action = reflex_override(state, agent.reflex)
    if reflex_action is not None:
        return ActionRecord(obs, reflex_action, ActionMode.REFLEX, value)

    if agent.kind is AgentKind.SIMPLE:
        mode = ActionMode.MODEL_FREE
    else:
        mode = select_mode(rng, agent.plan_probability)

    if mode is ActionMode.PLANNED:
        if agent.world_model is None:
            raise RuntimeError(f"Planned mode on a {agent.kind.value} agent without a world model")
        result = plan(agent.world_model, agent.self_model(), obs_history, agent.plan_config,
                      plan_rng if plan_rng is not None else rng)
        return ActionRecord(obs, result.chosen_action, ActionMode.PLANNED, value)

    action = act_model_free(agent.policy, obs, rng, deterministic=deterministic)
    log_prob = float(gaussian_logprob(agent.policy.action_mean(obs), agent.policy.log_std, action))
    return ActionRecord(obs, action, ActionMode.MODEL_FREE, value, log_prob=log_prob)
