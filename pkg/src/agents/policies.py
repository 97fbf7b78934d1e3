"""Model-free actor-critic, distilled policy and the self-model views over them."""
from __future__ import annotations

import copy
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np

from ..env.survival_env import OBS_DIM
from ..nn.dense import DenseNet, HeadLayout, NetSpec, param_count
from ..nn.gaussian import ACTION_DIM, GaussianHead, gaussian_sample
from ..nn.optim import ParamLabel

ACTION_GAIN = 0.01
VALUE_GAIN = 1.0

SelfModelOutput = Tuple[np.ndarray, np.ndarray, float]


@dataclass
class ModelFreePolicy:
    """Separate actor (6 -> hidden -> 2) and critic (6 -> hidden -> 1) plus log-std."""
    actor: DenseNet
    critic: DenseNet
    head: GaussianHead

    @classmethod
    def initialize(cls, hidden: Sequence[int], rng: np.random.Generator) -> 'ModelFreePolicy':
        actor = DenseNet.initialize(NetSpec(OBS_DIM, tuple(hidden), ACTION_DIM), rng, ACTION_GAIN)
        critic = DenseNet.initialize(NetSpec(OBS_DIM, tuple(hidden), 1), rng, VALUE_GAIN)
        return cls(actor, critic, GaussianHead())

    @property
    def log_std(self) -> np.ndarray:
        return self.head.log_std

    def action_mean(self, obs: np.ndarray) -> np.ndarray:
        return self.actor.forward(obs)

    def value(self, obs: np.ndarray):
        out = self.critic.forward(obs)
        return float(out[0]) if out.ndim == 1 else out[:, 0]

    def parameters(self) -> List[np.ndarray]:
        return self.actor.parameters() + self.critic.parameters() + self.head.parameters()

    def parameter_labels(self) -> List[ParamLabel]:
        return (
            self.actor.parameter_labels('actor')
            + self.critic.parameter_labels('critic')
            + self.head.parameter_labels('policy')
        )

    def num_parameters(self) -> int:
        return int(sum(p.size for p in self.parameters()))

    def expected_parameters(self) -> int:
        return param_count(self.actor.spec, HeadLayout.ACTOR_CRITIC_SEPARATE)

    def clone(self) -> 'ModelFreePolicy':
        return copy.deepcopy(self)


@dataclass
class DistilledPolicy:
    """Single trunk 6 -> hidden -> 3: two action means and one value."""
    trunk: DenseNet
    head: GaussianHead

    @classmethod
    def initialize(cls, hidden: Sequence[int], rng: np.random.Generator) -> 'DistilledPolicy':
        spec = NetSpec(OBS_DIM, tuple(hidden), ACTION_DIM + 1)
        gains = [ACTION_GAIN] * ACTION_DIM + [VALUE_GAIN]
        return cls(DenseNet.initialize(spec, rng, gains), GaussianHead())

    @property
    def log_std(self) -> np.ndarray:
        return self.head.log_std

    def outputs(self, obs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(action means, values) from one trunk forward pass."""
        out = self.trunk.forward(obs)
        return out[..., :ACTION_DIM], out[..., ACTION_DIM]

    def parameters(self) -> List[np.ndarray]:
        return self.trunk.parameters() + self.head.parameters()

    def parameter_labels(self) -> List[ParamLabel]:
        return self.trunk.parameter_labels('distilled') + self.head.parameter_labels('distilled')

    def num_parameters(self) -> int:
        return int(sum(p.size for p in self.parameters()))

    def expected_parameters(self) -> int:
        return param_count(self.trunk.spec, HeadLayout.COMBINED_DISTILLED)

    def clone(self) -> 'DistilledPolicy':
        return copy.deepcopy(self)


@dataclass(frozen=True)
class SelfModelView:
    """What the planner may see of an agent: obs -> (action mean, log_std, value)."""
    name: str
    query: Callable[[np.ndarray], SelfModelOutput]


def shared_self_model(policy: ModelFreePolicy) -> SelfModelView:
    def query(obs: np.ndarray) -> SelfModelOutput:
        return policy.action_mean(obs), policy.log_std.copy(), policy.value(obs)
    return SelfModelView('shared', query)


def distilled_self_model(distilled: DistilledPolicy) -> SelfModelView:
    def query(obs: np.ndarray) -> SelfModelOutput:
        mean, value = distilled.outputs(obs)
        return mean, distilled.log_std.copy(), float(value)
    return SelfModelView('dual', query)


def self_model_query(view: SelfModelView, obs: np.ndarray) -> SelfModelOutput:
    return view.query(obs)


def act_model_free(
    policy: ModelFreePolicy,
    obs: np.ndarray,
    rng: np.random.Generator,
    deterministic: bool = False,
) -> np.ndarray:
    """Actor mean when deterministic, otherwise a Gaussian sample around it."""
    mean = policy.action_mean(obs)
    if deterministic:
        return mean
    return gaussian_sample(mean, policy.log_std, rng)
