"""Bounded-box survival environment: reach the goal, avoid the predator."""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from ..errors import ConfigError, EnvUsageError

logger = logging.getLogger(__name__)

OBS_DIM = 6
MAX_SPAWN_ATTEMPTS = 1000
STEPS_PER_MAP_UNIT = 20


class Outcome(str, Enum):
    SUCCESS = 'success'
    DEATH = 'death'
    TIMEOUT = 'timeout'
    ONGOING = 'ongoing'

    @property
    def is_terminal(self) -> bool:
        return self is not Outcome.ONGOING


@dataclass(frozen=True)
class EnvConfig:
    """Environment parameters. ``max_steps`` defaults to 20 x map_size."""
    map_size: float = 10.0
    max_steps: Optional[int] = None
    agent_speed: float = 0.5
    predator_speed: float = 0.35
    goal_radius: float = 0.5
    catch_radius: float = 0.5
    predator_noise_std: float = 0.05
    min_spawn_separation: float = 3.0
    reward_success: float = 1.0
    reward_death: float = -1.0
    reward_step: float = 0.0
    reward_timeout: float = 0.0

    def __post_init__(self):
        if self.max_steps is None:
            object.__setattr__(self, 'max_steps', int(round(STEPS_PER_MAP_UNIT * self.map_size)))
        if self.map_size <= 0:
            raise ConfigError(f"env.map_size must be positive, got {self.map_size}")
        if not 0 < self.predator_speed < self.agent_speed:
            raise ConfigError(
                "env requires 0 < predator_speed < agent_speed "
                f"(got {self.predator_speed}, {self.agent_speed})"
            )
        for name in ('goal_radius', 'catch_radius'):
            radius = getattr(self, name)
            if not 0 < radius < self.map_size / 2:
                raise ConfigError(f"env.{name} must lie in (0, map_size/2), got {radius}")
        if self.max_steps < 1:
            raise ConfigError(f"env.max_steps must be >= 1, got {self.max_steps}")
        if self.predator_noise_std < 0 or self.min_spawn_separation < 0:
            raise ConfigError("env.predator_noise_std and env.min_spawn_separation must be >= 0")

    @property
    def half_size(self) -> float:
        return self.map_size / 2.0

    @property
    def diagonal(self) -> float:
        return float(self.map_size * np.sqrt(2.0))


@dataclass(frozen=True, eq=False)
class EnvState:
    agent_xy: np.ndarray
    goal_xy: np.ndarray
    predator_xy: np.ndarray
    step_index: int = 0
    outcome: Outcome = Outcome.ONGOING


def observe(state: EnvState, config: EnvConfig) -> np.ndarray:
    """Entity coordinates scaled from [0, map_size] to [-1, 1]."""
    coords = np.concatenate([state.agent_xy, state.goal_xy, state.predator_xy])
    return np.clip(coords / config.half_size - 1.0, -1.0, 1.0)


def _dist(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)))


def entity_distances(state: EnvState, config: EnvConfig) -> Tuple[float, float, float]:
    """(agent-goal, agent-predator, goal-predator) divided by the map diagonal."""
    d = config.diagonal
    return (
        _dist(state.agent_xy, state.goal_xy) / d,
        _dist(state.agent_xy, state.predator_xy) / d,
        _dist(state.goal_xy, state.predator_xy) / d,
    )


def observation_distances(obs: np.ndarray) -> np.ndarray:
    """Same normalized distances, computed from an observation alone.

    Observations live in a box of side 2, so the map diagonal becomes 2*sqrt(2).
    """
    obs = np.asarray(obs, dtype=float)
    agent, goal, predator = obs[0:2], obs[2:4], obs[4:6]
    diag = 2.0 * np.sqrt(2.0)
    return np.array([_dist(agent, goal), _dist(agent, predator), _dist(goal, predator)]) / diag


def reset(config: EnvConfig, rng: np.random.Generator) -> Tuple[EnvState, np.ndarray]:
    """Uniform spawn of agent, goal and predator with pairwise separation."""
    sep = config.min_spawn_separation
    for _ in range(MAX_SPAWN_ATTEMPTS):
        agent, goal, predator = rng.uniform(0.0, config.map_size, size=(3, 2))
        if _dist(agent, goal) >= sep and _dist(agent, predator) >= sep and _dist(goal, predator) >= sep:
            state = EnvState(agent, goal, predator)
            return state, observe(state, config)
    raise ConfigError(
        f"Could not place entities {sep} apart in a {config.map_size}-unit box "
        f"after {MAX_SPAWN_ATTEMPTS} attempts"
    )


def predator_policy(state: EnvState, config: EnvConfig, rng: np.random.Generator) -> np.ndarray:
    """Pure pursuit at predator_speed plus isotropic Gaussian noise."""
    offset = state.agent_xy - state.predator_xy
    norm = float(np.linalg.norm(offset))
    # always consume the noise draw so the stream does not depend on geometry
    noise = rng.standard_normal(2) * config.predator_noise_std
    if norm == 0.0:
        return np.zeros(2)
    return offset / norm * config.predator_speed + noise


def clip_action(action: np.ndarray) -> np.ndarray:
    """Actions with norm above 1 are rescaled to unit norm."""
    action = np.asarray(action, dtype=float)
    norm = float(np.linalg.norm(action))
    return action / norm if norm > 1.0 else action


def step(
    state: EnvState,
    action: np.ndarray,
    config: EnvConfig,
    rng: np.random.Generator,
) -> Tuple[EnvState, np.ndarray, float, Outcome]:
    """Advance one step. Agent and predator move simultaneously."""
    if state.outcome.is_terminal:
        raise EnvUsageError(f"step() called on a finished episode ({state.outcome.value})")

    predator_move = predator_policy(state, config, rng)
    agent_xy = np.clip(state.agent_xy + clip_action(action) * config.agent_speed, 0.0, config.map_size)
    predator_xy = np.clip(state.predator_xy + predator_move, 0.0, config.map_size)

    if _dist(agent_xy, predator_xy) <= config.catch_radius:
        outcome, reward = Outcome.DEATH, config.reward_death
    elif _dist(agent_xy, state.goal_xy) <= config.goal_radius:
        outcome, reward = Outcome.SUCCESS, config.reward_success
    elif state.step_index + 1 >= config.max_steps:
        outcome, reward = Outcome.TIMEOUT, config.reward_timeout
    else:
        outcome, reward = Outcome.ONGOING, config.reward_step

    new_state = replace(
        state,
        agent_xy=agent_xy,
        predator_xy=predator_xy,
        step_index=state.step_index + 1,
        outcome=outcome,
    )
    return new_state, observe(new_state, config), float(reward), outcome
