"""Sparse Monte Carlo tree search through the learned world model.

A handful of root actions are drawn from the self-model; each one is rolled
out once, following the self-model's mean action, to a fixed depth. The
rollouts are scored with GAE over predicted rewards and self-model values and
the best root action is executed.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Protocol, Sequence, Tuple

import numpy as np

from ..agents.policies import SelfModelView
from ..errors import ConfigError, SimulationError
from ..nn.gaussian import gaussian_sample
from ..training.gae import compute_gae

logger = logging.getLogger(__name__)


class DynamicsModel(Protocol):
    def predict(self, obs_prev, obs_curr, action) -> Tuple[np.ndarray, float]:
        ...


@dataclass(frozen=True)
class PlanConfig:
    n_root_candidates: int = 4
    max_depth: int = 4
    gamma: float = 0.99
    lam: float = 0.95
    # |predicted reward| above this ends a simulated trajectory
    terminal_threshold: float = 0.5

    def __post_init__(self):
        if self.n_root_candidates < 1 or self.max_depth < 1:
            raise ConfigError("plan.n_root_candidates and plan.max_depth must be >= 1")
        if not (0.0 <= self.gamma <= 1.0 and 0.0 <= self.lam <= 1.0):
            raise ConfigError("plan.gamma and plan.lambda must lie in [0, 1]")


@dataclass
class SimTrajectory:
    root_action: np.ndarray
    actions: List[np.ndarray] = field(default_factory=list)
    rewards: List[float] = field(default_factory=list)
    values: List[float] = field(default_factory=list)
    terminated_early: bool = False
    valid: bool = True


@dataclass
class PlanResult:
    chosen_action: np.ndarray
    chosen_index: int
    candidates: List[np.ndarray]
    scores: List[float]
    trajectories: List[SimTrajectory]
    fallback: bool = False


def sample_root_candidates(
    self_model: SelfModelView,
    obs: np.ndarray,
    config: PlanConfig,
    rng: np.random.Generator,
) -> List[np.ndarray]:
    """Mean action first, then draws from the self-model's Gaussian."""
    mean, log_std, _ = self_model.query(obs)
    candidates = [np.asarray(mean, dtype=float).copy()]
    for _ in range(config.n_root_candidates - 1):
        candidates.append(gaussian_sample(mean, log_std, rng))
    return candidates


def rollout_trajectory(
    wm: DynamicsModel,
    self_model: SelfModelView,
    obs_history: Sequence[np.ndarray],
    root_action: np.ndarray,
    config: PlanConfig,
) -> SimTrajectory:
    if len(obs_history) < 2:
        raise ValueError("rollout needs at least two observations of history")
    prev, curr = obs_history[-2], obs_history[-1]
    traj = SimTrajectory(root_action=np.asarray(root_action, dtype=float))
    _, _, value = self_model.query(curr)
    traj.values.append(float(value))

    action = traj.root_action
    for _ in range(config.max_depth):
        try:
            next_obs, reward = wm.predict(prev, curr, action)
        except SimulationError as e:
            logger.debug(f"Discarding simulated trajectory: {e}")
            traj.valid = False
            return traj
        mean, _, value = self_model.query(next_obs)
        traj.actions.append(action)
        traj.rewards.append(float(reward))
        traj.values.append(float(value))
        if abs(reward) > config.terminal_threshold:
            traj.terminated_early = True
            break
        prev, curr = curr, next_obs
        action = np.asarray(mean, dtype=float)
    return traj


def score_trajectory(traj: SimTrajectory, config: PlanConfig) -> float:
    """GAE advantage of the root step; -inf for invalid trajectories."""
    if not traj.valid:
        return float('-inf')
    if len(traj.values) != len(traj.rewards) + 1:
        raise ValueError("trajectory values must have one more entry than rewards")
    dones = [False] * len(traj.rewards)
    if traj.terminated_early:
        dones[-1] = True
    advantages, _ = compute_gae(traj.rewards, traj.values, dones, config.gamma, config.lam)
    return float(advantages[0])


def plan(
    wm: Optional[DynamicsModel],
    self_model: SelfModelView,
    obs_history: Sequence[np.ndarray],
    config: PlanConfig,
    rng: np.random.Generator,
) -> PlanResult:
    if wm is None:
        raise RuntimeError("plan() requires a world model")
    candidates = sample_root_candidates(self_model, obs_history[-1], config, rng)
    trajectories = [rollout_trajectory(wm, self_model, obs_history, c, config) for c in candidates]
    scores = [score_trajectory(t, config) for t in trajectories]

    if not any(np.isfinite(s) for s in scores):
        logger.warning("All simulated trajectories invalid; falling back to self-model mean action")
        return PlanResult(candidates[0].copy(), 0, candidates, scores, trajectories, fallback=True)

    # np.argmax keeps the first maximum: lowest candidate index wins ties
    best = int(np.argmax(scores))
    return PlanResult(candidates[best].copy(), best, candidates, scores, trajectories)
