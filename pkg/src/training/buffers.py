"""Experience buffers and the batches routed to each learner.

PPO only ever sees model-free steps; the world model sees every consecutive
transition; distillation sees every executed action whatever its source.
"""
from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass
from typing import Deque, List, Optional, Tuple

import numpy as np

from ..agents.agent import ActionMode, ActionRecord
from ..planning.world_model import wm_features
from .gae import compute_gae


@dataclass
class Transition:
    record: ActionRecord
    prev_observation: np.ndarray
    next_observation: np.ndarray


@dataclass
class PPOBatch:
    observations: np.ndarray
    actions: np.ndarray
    old_log_probs: np.ndarray
    advantages: np.ndarray
    returns: np.ndarray

    def __len__(self) -> int:
        return int(self.observations.shape[0])

    def subset(self, idx: np.ndarray) -> 'PPOBatch':
        return PPOBatch(
            self.observations[idx], self.actions[idx], self.old_log_probs[idx],
            self.advantages[idx], self.returns[idx],
        )


@dataclass
class RegressionBatch:
    """Inputs/targets pairs (world model: 20-dim features -> [obs_next, reward])."""
    inputs: np.ndarray
    targets: np.ndarray

    def __len__(self) -> int:
        return int(self.inputs.shape[0])

    def subset(self, idx: np.ndarray) -> 'RegressionBatch':
        return RegressionBatch(self.inputs[idx], self.targets[idx])


@dataclass
class DistillBatch:
    observations: np.ndarray
    actions: np.ndarray
    values: np.ndarray

    def __len__(self) -> int:
        return int(self.observations.shape[0])

    def subset(self, idx: np.ndarray) -> 'DistillBatch':
        return DistillBatch(self.observations[idx], self.actions[idx], self.values[idx])


class RolloutBuffer:
    """Ordered transitions of one collection interval."""

    def __init__(self):
        self.transitions: List[Transition] = []
        self.advantages: Optional[np.ndarray] = None
        self.returns: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return len(self.transitions)

    @property
    def records(self) -> List[ActionRecord]:
        return [t.record for t in self.transitions]

    def add(self, record: ActionRecord, prev_observation: np.ndarray, next_observation: np.ndarray):
        if (record.mode is ActionMode.MODEL_FREE) != (record.log_prob is not None):
            raise ValueError("log-probs must be present exactly on model-free records")
        self.transitions.append(Transition(record, np.asarray(prev_observation), np.asarray(next_observation)))
        self.advantages = self.returns = None

    def clear(self):
        self.transitions.clear()
        self.advantages = self.returns = None

    def mode_counts(self) -> Counter:
        return Counter(t.record.mode for t in self.transitions)

    def finish(self, gamma: float, lam: float, last_value: float) -> Tuple[np.ndarray, np.ndarray]:
        """GAE over the whole interval (all modes carry rewards and values)."""
        records = self.records
        rewards = [r.reward for r in records]
        values = [r.value_estimate for r in records] + [float(last_value)]
        dones = [r.done for r in records]
        self.advantages, self.returns = compute_gae(rewards, values, dones, gamma, lam)
        return self.advantages, self.returns

    def model_free_batch(self) -> PPOBatch:
        if self.advantages is None:
            raise RuntimeError("finish() must run before building the PPO batch")
        idx = [i for i, t in enumerate(self.transitions) if t.record.mode is ActionMode.MODEL_FREE]
        records = [self.transitions[i].record for i in idx]
        return PPOBatch(
            observations=np.array([r.observation for r in records]).reshape(-1, 6),
            actions=np.array([r.action for r in records]).reshape(-1, 2),
            old_log_probs=np.array([r.log_prob for r in records], dtype=float),
            advantages=self.advantages[idx],
            returns=self.returns[idx],
        )

    def world_model_batch(self) -> RegressionBatch:
        if not self.transitions:
            return RegressionBatch(np.zeros((0, 20)), np.zeros((0, 7)))
        prev = np.array([t.prev_observation for t in self.transitions])
        curr = np.array([t.record.observation for t in self.transitions])
        actions = np.array([t.record.action for t in self.transitions])
        nxt = np.array([t.next_observation for t in self.transitions])
        rewards = np.array([t.record.reward for t in self.transitions], dtype=float)
        return RegressionBatch(wm_features(prev, curr, actions), np.column_stack([nxt, rewards]))


class DistillBuffer:
    """FIFO window of (observation, executed action, critic value) over all modes."""

    def __init__(self, capacity: int = 10_000):
        if capacity < 1:
            raise ValueError("DistillBuffer capacity must be >= 1")
        self.capacity = capacity
        self._items: Deque[Tuple[np.ndarray, np.ndarray, float]] = deque(maxlen=capacity)

    def __len__(self) -> int:
        return len(self._items)

    def add(self, observation: np.ndarray, action: np.ndarray, value: float):
        self._items.append((np.asarray(observation, dtype=float), np.asarray(action, dtype=float), float(value)))

    def add_record(self, record: ActionRecord):
        self.add(record.observation, record.action, record.value_estimate)

    def batch(self) -> DistillBatch:
        if not self._items:
            return DistillBatch(np.zeros((0, 6)), np.zeros((0, 2)), np.zeros(0))
        obs, actions, values = zip(*self._items)
        return DistillBatch(np.array(obs), np.array(actions), np.array(values, dtype=float))
