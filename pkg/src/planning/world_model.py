"""Learned one-step dynamics and reward model used to simulate futures."""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np

from ..env.survival_env import OBS_DIM, observation_distances
from ..errors import SimulationError
from ..nn.dense import DenseNet, NetSpec

ACTION_DIM = 2
DIST_DIM = 3
WM_INPUT_DIM = 2 * OBS_DIM + 2 * DIST_DIM + ACTION_DIM
WM_OUTPUT_DIM = OBS_DIM + 1
DEFAULT_WM_HIDDEN = (64, 64)

# Slices of the 20-dim input: [obs_prev, obs_curr, dist_prev, dist_curr, action]
OBS_PREV = slice(0, 6)
OBS_CURR = slice(6, 12)
DIST_PREV = slice(12, 15)
DIST_CURR = slice(15, 18)
ACTION = slice(18, 20)


def wm_features(obs_prev: np.ndarray, obs_curr: np.ndarray, action: np.ndarray) -> np.ndarray:
    """World-model input vector (batched when the observations are 2-D)."""
    obs_prev = np.asarray(obs_prev, dtype=float)
    obs_curr = np.asarray(obs_curr, dtype=float)
    action = np.asarray(action, dtype=float)
    if obs_prev.ndim == 1:
        return np.concatenate([
            obs_prev, obs_curr,
            observation_distances(obs_prev), observation_distances(obs_curr),
            action,
        ])
    dist_prev = np.stack([observation_distances(o) for o in obs_prev])
    dist_curr = np.stack([observation_distances(o) for o in obs_curr])
    return np.concatenate([obs_prev, obs_curr, dist_prev, dist_curr, action], axis=1)


@dataclass
class WorldModelNet:
    net: DenseNet = field(default_factory=lambda: DenseNet(NetSpec(WM_INPUT_DIM, DEFAULT_WM_HIDDEN, WM_OUTPUT_DIM)))

    def __post_init__(self):
        spec = self.net.spec
        if spec.input_dim != WM_INPUT_DIM or spec.output_dim != WM_OUTPUT_DIM:
            raise ValueError(f"World model must map {WM_INPUT_DIM} -> {WM_OUTPUT_DIM}")

    @classmethod
    def initialize(cls, hidden: Sequence[int], rng: np.random.Generator) -> 'WorldModelNet':
        spec = NetSpec(WM_INPUT_DIM, tuple(hidden), WM_OUTPUT_DIM)
        return cls(DenseNet.initialize(spec, rng, output_gain=1.0))

    def parameters(self):
        return self.net.parameters()

    def parameter_labels(self):
        return self.net.parameter_labels('world_model')

    def num_parameters(self) -> int:
        return self.net.num_parameters()

    def clone(self) -> 'WorldModelNet':
        return copy.deepcopy(self)

    def predict(self, obs_prev, obs_curr, action) -> Tuple[np.ndarray, float]:
        """(next observation clamped to [-1, 1], predicted reward)."""
        out = self.net.forward(wm_features(obs_prev, obs_curr, action))
        if not np.all(np.isfinite(out)):
            raise SimulationError("World model produced non-finite output")
        return np.clip(out[:OBS_DIM], -1.0, 1.0), float(out[OBS_DIM])


def wm_predict(wm: WorldModelNet, obs_prev, obs_curr, action) -> Tuple[np.ndarray, float]:
    return wm.predict(obs_prev, obs_curr, action)
