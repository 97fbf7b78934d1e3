"""Diagonal Gaussian policy heads with state-independent log-std."""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .optim import ParamLabel

ACTION_DIM = 2
LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass
class GaussianHead:
    """Learned log standard deviation shared by every state."""
    log_std: np.ndarray = field(default_factory=lambda: np.zeros(ACTION_DIM))

    def __post_init__(self):
        self.log_std = np.asarray(self.log_std, dtype=float)
        if self.log_std.shape != (ACTION_DIM,):
            raise ValueError(f"log_std must have shape ({ACTION_DIM},), got {self.log_std.shape}")
        if not np.all(np.isfinite(self.log_std)):
            raise ValueError("log_std must be finite")

    def parameters(self):
        return [self.log_std]

    def parameter_labels(self, network: str = 'head'):
        return [ParamLabel(network, None, 'log_std')]

    def clone(self) -> 'GaussianHead':
        return copy.deepcopy(self)


def _check(mean, log_std, action) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    mean = np.asarray(mean, dtype=float)
    log_std = np.asarray(log_std, dtype=float)
    action = np.asarray(action, dtype=float)
    if mean.shape[-1] != log_std.shape[-1] or action.shape[-1] != mean.shape[-1]:
        raise ValueError(
            f"Shape mismatch: mean {mean.shape}, log_std {log_std.shape}, action {action.shape}"
        )
    return mean, log_std, action


def gaussian_logprob(mean, log_std, action) -> np.ndarray:
    """Log density summed over the last axis (scalar for single vectors)."""
    mean, log_std, action = _check(mean, log_std, action)
    z = (action - mean) * np.exp(-log_std)
    per_dim = -0.5 * z ** 2 - log_std - 0.5 * LOG_2PI
    return per_dim.sum(axis=-1)


def gaussian_logprob_grads(mean, log_std, action) -> Tuple[np.ndarray, np.ndarray]:
    """d logprob / d mean (same shape as mean) and d logprob / d log_std (per sample)."""
    mean, log_std, action = _check(mean, log_std, action)
    inv_var = np.exp(-2.0 * log_std)
    diff = action - mean
    d_mean = diff * inv_var
    d_log_std = diff ** 2 * inv_var - 1.0
    return d_mean, d_log_std


def gaussian_sample(mean, log_std, rng: np.random.Generator) -> np.ndarray:
    """mean + exp(log_std) * N(0, I)."""
    mean = np.asarray(mean, dtype=float)
    log_std = np.asarray(log_std, dtype=float)
    return mean + np.exp(log_std) * rng.standard_normal(mean.shape)


def gaussian_entropy(log_std) -> float:
    log_std = np.asarray(log_std, dtype=float)
    return float(np.sum(log_std + 0.5 * (1.0 + LOG_2PI)))
