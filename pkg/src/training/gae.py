"""Generalized advantage estimation."""
from __future__ import annotations

from typing import Sequence, Tuple

import numpy as np


def compute_gae(
    rewards: Sequence[float],
    values: Sequence[float],
    dones: Sequence[bool],
    gamma: float,
    lam: float,
) -> Tuple[np.ndarray, np.ndarray]:
    """(advantages, returns) by the backward GAE recursion.

    ``values`` carries one bootstrap entry past the last reward. ``dones[t]``
    marks that the episode ended at step t, so values[t + 1] is not used.
    """
    rewards = np.asarray(rewards, dtype=float)
    values = np.asarray(values, dtype=float)
    dones = np.asarray(dones, dtype=float)
    n = rewards.shape[0]
    if values.shape[0] != n + 1:
        raise ValueError(f"values must have length {n + 1}, got {values.shape[0]}")
    if dones.shape[0] != n:
        raise ValueError(f"dones must have length {n}, got {dones.shape[0]}")

    advantages = np.zeros(n)
    last = 0.0
    for t in range(n - 1, -1, -1):
        nonterminal = 1.0 - dones[t]
        delta = rewards[t] + gamma * values[t + 1] * nonterminal - values[t]
        last = delta + gamma * lam * nonterminal * last
        advantages[t] = last
    return advantages, advantages + values[:n]
