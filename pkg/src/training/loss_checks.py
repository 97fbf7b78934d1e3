"""Finite-difference checks of the PPO, world-model and distillation losses."""
from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np

from ..agents.policies import DistilledPolicy, ModelFreePolicy
from ..nn.gaussian import gaussian_logprob
from ..nn.gradcheck import check_function
from ..planning.world_model import WM_INPUT_DIM, WM_OUTPUT_DIM, WorldModelNet
from .buffers import DistillBatch, PPOBatch, RegressionBatch
from .updates import TrainHyper, distill_loss_and_grads, ppo_loss_and_grads, wm_loss_and_grads


@dataclass
class LossCheckResult:
    name: str
    max_relative_error: float


def _random_obs(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.uniform(-1.0, 1.0, (n, 6))


def check_ppo_loss(rng: np.random.Generator, probes: int = 100, n: int = 16) -> float:
    policy = ModelFreePolicy.initialize((16, 16), rng)
    policy.head.log_std[...] = rng.normal(0.0, 0.2, 2)
    obs = _random_obs(rng, n)
    actions = rng.normal(0.0, 1.0, (n, 2))
    current = gaussian_logprob(policy.action_mean(obs), policy.log_std, actions)
    # ratios stay well inside the clip range so the loss is smooth at every probe
    batch = PPOBatch(obs, actions, current + rng.normal(0.0, 0.05, n), rng.normal(size=n), rng.normal(size=n))
    hyper = TrainHyper(entropy_coef=0.01)
    _, grads, _ = ppo_loss_and_grads(policy, batch, hyper)
    return check_function(lambda: ppo_loss_and_grads(policy, batch, hyper)[0], policy.parameters(), grads, rng, probes)


def check_wm_loss(rng: np.random.Generator, probes: int = 100, n: int = 16) -> float:
    wm = WorldModelNet.initialize((16, 16), rng)
    batch = RegressionBatch(rng.normal(size=(n, WM_INPUT_DIM)), rng.normal(size=(n, WM_OUTPUT_DIM)))
    _, grads = wm_loss_and_grads(wm, batch)
    return check_function(lambda: wm_loss_and_grads(wm, batch)[0], wm.parameters(), grads, rng, probes)


def check_distill_loss(rng: np.random.Generator, probes: int = 100, n: int = 16) -> float:
    distilled = DistilledPolicy.initialize((16, 16), rng)
    distilled.head.log_std[...] = rng.normal(0.0, 0.2, 2)
    batch = DistillBatch(_random_obs(rng, n), rng.normal(size=(n, 2)), rng.normal(size=n))
    hyper = TrainHyper(kd_temperature=1.5)
    _, grads, _ = distill_loss_and_grads(distilled, batch, hyper)
    return check_function(
        lambda: distill_loss_and_grads(distilled, batch, hyper)[0], distilled.parameters(), grads, rng, probes,
    )


def run_loss_checks(seed: int = 0, probes: int = 100) -> List[LossCheckResult]:
    rng = np.random.default_rng(seed)
    return [
        LossCheckResult('ppo', check_ppo_loss(rng, probes)),
        LossCheckResult('world_model', check_wm_loss(rng, probes)),
        LossCheckResult('distill', check_distill_loss(rng, probes)),
    ]
