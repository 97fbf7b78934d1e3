"""Losses, analytic gradients and update loops for all learners.

- PPO clipped surrogate + critic MSE - entropy bonus for the model-free policy
- mean squared error on [next observation, reward] for the world model
- action negative log-likelihood + scalar value distillation for the
  distilled policy
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from ..agents.policies import DistilledPolicy, ModelFreePolicy
from ..errors import ConfigError
from ..nn.dense import DenseNet
from ..nn.gaussian import gaussian_entropy, gaussian_logprob, gaussian_logprob_grads
from ..nn.optim import Adam
from ..planning.world_model import WorldModelNet
from .buffers import DistillBatch, DistillBuffer, PPOBatch, RegressionBatch

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainHyper:
    gamma: float = 0.99
    lam: float = 0.95
    clip_epsilon: float = 0.2
    ppo_epochs: int = 10
    minibatch_size: int = 64
    value_coef: float = 0.5
    entropy_coef: float = 0.0
    kd_temperature: float = 1.0
    kd_weight: float = 0.5
    lr_policy: float = 3e-4
    lr_wm: float = 3e-4
    lr_distill: float = 3e-4
    rollout_interval: int = 2048
    distill_capacity: int = 10_000
    distill_epochs: int = 4
    wm_epochs: int = 4
    total_steps: int = 150_000

    def __post_init__(self):
        if not self.clip_epsilon > 0:
            raise ConfigError(f"train.clip_epsilon must be positive, got {self.clip_epsilon}")
        if not self.kd_temperature > 0:
            raise ConfigError(f"train.kd_temperature must be positive, got {self.kd_temperature}")
        for name in ('ppo_epochs', 'minibatch_size', 'rollout_interval', 'distill_capacity'):
            if getattr(self, name) < 1:
                raise ConfigError(f"train.{name} must be >= 1")
        if self.total_steps < 0:
            raise ConfigError("train.total_steps must be >= 0")


@dataclass
class PPOReport:
    surrogate: float = 0.0
    value_loss: float = 0.0
    entropy: float = 0.0
    clip_fraction: float = 0.0
    approx_kl: float = 0.0
    n_records: int = 0
    n_minibatches: int = 0
    skipped: bool = False


@dataclass
class RegressionReport:
    first_loss: float = 0.0
    last_loss: float = 0.0
    n_records: int = 0
    skipped: bool = False


@dataclass
class DistillReport:
    action_loss: float = 0.0
    kd_loss: float = 0.0
    total_loss: float = 0.0
    n_records: int = 0
    skipped: bool = False


def _minibatches(n: int, size: int, rng: np.random.Generator):
    order = rng.permutation(n)
    for start in range(0, n, size):
        yield order[start:start + size]


def _net_grads(net: DenseNet, x: np.ndarray, g: np.ndarray) -> List[np.ndarray]:
    grads, _ = net.backward(x, g)
    return grads.as_list()


# ---------------------------------------------------------------- PPO

def ppo_loss_and_grads(
    policy: ModelFreePolicy,
    batch: PPOBatch,
    hyper: TrainHyper,
) -> Tuple[float, List[np.ndarray], Dict[str, float]]:
    """Negated clipped surrogate + value_coef * MSE - entropy_coef * entropy.

    Gradients follow policy.parameters() order (actor, critic, log_std).
    Advantages are used as given; normalization happens in ppo_update.
    """
    n = len(batch)
    obs, actions, adv = batch.observations, batch.actions, batch.advantages
    log_std = policy.log_std
    eps = hyper.clip_epsilon

    mean = policy.actor.forward(obs)
    log_prob = gaussian_logprob(mean, log_std, actions)
    ratio = np.exp(log_prob - batch.old_log_probs)
    surr_unclipped = ratio * adv
    surr_clipped = np.clip(ratio, 1.0 - eps, 1.0 + eps) * adv
    objective = np.minimum(surr_unclipped, surr_clipped)
    # gradient flows only where the unclipped branch is the minimum
    active = surr_unclipped <= surr_clipped

    values = policy.critic.forward(obs)[:, 0]
    value_err = values - batch.returns
    value_loss = float(np.mean(value_err ** 2))
    entropy = gaussian_entropy(log_std)
    loss = -float(np.mean(objective)) + hyper.value_coef * value_loss - hyper.entropy_coef * entropy

    d_logprob = -(active * ratio * adv) / n
    d_mean_lp, d_log_std_lp = gaussian_logprob_grads(mean, log_std, actions)
    g_mean = d_logprob[:, np.newaxis] * d_mean_lp
    g_log_std = (d_logprob[:, np.newaxis] * d_log_std_lp).sum(axis=0) - hyper.entropy_coef
    g_value = (hyper.value_coef * 2.0 * value_err / n)[:, np.newaxis]

    grads = _net_grads(policy.actor, obs, g_mean) + _net_grads(policy.critic, obs, g_value) + [g_log_std]
    stats = {
        'surrogate': float(np.mean(objective)),
        'value_loss': value_loss,
        'entropy': entropy,
        'clip_fraction': float(np.mean(np.abs(ratio - 1.0) > eps)),
        'approx_kl': float(np.mean(batch.old_log_probs - log_prob)),
        'ratio_mean': float(np.mean(ratio)),
    }
    return loss, grads, stats


def normalize_advantages(advantages: np.ndarray) -> np.ndarray:
    if advantages.size == 0:
        return advantages
    return (advantages - advantages.mean()) / (advantages.std() + 1e-8)


def ppo_update(
    policy: ModelFreePolicy,
    batch: PPOBatch,
    hyper: TrainHyper,
    rng: np.random.Generator,
    optimizer: Optional[Adam] = None,
) -> PPOReport:
    """ppo_epochs passes of shuffled minibatches over model-free records only."""
    if len(batch) == 0:
        logger.warning("PPO update skipped: no model-free records in this interval")
        return PPOReport(skipped=True)
    optimizer = optimizer or Adam.for_model(policy, lr=hyper.lr_policy)
    batch = PPOBatch(
        batch.observations, batch.actions, batch.old_log_probs,
        normalize_advantages(batch.advantages), batch.returns,
    )
    totals: Dict[str, float] = {}
    count = 0
    for _ in range(hyper.ppo_epochs):
        for idx in _minibatches(len(batch), hyper.minibatch_size, rng):
            _, grads, stats = ppo_loss_and_grads(policy, batch.subset(idx), hyper)
            optimizer.step(grads)
            for key, value in stats.items():
                totals[key] = totals.get(key, 0.0) + value
            count += 1
    report = PPOReport(
        surrogate=totals['surrogate'] / count,
        value_loss=totals['value_loss'] / count,
        entropy=totals['entropy'] / count,
        clip_fraction=totals['clip_fraction'] / count,
        approx_kl=totals['approx_kl'] / count,
        n_records=len(batch),
        n_minibatches=count,
    )
    logger.debug(f"PPO update: {report}")
    return report


# ---------------------------------------------------------------- world model

def wm_loss_and_grads(wm: WorldModelNet, batch: RegressionBatch) -> Tuple[float, List[np.ndarray]]:
    """Mean squared error over every [obs_next, reward] element."""
    pred = wm.net.forward(batch.inputs)
    diff = pred - batch.targets
    loss = float(np.mean(diff ** 2))
    grads = _net_grads(wm.net, batch.inputs, 2.0 * diff / diff.size)
    return loss, grads


def _regression_epochs(
    loss_and_grads: Callable[[RegressionBatch], Tuple[float, List[np.ndarray]]],
    batch: RegressionBatch,
    epochs: int,
    minibatch_size: int,
    optimizer: Adam,
    rng: np.random.Generator,
) -> RegressionReport:
    epoch_losses = []
    for _ in range(epochs):
        losses, weights = [], []
        for idx in _minibatches(len(batch), minibatch_size, rng):
            loss, grads = loss_and_grads(batch.subset(idx))
            optimizer.step(grads)
            losses.append(loss)
            weights.append(len(idx))
        epoch_losses.append(float(np.average(losses, weights=weights)))
    return RegressionReport(epoch_losses[0], epoch_losses[-1], len(batch))


def wm_update(
    wm: WorldModelNet,
    batch: RegressionBatch,
    hyper: TrainHyper,
    rng: np.random.Generator,
    optimizer: Optional[Adam] = None,
    epochs: Optional[int] = None,
) -> RegressionReport:
    if len(batch) == 0:
        logger.warning("World-model update skipped: empty batch")
        return RegressionReport(skipped=True)
    optimizer = optimizer or Adam.for_model(wm, lr=hyper.lr_wm)
    report = _regression_epochs(
        lambda b: wm_loss_and_grads(wm, b), batch,
        epochs if epochs is not None else hyper.wm_epochs,
        hyper.minibatch_size, optimizer, rng,
    )
    logger.debug(f"World-model update: {report}")
    return report


# ---------------------------------------------------------------- distillation

def distill_loss_and_grads(
    distilled: DistilledPolicy,
    batch: DistillBatch,
    hyper: TrainHyper,
) -> Tuple[float, List[np.ndarray], Dict[str, float]]:
    """-mean log p(a | distilled) + kd_weight * T^2 * mean((V_target - V_distilled)^2).

    ``batch.values`` holds the critic targets.
    """
    n = len(batch)
    obs, actions = batch.observations, batch.actions
    log_std = distilled.log_std
    out = distilled.trunk.forward(obs)
    mean, values = out[:, :2], out[:, 2]

    action_loss = -float(np.mean(gaussian_logprob(mean, log_std, actions)))
    t2 = hyper.kd_temperature ** 2
    value_err = values - batch.values
    kd_loss = t2 * float(np.mean(value_err ** 2))
    loss = action_loss + hyper.kd_weight * kd_loss

    d_mean_lp, d_log_std_lp = gaussian_logprob_grads(mean, log_std, actions)
    g_out = np.empty_like(out)
    g_out[:, :2] = -d_mean_lp / n
    g_out[:, 2] = hyper.kd_weight * t2 * 2.0 * value_err / n
    g_log_std = -d_log_std_lp.sum(axis=0) / n
    grads = _net_grads(distilled.trunk, obs, g_out) + [g_log_std]
    return loss, grads, {'action_loss': action_loss, 'kd_loss': kd_loss}


def distill_update(
    distilled: DistilledPolicy,
    source_critic: Optional[DenseNet],
    buffer: DistillBuffer,
    hyper: TrainHyper,
    rng: np.random.Generator,
    optimizer: Optional[Adam] = None,
    epochs: Optional[int] = None,
) -> DistillReport:
    """Fit executed actions of every mode and the critic's values.

    Value targets come from ``source_critic`` at update time; without one the
    values stored at collection time are used.
    """
    if len(buffer) == 0:
        logger.warning("Distillation skipped: empty buffer")
        return DistillReport(skipped=True)
    optimizer = optimizer or Adam.for_model(distilled, lr=hyper.lr_distill)
    batch = buffer.batch()
    if source_critic is not None:
        batch = DistillBatch(batch.observations, batch.actions, source_critic.forward(batch.observations)[:, 0])

    sums = {'action_loss': 0.0, 'kd_loss': 0.0, 'total': 0.0}
    count = 0
    for _ in range(epochs if epochs is not None else hyper.distill_epochs):
        for idx in _minibatches(len(batch), hyper.minibatch_size, rng):
            loss, grads, parts = distill_loss_and_grads(distilled, batch.subset(idx), hyper)
            optimizer.step(grads)
            sums['action_loss'] += parts['action_loss']
            sums['kd_loss'] += parts['kd_loss']
            sums['total'] += loss
            count += 1
    report = DistillReport(
        action_loss=sums['action_loss'] / count,
        kd_loss=sums['kd_loss'] / count,
        total_loss=sums['total'] / count,
        n_records=len(batch),
    )
    logger.debug(f"Distillation update: {report}")
    return report
