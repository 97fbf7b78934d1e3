"""Collection/update schedule for all agent kinds, plus frozen evaluation."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ..agents.agent import ActionMode, ActionRecord, Agent, act
from ..env.survival_env import EnvConfig, Outcome, reset, step as env_step
from ..harness.records import EpisodeRecord
from ..nn.optim import Adam
from ..utils.rng import AGENT, ENV, PLANNER, SHUFFLE, SeedStreams
from .buffers import DistillBuffer, RolloutBuffer
from .updates import (
    DistillReport,
    PPOReport,
    RegressionReport,
    TrainHyper,
    distill_update,
    ppo_update,
    wm_update,
)

logger = logging.getLogger(__name__)


@dataclass
class Optimizers:
    policy: Adam
    world_model: Optional[Adam] = None
    distilled: Optional[Adam] = None

    @classmethod
    def for_agent(cls, agent: Agent, hyper: TrainHyper) -> 'Optimizers':
        return cls(
            policy=Adam.for_model(agent.policy, lr=hyper.lr_policy),
            world_model=Adam.for_model(agent.world_model, lr=hyper.lr_wm) if agent.world_model else None,
            distilled=Adam.for_model(agent.distilled, lr=hyper.lr_distill) if agent.distilled else None,
        )


@dataclass
class UpdateReport:
    env_step: int
    ppo: PPOReport
    world_model: Optional[RegressionReport] = None
    distill: Optional[DistillReport] = None

    def losses(self) -> List[float]:
        values = [] if self.ppo.skipped else [self.ppo.surrogate, self.ppo.value_loss]
        if self.world_model is not None and not self.world_model.skipped:
            values.append(self.world_model.last_loss)
        if self.distill is not None and not self.distill.skipped:
            values.extend([self.distill.action_loss, self.distill.kd_loss])
        return values


@dataclass
class TrainingResult:
    agent: Agent
    episodes: List[EpisodeRecord] = field(default_factory=list)
    updates: List[UpdateReport] = field(default_factory=list)


class EpisodeTracker:
    """Accumulates one episode's length, return and per-mode step counts."""

    def __init__(self):
        self.steps = 0
        self.episode_return = 0.0
        self.mode_steps = {mode: 0 for mode in ActionMode}

    def add(self, record: ActionRecord):
        self.steps += 1
        self.episode_return += record.reward
        self.mode_steps[record.mode] += 1

    def finish(self, run_seed: int, episode_index: int, phase: str, outcome: Outcome) -> EpisodeRecord:
        return EpisodeRecord(
            run_seed=run_seed,
            episode_index=episode_index,
            phase=phase,
            outcome=outcome.value,
            steps=self.steps,
            episode_return=self.episode_return,
            plan_steps=self.mode_steps[ActionMode.PLANNED],
            reflex_steps=self.mode_steps[ActionMode.REFLEX],
            modelfree_steps=self.mode_steps[ActionMode.MODEL_FREE],
        )


def update_agent(
    agent: Agent,
    rollout: RolloutBuffer,
    distill_buffer: Optional[DistillBuffer],
    last_value: float,
    hyper: TrainHyper,
    optimizers: Optimizers,
    rng: np.random.Generator,
    env_step_index: int = 0,
) -> UpdateReport:
    """Update every network the agent owns from one collection interval."""
    rollout.finish(hyper.gamma, hyper.lam, last_value)
    report = UpdateReport(env_step_index, ppo_update(agent.policy, rollout.model_free_batch(), hyper, rng, optimizers.policy))
    if agent.world_model is not None:
        report.world_model = wm_update(agent.world_model, rollout.world_model_batch(), hyper, rng, optimizers.world_model)
    if agent.distilled is not None:
        report.distill = distill_update(agent.distilled, agent.policy.critic, distill_buffer, hyper, rng, optimizers.distilled)
    if not all(np.isfinite(report.losses())):
        logger.warning(f"Non-finite loss at step {env_step_index}: {report}")
    counts = rollout.mode_counts()
    logger.debug(
        f"Update at step {env_step_index}: "
        f"modelfree={counts[ActionMode.MODEL_FREE]} planned={counts[ActionMode.PLANNED]} "
        f"reflex={counts[ActionMode.REFLEX]}"
    )
    return report


def training_loop(
    agent: Agent,
    env_config: EnvConfig,
    hyper: TrainHyper,
    total_steps: int,
    seed: int,
    run_seed: Optional[int] = None,
) -> TrainingResult:
    """Alternate acting and updating every rollout_interval environment steps.

    Streams for environment, action sampling, planning and minibatch shuffles
    are all derived from ``seed``.
    """
    run_seed = seed if run_seed is None else run_seed
    streams = SeedStreams(seed)
    env_rng, act_rng = streams.stream(ENV), streams.stream(AGENT)
    plan_rng, shuffle_rng = streams.stream(PLANNER), streams.stream(SHUFFLE)

    result = TrainingResult(agent)
    if total_steps <= 0:
        return result

    optimizers = Optimizers.for_agent(agent, hyper)
    rollout = RolloutBuffer()
    distill_buffer = DistillBuffer(hyper.distill_capacity) if agent.distilled is not None else None

    state, obs = reset(env_config, env_rng)
    history = [obs, obs]
    tracker = EpisodeTracker()
    for t in range(total_steps):
        record = act(agent, history, state, act_rng, plan_rng)
        state, next_obs, reward, outcome = env_step(state, record.action, env_config, env_rng)
        record.reward = reward
        record.done = outcome.is_terminal
        rollout.add(record, history[-2], next_obs)
        if distill_buffer is not None:
            distill_buffer.add_record(record)
        tracker.add(record)

        if record.done:
            result.episodes.append(tracker.finish(run_seed, len(result.episodes), 'train', outcome))
            state, obs = reset(env_config, env_rng)
            history = [obs, obs]
            tracker = EpisodeTracker()
        else:
            history = [history[-1], next_obs]

        if len(rollout) >= hyper.rollout_interval:
            last_value = 0.0 if record.done else agent.policy.value(history[-1])
            result.updates.append(update_agent(
                agent, rollout, distill_buffer, last_value, hyper, optimizers, shuffle_rng, t + 1,
            ))
            rollout.clear()

    logger.info(
        f"Trained {agent.kind.value} agent for {total_steps} steps "
        f"({len(result.episodes)} episodes, {len(result.updates)} updates)"
    )
    return result


def evaluate(
    agent: Agent,
    env_config: EnvConfig,
    episodes: int,
    seed: int,
    run_seed: Optional[int] = None,
    deterministic: bool = True,
) -> List[EpisodeRecord]:
    """Run ``episodes`` episodes with frozen parameters."""
    run_seed = seed if run_seed is None else run_seed
    streams = SeedStreams(seed).child('eval')
    env_rng, act_rng, plan_rng = streams.stream(ENV), streams.stream(AGENT), streams.stream(PLANNER)
    records = []
    for index in range(episodes):
        state, obs = reset(env_config, env_rng)
        history = [obs, obs]
        tracker = EpisodeTracker()
        outcome = Outcome.ONGOING
        while not outcome.is_terminal:
            record = act(agent, history, state, act_rng, plan_rng, deterministic=deterministic)
            state, next_obs, reward, outcome = env_step(state, record.action, env_config, env_rng)
            record.reward = reward
            tracker.add(record)
            history = [history[-1], next_obs]
        records.append(tracker.finish(run_seed, index, 'eval', outcome))
    return records
