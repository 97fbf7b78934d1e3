"""Self-model inference timing for shared and dual agents across network sizes."""
from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass
from typing import List

import numpy as np

from ..agents.agent import Agent, AgentConfig, AgentKind
from ..planning.planner import PlanConfig, plan
from ..utils.rng import make_rng
from .experiment import HIDDEN_SIZES, size_label

logger = logging.getLogger(__name__)


@dataclass
class BenchResult:
    kind: str
    hidden: str
    self_model_parameters: int
    query_us: float
    plan_us: float

    def as_dict(self) -> dict:
        return asdict(self)


def _time_per_call(fn, calls: int) -> float:
    start = time.perf_counter()
    for _ in range(calls):
        fn()
    return (time.perf_counter() - start) / calls * 1e6


def run_bench(calls: int = 200, seed: int = 0) -> List[BenchResult]:
    """Mean microseconds per self-model query and per plan() call."""
    if calls < 1:
        raise ValueError("calls must be >= 1")
    rng = make_rng(seed)
    obs = rng.uniform(-1.0, 1.0, 6)
    history = [obs, obs]
    results = []
    for kind in (AgentKind.SHARED, AgentKind.DUAL):
        for hidden in HIDDEN_SIZES:
            agent = Agent.build(AgentConfig(kind, hidden, hidden), rng, PlanConfig())
            view = agent.self_model()
            counts = agent.num_parameters()
            n_params = counts['distilled'] if kind is AgentKind.DUAL else counts['model_free']
            result = BenchResult(
                kind=kind.value,
                hidden=size_label(hidden),
                self_model_parameters=n_params,
                query_us=_time_per_call(lambda: view.query(obs), calls),
                plan_us=_time_per_call(lambda: plan(agent.world_model, view, history, agent.plan_config, rng), calls),
            )
            logger.info(f"bench {result.kind} {result.hidden}: query {result.query_us:.1f}us, plan {result.plan_us:.1f}us")
            results.append(result)
    return results
