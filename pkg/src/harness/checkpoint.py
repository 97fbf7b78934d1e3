"""Save/load every parameter of an agent as a single .npz archive."""
from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Dict, List

import numpy as np

from ..agents.agent import Agent, AgentConfig
from ..env.reflex import ReflexConfig
from ..planning.planner import PlanConfig
from ..utils.rng import make_rng

logger = logging.getLogger(__name__)

CHECKPOINT_NAME = 'agent.npz'
NETWORKS = ('policy', 'world_model', 'distilled')


def _networks(agent: Agent) -> Dict[str, List[np.ndarray]]:
    nets = {'policy': agent.policy.parameters()}
    if agent.world_model is not None:
        nets['world_model'] = agent.world_model.parameters()
    if agent.distilled is not None:
        nets['distilled'] = agent.distilled.parameters()
    return nets


def save_agent(agent: Agent, agent_config: AgentConfig, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arrays = {}
    for name, params in _networks(agent).items():
        for i, p in enumerate(params):
            arrays[f"{name}.{i}"] = p
    meta = {
        'kind': agent_config.kind.value,
        'hidden_policy': list(agent_config.hidden_policy),
        'hidden_distilled': list(agent_config.hidden_distilled),
        'hidden_wm': list(agent_config.hidden_wm),
        'plan_probability': agent_config.plan_probability,
    }
    arrays['meta'] = np.array(json.dumps(meta))
    with open(path, 'wb') as f:
        np.savez(f, **arrays)
    logger.info(f"Saved {agent_config.kind.value} agent to {path}")
    return path


def load_agent(path: Path, plan_config: PlanConfig, reflex: ReflexConfig) -> Agent:
    """Rebuild the agent skeleton from the stored sizes and copy parameters in."""
    with np.load(Path(path)) as archive:
        meta = json.loads(str(archive['meta']))
        agent = Agent.build(AgentConfig(**meta), make_rng(0), plan_config, reflex)
        for name, params in _networks(agent).items():
            for i, p in enumerate(params):
                stored = archive[f"{name}.{i}"]
                if stored.shape != p.shape:
                    raise ValueError(f"{path}: {name}.{i} has shape {stored.shape}, expected {p.shape}")
                p[...] = stored
    return agent
