"""Configuration management for Dualplan.

Config files hold flat ``section.key = value`` lines; values are parsed with
YAML so lists, numbers, booleans and bare words all work. YAML files with the
same keys as nested mappings are accepted too.
"""
from __future__ import annotations

import hashlib
import json
import logging
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

import yaml

from .agents.agent import AgentConfig
from .env.reflex import ReflexConfig
from .env.survival_env import STEPS_PER_MAP_UNIT, EnvConfig
from .errors import ConfigError
from .planning.planner import PlanConfig
from .training.updates import TrainHyper

logger = logging.getLogger(__name__)

WORKERS_ENV_VAR = 'DUALPLAN_WORKERS'

RECIPES = ('baseline', 'size_sweep', 'map_sweep', 'reflex_flight', 'reflex_freeze', 'custom')

DEFAULTS: Dict[str, Any] = {
    # env
    'env.map_size': 10.0,
    'env.max_steps': None,
    'env.agent_speed': 0.5,
    'env.predator_speed': 0.35,
    'env.goal_radius': 0.5,
    'env.catch_radius': 0.5,
    'env.predator_noise_std': 0.05,
    'env.min_spawn_separation': 3.0,
    'env.reward_success': 1.0,
    'env.reward_death': -1.0,
    'env.reward_step': 0.0,
    'env.reward_timeout': 0.0,
    # reflex
    'reflex.kind': 'none',
    'reflex.trigger_distance': 1.5,
    # agent
    'agent.kind': 'dual',
    'agent.hidden_policy': [64, 64],
    'agent.hidden_distilled': [64, 64],
    'agent.plan_probability': 0.5,
    # world model
    'world_model.hidden': [64, 64],
    'world_model.lr': None,
    # planner
    'plan.n_root_candidates': 4,
    'plan.max_depth': 4,
    'plan.gamma': 0.99,
    'plan.lambda': 0.95,
    'plan.terminal_threshold': 0.5,
    # training
    'train.total_steps': 150_000,
    'train.rollout_interval': 2048,
    'train.ppo_epochs': 10,
    'train.minibatch': 64,
    'train.gamma': 0.99,
    'train.lambda': 0.95,
    'train.clip_epsilon': 0.2,
    'train.entropy_coef': 0.0,
    'train.value_coef': 0.5,
    'train.kd_temperature': 1.0,
    'train.kd_weight': 0.5,
    'train.distill_capacity': 10_000,
    'train.lr_policy': 3e-4,
    'train.lr_wm': 3e-4,
    'train.lr_distill': 3e-4,
    'train.wm_epochs': 4,
    'train.distill_epochs': 4,
    # harness
    'seeds': [0, 1, 2, 3, 4],
    'eval_episodes': 500,
    'recipe': 'baseline',
    'workers': None,
    'plot.window': 100,
    'plot.band': 'std',
}


def parse_value(text: str) -> Any:
    try:
        value = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"cannot parse value '{text}': {e}") from e
    if isinstance(value, str):
        # YAML 1.1 reads exponents without a dot ("1e-3") as strings
        try:
            value = float(value)
        except ValueError:
            return value
    if isinstance(value, float) and not math.isfinite(value):
        raise ConfigError(f"value must be finite, got '{text}'")
    return value


def flatten(mapping: Mapping[str, Any], prefix: str = '') -> Dict[str, Any]:
    """Nested mapping -> dotted keys. Top-level harness keys stay bare."""
    flat = {}
    for key, value in mapping.items():
        name = f"{prefix}{key}"
        if isinstance(value, Mapping):
            flat.update(flatten(value, f"{name}."))
        else:
            flat[name] = value
    return flat


def load_config_file(path: Path) -> Dict[str, Any]:
    """Read a flat ``key = value`` file (or nested YAML) into a dotted-key dict."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text(encoding='utf-8')
    if path.suffix.lower() in ('.yaml', '.yml'):
        data = yaml.safe_load(text) or {}
        if not isinstance(data, Mapping):
            raise ConfigError(f"{path}: top level must be a mapping")
        return flatten(data)

    values: Dict[str, Any] = {}
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError(f"{path}:{line_number}: expected 'key = value', got '{raw.strip()}'")
        key, value = (part.strip() for part in line.split('=', 1))
        if key in values:
            raise ConfigError(f"{path}:{line_number}: duplicate key '{key}'")
        try:
            values[key] = parse_value(value)
        except ConfigError as e:
            raise ConfigError(f"{path}:{line_number}: {e}") from e
    return values


def _hidden(value: Any, key: str) -> Tuple[int, ...]:
    if isinstance(value, int):
        value = [value]
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(f"{key} must be a non-empty list of layer widths, got {value!r}")
    return tuple(int(v) for v in value)


class Config:
    """Flat configuration with defaults; unknown keys are rejected."""

    def __init__(self, values: Optional[Mapping[str, Any]] = None, source: Optional[Path] = None):
        self.source = source
        self._config: Dict[str, Any] = dict(DEFAULTS)
        self._explicit: set = set()
        for key, value in (values or {}).items():
            self.set(key, value)

    @classmethod
    def from_file(cls, path: Path) -> 'Config':
        logger.info(f"Loading config from {path}")
        return cls(load_config_file(path), source=Path(path))

    def get(self, key: str, default=None):
        """Get configuration value."""
        return self._config.get(key, default)

    def set(self, key: str, value):
        """Set configuration value."""
        if key not in DEFAULTS:
            raise ConfigError(f"unknown config key '{key}'")
        self._config[key] = value
        self._explicit.add(key)

    def resolved(self) -> Dict[str, Any]:
        """Flat values with derived defaults filled in and aliases folded."""
        values = dict(self._config)
        if values['env.max_steps'] is None:
            values['env.max_steps'] = int(round(STEPS_PER_MAP_UNIT * float(values['env.map_size'])))
        alias = values.pop('world_model.lr')
        if alias is not None:
            if 'train.lr_wm' in self._explicit and float(values['train.lr_wm']) != float(alias):
                raise ConfigError("world_model.lr and train.lr_wm disagree")
            values['train.lr_wm'] = alias
        values.pop('workers')
        return values

    def config_hash(self) -> str:
        return config_hash(self.resolved())

    @property
    def workers(self) -> int:
        """Worker count from env var, config, or available CPUs."""
        env_value = os.getenv(WORKERS_ENV_VAR)
        if env_value:
            try:
                workers = int(env_value)
            except ValueError as e:
                raise ConfigError(f"{WORKERS_ENV_VAR} must be an integer, got '{env_value}'") from e
        else:
            workers = self.get('workers') or os.cpu_count() or 1
        if workers < 1:
            raise ConfigError(f"worker count must be >= 1, got {workers}")
        return int(workers)

    def save(self, path: Path) -> Path:
        """Write the resolved values back out in the flat text format."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        lines = [f"{key} = {json.dumps(value)}" for key, value in sorted(self.resolved().items())]
        path.write_text('\n'.join(lines) + '\n', encoding='utf-8')
        return path


def config_hash(values: Mapping[str, Any]) -> str:
    canonical = json.dumps(values, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()[:12]


@dataclass(frozen=True)
class ExperimentConfig:
    env: EnvConfig
    reflex: ReflexConfig
    agent: AgentConfig
    plan: PlanConfig
    train: TrainHyper
    seeds: Tuple[int, ...] = (0, 1, 2, 3, 4)
    eval_episodes: int = 500
    recipe: str = 'baseline'
    plot_window: int = 100
    plot_band: str = 'std'
    config_hash: str = ''

    def __post_init__(self):
        if not self.seeds:
            raise ConfigError("seeds must be non-empty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError(f"seeds must be distinct, got {list(self.seeds)}")
        if self.eval_episodes < 0:
            raise ConfigError("eval_episodes must be >= 0")
        if self.recipe not in RECIPES:
            raise ConfigError(f"recipe must be one of {RECIPES}, got '{self.recipe}'")
        if self.plot_window < 1:
            raise ConfigError("plot.window must be >= 1")
        if self.plot_band not in ('std', 'ci95'):
            raise ConfigError(f"plot.band must be 'std' or 'ci95', got '{self.plot_band}'")
        self.reflex.validate_against(self.env.catch_radius)

    @classmethod
    def from_config(cls, config: Config) -> 'ExperimentConfig':
        v = config.resolved()
        try:
            env = EnvConfig(
                map_size=float(v['env.map_size']),
                max_steps=int(v['env.max_steps']),
                agent_speed=float(v['env.agent_speed']),
                predator_speed=float(v['env.predator_speed']),
                goal_radius=float(v['env.goal_radius']),
                catch_radius=float(v['env.catch_radius']),
                predator_noise_std=float(v['env.predator_noise_std']),
                min_spawn_separation=float(v['env.min_spawn_separation']),
                reward_success=float(v['env.reward_success']),
                reward_death=float(v['env.reward_death']),
                reward_step=float(v['env.reward_step']),
                reward_timeout=float(v['env.reward_timeout']),
            )
            reflex = ReflexConfig(str(v['reflex.kind']), float(v['reflex.trigger_distance']))
            agent = AgentConfig(
                kind=str(v['agent.kind']),
                hidden_policy=_hidden(v['agent.hidden_policy'], 'agent.hidden_policy'),
                hidden_distilled=_hidden(v['agent.hidden_distilled'], 'agent.hidden_distilled'),
                hidden_wm=_hidden(v['world_model.hidden'], 'world_model.hidden'),
                plan_probability=float(v['agent.plan_probability']),
            )
            plan = PlanConfig(
                n_root_candidates=int(v['plan.n_root_candidates']),
                max_depth=int(v['plan.max_depth']),
                gamma=float(v['plan.gamma']),
                lam=float(v['plan.lambda']),
                terminal_threshold=float(v['plan.terminal_threshold']),
            )
            train = TrainHyper(
                gamma=float(v['train.gamma']),
                lam=float(v['train.lambda']),
                clip_epsilon=float(v['train.clip_epsilon']),
                ppo_epochs=int(v['train.ppo_epochs']),
                minibatch_size=int(v['train.minibatch']),
                value_coef=float(v['train.value_coef']),
                entropy_coef=float(v['train.entropy_coef']),
                kd_temperature=float(v['train.kd_temperature']),
                kd_weight=float(v['train.kd_weight']),
                lr_policy=float(v['train.lr_policy']),
                lr_wm=float(v['train.lr_wm']),
                lr_distill=float(v['train.lr_distill']),
                rollout_interval=int(v['train.rollout_interval']),
                distill_capacity=int(v['train.distill_capacity']),
                distill_epochs=int(v['train.distill_epochs']),
                wm_epochs=int(v['train.wm_epochs']),
                total_steps=int(v['train.total_steps']),
            )
            seeds = v['seeds']
            seeds = (seeds,) if isinstance(seeds, int) else tuple(int(s) for s in seeds)
            return cls(
                env=env,
                reflex=reflex,
                agent=agent,
                plan=plan,
                train=train,
                seeds=seeds,
                eval_episodes=int(v['eval_episodes']),
                recipe=str(v['recipe']),
                plot_window=int(v['plot.window']),
                plot_band=str(v['plot.band']),
                config_hash=config_hash(v),
            )
        except ConfigError:
            raise
        except (TypeError, ValueError) as e:
            raise ConfigError(f"invalid config value: {e}") from e


def load_experiment_config(path: Optional[Path] = None, overrides: Optional[Mapping[str, Any]] = None) -> ExperimentConfig:
    config = Config.from_file(path) if path else Config()
    for key, value in (overrides or {}).items():
        config.set(key, value)
    return ExperimentConfig.from_config(config)


