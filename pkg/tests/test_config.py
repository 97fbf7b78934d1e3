import math

import pytest

from src.agents.agent import AgentKind
from src.config import (
    WORKERS_ENV_VAR,
    Config,
    ExperimentConfig,
    load_config_file,
    load_experiment_config,
)
from src.env.reflex import ReflexKind
from src.errors import ConfigError
from src.training.updates import TrainHyper


def _write(tmp_path, text, name='run.cfg'):
    path = tmp_path / name
    path.write_text(text, encoding='utf-8')
    return path


def test_defaults_build():
    config = ExperimentConfig.from_config(Config())
    assert config.env.max_steps == 200
    assert config.agent.kind is AgentKind.DUAL
    assert config.seeds == (0, 1, 2, 3, 4)
    assert config.train.total_steps == 150_000


def test_flat_file_values(tmp_path):
    path = _write(tmp_path, (
        "# quick run\n"
        "agent.kind = shared\n"
        "agent.hidden_policy = [32]   # one layer\n"
        "env.map_size = 20\n"
        "seeds = [3, 4]\n"
        "reflex.kind = freeze\n"
    ))
    config = load_experiment_config(path)
    assert config.agent.kind is AgentKind.SHARED
    assert config.agent.hidden_policy == (32,)
    assert config.env.max_steps == 400
    assert config.seeds == (3, 4)
    assert config.reflex.kind is ReflexKind.FREEZE


def test_yaml_file(tmp_path):
    path = _write(tmp_path, "agent:\n  kind: simple\nworld_model:\n  hidden: [8]\nseeds: [1]\n", 'run.yaml')
    assert load_config_file(path) == {'agent.kind': 'simple', 'world_model.hidden': [8], 'seeds': [1]}
    assert load_experiment_config(path).agent.hidden_wm == (8,)


def test_unknown_key_is_an_error(tmp_path):
    with pytest.raises(ConfigError):
        load_experiment_config(_write(tmp_path, "agent.plan_prob = 0.3\n"))


def test_malformed_line_names_its_position(tmp_path):
    with pytest.raises(ConfigError, match=r"run.cfg:2"):
        load_config_file(_write(tmp_path, "seeds = [1]\nthis is not a setting\n"))


def test_duplicate_key(tmp_path):
    with pytest.raises(ConfigError, match="duplicate"):
        load_config_file(_write(tmp_path, "seeds = [1]\nseeds = [2]\n"))


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config_file(tmp_path / 'absent.cfg')


def test_bad_values_become_config_errors():
    with pytest.raises(ConfigError):
        load_experiment_config(overrides={'env.map_size': 'wide'})
    with pytest.raises(ConfigError):
        load_experiment_config(overrides={'seeds': [1, 1]})
    with pytest.raises(ConfigError):
        load_experiment_config(overrides={'recipe': 'everything'})
    with pytest.raises(ConfigError):
        load_experiment_config(overrides={'reflex.kind': 'freeze', 'reflex.trigger_distance': 0.4})


def test_world_model_lr_alias():
    assert load_experiment_config(overrides={'world_model.lr': 1e-3}).train.lr_wm == 1e-3
    assert load_experiment_config(overrides={'world_model.lr': 1e-3, 'train.lr_wm': 1e-3}).train.lr_wm == 1e-3
    with pytest.raises(ConfigError):
        load_experiment_config(overrides={'world_model.lr': 1e-3, 'train.lr_wm': 5e-4})


def test_hash_is_stable_and_sensitive():
    a = Config({'seeds': [1, 2]}).config_hash()
    assert a == Config({'seeds': [1, 2]}).config_hash()
    assert a != Config({'seeds': [1, 3]}).config_hash()
    assert len(a) == 12


def test_hash_ignores_worker_count():
    assert Config({'workers': 1}).config_hash() == Config({'workers': 8}).config_hash()


def test_explicit_max_steps_matches_derived_hash():
    assert Config({'env.max_steps': 200}).config_hash() == Config().config_hash()


def test_workers_from_environment(monkeypatch):
    monkeypatch.setenv(WORKERS_ENV_VAR, '3')
    assert Config({'workers': 1}).workers == 3
    monkeypatch.setenv(WORKERS_ENV_VAR, 'many')
    with pytest.raises(ConfigError):
        Config().workers


def test_workers_from_config(monkeypatch):
    monkeypatch.delenv(WORKERS_ENV_VAR, raising=False)
    assert Config({'workers': 2}).workers == 2
    assert Config().workers >= 1


def test_saved_config_reloads_to_the_same_hash(tmp_path):
    config = Config({'agent.kind': 'shared', 'seeds': [7], 'world_model.lr': 1e-3})
    path = config.save(tmp_path / 'config.cfg')
    assert Config.from_file(path).config_hash() == config.config_hash()


def test_exponent_values_are_numbers(tmp_path):
    config = load_experiment_config(_write(tmp_path, "train.lr_policy = 1e-3\nreflex.kind = none\n"))
    assert config.train.lr_policy == 1e-3
    assert config.reflex.kind is ReflexKind.NONE


@pytest.mark.parametrize("line", [
    "train.kd_temperature = nan",
    "train.clip_epsilon = inf",
    "train.clip_epsilon = .nan",
    "env.map_size = -.inf",
])
def test_non_finite_values_are_rejected(tmp_path, line):
    with pytest.raises(ConfigError, match="run.cfg:1"):
        load_experiment_config(_write(tmp_path, line + "\n"))


@pytest.mark.parametrize("field", ['clip_epsilon', 'kd_temperature'])
def test_train_hyper_rejects_nan(field):
    with pytest.raises(ConfigError):
        TrainHyper(**{field: math.nan})
