import json

import pytest
from openpyxl import load_workbook

import src.harness.experiment as experiment_module
from src.agents.agent import AgentKind
from src.env.reflex import ReflexKind
from src.harness.experiment import build_settings, build_summary, run_experiment, run_seed
from src.harness.records import OUTCOMES, outcome_proportions, read_episodes_csv
from src.harness.stats import summarize


def test_baseline_settings(tiny_experiment):
    settings = build_settings(tiny_experiment())
    assert [s.label for s in settings] == ['simple', 'shared', 'dual']
    assert [s.config.agent.kind for s in settings] == [AgentKind.SIMPLE, AgentKind.SHARED, AgentKind.DUAL]


def test_size_sweep_settings(tiny_experiment):
    settings = build_settings(tiny_experiment(recipe='size_sweep'))
    assert len(settings) == 9
    assert all(s.config.agent.kind is AgentKind.DUAL for s in settings)
    assert settings[1].label == 'dual_mf32_d64x64'
    assert settings[1].group == 'mf32'
    assert settings[-1].config.agent.hidden_distilled == (128, 128, 128, 128)


def test_map_sweep_settings(tiny_experiment):
    settings = build_settings(tiny_experiment(recipe='map_sweep'))
    assert len(settings) == 9
    by_label = {s.label: s.config.env for s in settings}
    assert by_label['dual_map20'].map_size == 20.0
    assert by_label['dual_map20'].max_steps == 400
    assert by_label['simple_map30'].max_steps == 600


def test_reflex_settings(tiny_experiment):
    settings = build_settings(tiny_experiment(recipe='reflex_freeze'))
    assert [s.label for s in settings] == ['simple', 'shared', 'dual']
    assert all(s.config.reflex.kind is ReflexKind.FREEZE for s in settings)


def test_custom_recipe_is_one_setting(tiny_experiment):
    settings = build_settings(tiny_experiment(recipe='custom', **{'agent.kind': 'shared'}))
    assert [s.label for s in settings] == ['shared']


def test_run_seed_rows(tiny_experiment):
    config = tiny_experiment(seeds=[1], eval_episodes=10)
    _, records = run_seed(config, 1)
    train = [r for r in records if r.phase == 'train']
    evaluation = [r for r in records if r.phase == 'eval']
    assert len(evaluation) == 10
    assert len(records) == len(train) + 10
    assert all(r.run_seed == 1 for r in records)


def test_run_directory_contents(tiny_experiment, tmp_path):
    artifacts = run_experiment(tiny_experiment(), tmp_path / 'run')
    run_dir = artifacts.run_dir
    for label in ('simple', 'shared', 'dual'):
        assert (run_dir / 'settings' / label / 'episodes.csv').exists()
    for outcome in OUTCOMES:
        assert (run_dir / f"outcome_{outcome}.svg").exists()
    assert (run_dir / 'summary.xlsx').exists()
    summary = json.loads((run_dir / 'summary.json').read_text(encoding='utf-8'))
    assert summary['recipe'] == 'baseline'
    assert set(summary['per_agent']) == {'simple', 'shared', 'dual'}
    assert set(summary['pairwise_p_values']) == {'simple vs shared', 'simple vs dual', 'shared vs dual'}
    for entry in summary['per_agent'].values():
        assert entry['n_seeds'] == 2
        assert entry['phase'] == 'eval'
        assert set(entry) >= {'success', 'death', 'timeout'}


def test_workbook_matches_summary(tiny_experiment, tmp_path):
    artifacts = run_experiment(tiny_experiment(), tmp_path / 'run')
    summary = artifacts.summary
    workbook = load_workbook(artifacts.workbook)
    assert workbook.sheetnames == ['Outcomes', 'P-values']

    rows = list(workbook['Outcomes'].iter_rows(values_only=True))
    assert rows[0][:4] == ('Setting', 'Group', 'Agent', 'Seeds')
    assert [row[0] for row in rows[1:]] == list(summary['per_agent'])
    for row in rows[1:]:
        entry = summary['per_agent'][row[0]]
        assert row[2] == entry['agent']
        assert row[3] == entry['n_seeds']
        for k, outcome in enumerate(OUTCOMES):
            stats = entry[outcome]
            mean, std, low, high = row[4 + 4 * k: 8 + 4 * k]
            assert float(mean) == pytest.approx(100.0 * stats['mean'], abs=5e-3)
            assert float(std) == pytest.approx(100.0 * stats['std'], abs=5e-3)
            assert float(low) == pytest.approx(100.0 * stats['ci95'][0], abs=5e-3)
            assert float(high) == pytest.approx(100.0 * stats['ci95'][1], abs=5e-3)

    pvals = list(workbook['P-values'].iter_rows(values_only=True))
    assert pvals[0] == ('Pair', 'Success p', 'Death p', 'Timeout p')
    assert [row[0] for row in pvals[1:]] == list(summary['pairwise_p_values'])
    for row in pvals[1:]:
        expected = summary['pairwise_p_values'][row[0]]
        for value, outcome in zip(row[1:], OUTCOMES):
            assert value == pytest.approx(expected[outcome])


def test_summary_is_recomputable_from_csv(tiny_experiment, tmp_path):
    artifacts = run_experiment(tiny_experiment(), tmp_path / 'run')
    for label, path in artifacts.csv_paths.items():
        proportions = outcome_proportions(read_episodes_csv(path), 'eval')
        for outcome in OUTCOMES:
            expected = summarize([p[outcome] for p in proportions.values()])
            assert artifacts.summary['per_agent'][label][outcome]['mean'] == expected.mean
            assert artifacts.summary['per_agent'][label][outcome]['std'] == expected.std


def test_rerun_is_byte_identical(tiny_experiment, tmp_path):
    config = tiny_experiment(recipe='custom')
    first = run_experiment(config, tmp_path / 'a')
    second = run_experiment(config, tmp_path / 'b')
    for label in first.csv_paths:
        assert first.csv_paths[label].read_bytes() == second.csv_paths[label].read_bytes()
    assert (tmp_path / 'a' / 'summary.json').read_bytes() == (tmp_path / 'b' / 'summary.json').read_bytes()


@pytest.mark.slow
def test_worker_pool_matches_inline_run(tiny_experiment, tmp_path):
    config = tiny_experiment(recipe='custom')
    inline = run_experiment(config, tmp_path / 'inline', workers=1)
    pooled = run_experiment(config, tmp_path / 'pooled', workers=2)
    for label in inline.csv_paths:
        assert inline.csv_paths[label].read_bytes() == pooled.csv_paths[label].read_bytes()


def test_map_sweep_has_one_block_per_map(tiny_experiment, tmp_path):
    config = tiny_experiment(recipe='map_sweep', seeds=[0], eval_episodes=1, **{'train.total_steps': 100})
    summary = run_experiment(config, tmp_path / 'run').summary
    assert set(summary['blocks']) == {'map10', 'map20', 'map30'}
    assert summary['blocks']['map20'] == ['simple_map20', 'shared_map20', 'dual_map20']
    assert 'simple_map10 vs simple_map20' not in summary['pairwise_p_values']
    # one seed: no spread and no test
    assert summary['per_agent']['dual_map10']['success']['std'] is None
    assert summary['pairwise_p_values']['simple_map10 vs dual_map10']['success'] is None


def test_summary_falls_back_to_training_episodes(tiny_experiment, tmp_path):
    config = tiny_experiment(recipe='custom', eval_episodes=0)
    summary = run_experiment(config, tmp_path / 'run').summary
    assert summary['per_agent']['dual']['phase'] == 'train'


def test_unwritable_directory_fails_before_compute(tiny_experiment, tmp_path, monkeypatch):
    monkeypatch.setattr(experiment_module, 'training_loop', lambda *a, **k: pytest.fail("trained"))
    blocker = tmp_path / 'blocker'
    blocker.write_text('', encoding='utf-8')
    with pytest.raises(OSError):
        run_experiment(tiny_experiment(), blocker / 'run')


def test_build_summary_without_records(tiny_experiment):
    settings = build_settings(tiny_experiment(recipe='custom'))
    summary = build_summary('custom', 'abc', settings, {})
    assert summary['per_agent']['dual']['success']['mean'] is None
    assert summary['per_agent']['dual']['n_seeds'] == 0
