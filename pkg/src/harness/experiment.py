"""Multi-seed experiment orchestration and the summary artifacts.

A recipe expands one ExperimentConfig into settings (agent kind, network
sizes, map size, reflex); every (setting, seed) pair is an independent job.
"""
from __future__ import annotations

import json
import logging
import os
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, replace
from itertools import combinations
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from ..agents.agent import Agent, AgentKind
from ..config import ExperimentConfig
from ..env.reflex import ReflexKind
from ..export.excel_exporter import export_summary_to_xlsx
from ..training.trainer import evaluate, training_loop
from ..utils.rng import INIT, SeedStreams
from .plots import emit_plot
from .records import OUTCOMES, EpisodeRecord, outcome_proportions, write_episodes_csv
from .stats import summarize, welch_t_test

logger = logging.getLogger(__name__)

HIDDEN_SIZES: Tuple[Tuple[int, ...], ...] = ((32,), (64, 64), (128, 128, 128, 128))
SWEEP_MAP_SIZES = (10, 20, 30)
AGENT_KINDS = (AgentKind.SIMPLE, AgentKind.SHARED, AgentKind.DUAL)


@dataclass(frozen=True)
class Setting:
    label: str
    group: str
    config: ExperimentConfig


@dataclass
class RunArtifacts:
    run_dir: Path
    summary: Dict
    csv_paths: Dict[str, Path]
    plots: List[Path]
    workbook: Optional[Path] = None


def size_label(hidden: Sequence[int]) -> str:
    return 'x'.join(str(h) for h in hidden)


def _with_kind(base: ExperimentConfig, kind: AgentKind) -> ExperimentConfig:
    return replace(base, agent=replace(base.agent, kind=kind))


def build_settings(base: ExperimentConfig) -> List[Setting]:
    """Expand the recipe into its settings, in a fixed order."""
    recipe = base.recipe
    if recipe == 'baseline':
        return [Setting(k.value, 'all', _with_kind(base, k)) for k in AGENT_KINDS]
    if recipe == 'size_sweep':
        settings = []
        for hidden_policy in HIDDEN_SIZES:
            for hidden_distilled in HIDDEN_SIZES:
                agent = replace(base.agent, kind=AgentKind.DUAL,
                                hidden_policy=hidden_policy, hidden_distilled=hidden_distilled)
                settings.append(Setting(
                    f"dual_mf{size_label(hidden_policy)}_d{size_label(hidden_distilled)}",
                    f"mf{size_label(hidden_policy)}",
                    replace(base, agent=agent),
                ))
        return settings
    if recipe == 'map_sweep':
        settings = []
        for map_size in SWEEP_MAP_SIZES:
            env = replace(base.env, map_size=float(map_size), max_steps=None)
            for kind in AGENT_KINDS:
                settings.append(Setting(
                    f"{kind.value}_map{map_size}", f"map{map_size}",
                    replace(_with_kind(base, kind), env=env),
                ))
        return settings
    if recipe in ('reflex_flight', 'reflex_freeze'):
        reflex = replace(base.reflex, kind=ReflexKind(recipe.split('_', 1)[1]))
        return [Setting(k.value, 'all', replace(_with_kind(base, k), reflex=reflex)) for k in AGENT_KINDS]
    return [Setting(base.agent.kind.value, 'all', base)]


def run_seed(config: ExperimentConfig, seed: int) -> Tuple[Agent, List[EpisodeRecord]]:
    """Train one agent from scratch, then evaluate it with frozen parameters."""
    agent = Agent.build(config.agent, SeedStreams(seed).stream(INIT), config.plan, config.reflex)
    result = training_loop(agent, config.env, config.train, config.train.total_steps, seed)
    eval_records = evaluate(agent, config.env, config.eval_episodes, seed)
    return agent, result.episodes + eval_records


def _job(setting: Setting, seed: int) -> Tuple[str, int, List[EpisodeRecord]]:
    logger.info(f"Starting {setting.label} seed {seed}")
    _, records = run_seed(setting.config, seed)
    return setting.label, seed, records


def _run_jobs(settings: Sequence[Setting], seeds: Sequence[int], workers: int) -> Dict[Tuple[str, int], List[EpisodeRecord]]:
    jobs = [(s, seed) for s in settings for seed in seeds]
    results = {}
    if workers <= 1 or len(jobs) == 1:
        for setting, seed in jobs:
            label, seed, records = _job(setting, seed)
            results[(label, seed)] = records
        return results
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        futures = [pool.submit(_job, setting, seed) for setting, seed in jobs]
        for future in as_completed(futures):
            label, seed, records = future.result()
            results[(label, seed)] = records
            logger.info(f"Finished {label} seed {seed} ({len(records)} episodes)")
    return results


def check_writable(out_dir: Path) -> Path:
    """Create ``out_dir`` and fail fast if it cannot be written."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if not os.access(out_dir, os.W_OK):
        raise PermissionError(f"output directory is not writable: {out_dir}")
    return out_dir


def build_summary(
    recipe: str,
    config_hash: str,
    settings: Sequence[Setting],
    records: Dict[str, List[EpisodeRecord]],
) -> Dict:
    """summary.json payload, computed from episode records alone.

    Proportions come from evaluation episodes; settings evaluated with zero
    episodes fall back to their training episodes.
    """
    per_agent = {}
    per_seed: Dict[str, Dict[str, List[float]]] = {}
    for setting in settings:
        rows = records.get(setting.label, [])
        phase = 'eval' if any(r.phase == 'eval' for r in rows) else 'train'
        proportions = outcome_proportions(rows, phase)
        per_seed[setting.label] = {o: [p[o] for p in proportions.values()] for o in OUTCOMES}
        entry = {'agent': setting.config.agent.kind.value, 'group': setting.group, 'phase': phase}
        for outcome in OUTCOMES:
            samples = per_seed[setting.label][outcome]
            stats = summarize(samples).as_dict() if samples else {'mean': None, 'std': None, 'ci95': None}
            stats['per_seed'] = {str(seed): p[outcome] for seed, p in proportions.items()}
            entry[outcome] = stats
        entry['n_seeds'] = len(proportions)
        per_agent[setting.label] = entry

    blocks: Dict[str, List[str]] = defaultdict(list)
    for setting in settings:
        blocks[setting.group].append(setting.label)

    pairwise = {}
    for labels in blocks.values():
        for a, b in combinations(labels, 2):
            values = {}
            for outcome in OUTCOMES:
                sa, sb = per_seed[a][outcome], per_seed[b][outcome]
                values[outcome] = welch_t_test(sa, sb)[1] if len(sa) >= 2 and len(sb) >= 2 else None
            pairwise[f"{a} vs {b}"] = values

    return {
        'recipe': recipe,
        'config_hash': config_hash,
        'per_agent': per_agent,
        'pairwise_p_values': pairwise,
        'blocks': dict(blocks),
    }


def run_experiment(config: ExperimentConfig, out_dir: Path, workers: int = 1) -> RunArtifacts:
    """Run every (setting, seed) job and write the run directory.

    Layout: settings/<label>/episodes.csv, summary.json, summary.xlsx and
    outcome_{success,death,timeout}.svg.
    """
    out_dir = check_writable(out_dir)
    settings = build_settings(config)
    logger.info(
        f"Experiment '{config.recipe}' ({config.config_hash}): {len(settings)} settings x "
        f"{len(config.seeds)} seeds on {workers} worker(s)"
    )
    results = _run_jobs(settings, config.seeds, workers)

    by_label: Dict[str, List[EpisodeRecord]] = {}
    csv_paths = {}
    for setting in settings:
        rows = []
        for seed in config.seeds:
            rows.extend(results[(setting.label, seed)])
        by_label[setting.label] = rows
        csv_paths[setting.label] = write_episodes_csv(rows, out_dir / 'settings' / setting.label / 'episodes.csv')

    summary = build_summary(config.recipe, config.config_hash, settings, by_label)
    summary_path = out_dir / 'summary.json'
    summary_path.write_text(json.dumps(summary, indent=2) + '\n', encoding='utf-8')
    workbook = export_summary_to_xlsx(summary, out_dir / 'summary.xlsx')

    plots = []
    if any(r.phase == 'train' for rows in by_label.values() for r in rows):
        plots = emit_plot(csv_paths, config.plot_window, out_dir, config.plot_band)
    else:
        logger.warning("No training episodes recorded; skipping learning-curve plots")
    logger.info(f"Experiment written to {out_dir}")
    return RunArtifacts(out_dir, summary, csv_paths, plots, workbook)
