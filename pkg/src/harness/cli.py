"""Command-line interface: train, experiment, eval, gradcheck, stats, plot, bench."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

from ..agents.agent import Agent
from ..config import Config, ExperimentConfig
from ..errors import UsageError
from ..nn.gradcheck import run_suite
from ..training.loss_checks import run_loss_checks
from ..training.trainer import evaluate, training_loop
from ..utils.rng import INIT, SeedStreams
from .bench import run_bench
from .checkpoint import CHECKPOINT_NAME, load_agent, save_agent
from .experiment import check_writable, run_experiment
from .plots import emit_plot
from .records import OUTCOMES, write_episodes_csv
from .stats import welch_t_test

logger = logging.getLogger(__name__)

GRADCHECK_TOLERANCE = 1e-5
RUN_LOG_NAME = 'dualplan.log'
SAVED_CONFIG_NAME = 'config.cfg'
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


class ArgumentParser(argparse.ArgumentParser):
    """argparse that raises instead of exiting on bad usage."""

    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def attach_run_log(run_dir: Path) -> logging.Handler:
    """Mirror log records into <run_dir>/dualplan.log."""
    handler = logging.FileHandler(Path(run_dir) / RUN_LOG_NAME, encoding='utf-8')
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logging.getLogger().addHandler(handler)
    return handler


def _load_config(args) -> Config:
    config = Config.from_file(Path(args.config)) if args.config else Config()
    if args.seed is not None:
        config.set('seeds', [args.seed])
    return config


def _with_run_log(run_dir: Path, fn: Callable[[], int]) -> int:
    handler = attach_run_log(run_dir)
    try:
        return fn()
    finally:
        logging.getLogger().removeHandler(handler)
        handler.close()


# ---------------------------------------------------------------- subcommands

def cmd_train(args) -> int:
    config = _load_config(args)
    experiment = ExperimentConfig.from_config(config)
    seed = experiment.seeds[0]
    out = check_writable(Path(args.out) if args.out else Path('runs') / f"train-{experiment.config_hash}-s{seed}")

    def run() -> int:
        agent = Agent.build(experiment.agent, SeedStreams(seed).stream(INIT), experiment.plan, experiment.reflex)
        result = training_loop(agent, experiment.env, experiment.train, experiment.train.total_steps, seed)
        write_episodes_csv(result.episodes, out / 'episodes.csv')
        save_agent(agent, experiment.agent, out / CHECKPOINT_NAME)
        config.save(out / SAVED_CONFIG_NAME)
        print(f"trained {experiment.agent.kind.value} agent: {len(result.episodes)} episodes -> {out}")
        return 0

    return _with_run_log(out, run)


def cmd_experiment(args) -> int:
    config = _load_config(args)
    if args.workers is not None:
        config.set('workers', args.workers)
    experiment = ExperimentConfig.from_config(config)
    out = check_writable(Path(args.out) if args.out else Path('runs') / f"{experiment.recipe}-{experiment.config_hash}")

    def run() -> int:
        config.save(out / SAVED_CONFIG_NAME)
        artifacts = run_experiment(experiment, out, workers=config.workers)
        for label, entry in artifacts.summary['per_agent'].items():
            success = entry['success']
            std = success['std']
            spread = f" +/- {100 * std:.2f}" if std is not None else ""
            print(f"{label}: success {100 * success['mean']:.2f}%{spread}")
        return 0

    return _with_run_log(out, run)


def cmd_eval(args) -> int:
    checkpoint_dir = Path(args.checkpoint)
    saved = checkpoint_dir / SAVED_CONFIG_NAME
    config = Config.from_file(Path(args.config) if args.config else saved)
    if args.seed is not None:
        config.set('seeds', [args.seed])
    experiment = ExperimentConfig.from_config(config)
    episodes = args.episodes if args.episodes is not None else experiment.eval_episodes
    seed = experiment.seeds[0]
    agent = load_agent(checkpoint_dir / CHECKPOINT_NAME, experiment.plan, experiment.reflex)
    records = evaluate(agent, experiment.env, episodes, seed)
    out = check_writable(Path(args.out) if args.out else checkpoint_dir / 'eval')
    write_episodes_csv(records, out / 'episodes.csv')
    counts = {o: sum(r.outcome == o for r in records) for o in OUTCOMES}
    total = max(len(records), 1)
    print(' '.join(f"{o} {100 * counts[o] / total:.2f}%" for o in OUTCOMES))
    return 0


def cmd_gradcheck(args) -> int:
    seed = args.seed if args.seed is not None else 0
    errors = [r.max_relative_error for r in run_suite(seed, args.probes)]
    errors += [r.max_relative_error for r in run_loss_checks(seed, args.probes)]
    worst = max(errors)
    print(f"max relative error: {worst:.3e}")
    if worst >= GRADCHECK_TOLERANCE:
        raise RuntimeError(f"gradient check failed: {worst:.3e} >= {GRADCHECK_TOLERANCE}")
    return 0


def _per_seed(summary: Dict, label: str, outcome: str) -> List[float]:
    try:
        per_seed = summary['per_agent'][label][outcome]['per_seed']
    except KeyError as e:
        raise UsageError(f"summary has no per-seed {outcome} values for '{label}'") from e
    return [per_seed[k] for k in sorted(per_seed, key=int)]


def cmd_stats(args) -> int:
    a = json.loads(Path(args.summary_a).read_text(encoding='utf-8'))
    b = json.loads(Path(args.summary_b).read_text(encoding='utf-8'))
    labels = [args.agent] if args.agent else [k for k in a['per_agent'] if k in b['per_agent']]
    if not labels:
        raise UsageError("the two summaries share no agent labels; pass --agent")
    for label in labels:
        t, p = welch_t_test(_per_seed(a, label, args.outcome), _per_seed(b, label, args.outcome))
        prefix = f"{label} {args.outcome}: " if len(labels) > 1 else ""
        print(f"{prefix}t = {t:.3f}, p = {p:.3f}")
    return 0


def cmd_plot(args) -> int:
    inputs = {}
    for item in args.csv:
        label, sep, path = item.partition('=')
        if not sep:
            path = item
            label = Path(item).parent.name or Path(item).stem
        inputs[label] = Path(path)
    out = Path(args.out) if args.out else next(iter(inputs.values())).parent
    for path in emit_plot(inputs, args.window, out, args.band):
        print(path)
    return 0


def cmd_bench(args) -> int:
    results = run_bench(args.calls, args.seed if args.seed is not None else 0)
    for r in results:
        print(f"{r.kind:6s} {r.hidden:18s} params {r.self_model_parameters:7d}  "
              f"query {r.query_us:9.1f}us  plan {r.plan_us:10.1f}us")
    if args.out:
        out = check_writable(Path(args.out))
        (out / 'bench.json').write_text(json.dumps([r.as_dict() for r in results], indent=2) + '\n', encoding='utf-8')
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument('--config', help='config file (flat key = value or YAML)')
    common.add_argument('--seed', type=int, help='run a single master seed')
    common.add_argument('--out', help='output directory')
    common.add_argument('--verbose', action='store_true', help='debug logging')

    parser = ArgumentParser(prog='dualplan', description='Self-model planning agents in a predator/prey box.')
    sub = parser.add_subparsers(dest='command', parser_class=ArgumentParser)

    p = sub.add_parser('train', parents=[common], help='train one agent for one seed')
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser(
        'experiment', parents=[common], help='run a full recipe over all seeds',
        description='Run every setting of the recipe over all seeds. Episode rows go to '
                    'settings/<label>/episodes.csv, one file per setting, next to '
                    'summary.json, summary.xlsx and the outcome SVGs.',
    )
    p.add_argument('--workers', type=int, help='worker processes (overrides config)')
    p.set_defaults(handler=cmd_experiment)

    p = sub.add_parser('eval', parents=[common], help='evaluate a saved agent')
    p.add_argument('--checkpoint', required=True, help='directory holding agent.npz and config.cfg')
    p.add_argument('--episodes', type=int, help='evaluation episodes (default: eval_episodes)')
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser('gradcheck', parents=[common], help='finite-difference gradient suite')
    p.add_argument('--probes', type=int, default=100)
    p.set_defaults(handler=cmd_gradcheck)

    p = sub.add_parser('stats', parents=[common], help="Welch t-test between two summary.json files")
    p.add_argument('summary_a')
    p.add_argument('summary_b')
    p.add_argument('--agent', help='setting label (default: every shared label)')
    p.add_argument('--outcome', choices=OUTCOMES, default='success')
    p.set_defaults(handler=cmd_stats)

    p = sub.add_parser('plot', parents=[common], help='learning curves from episodes.csv files')
    p.add_argument('csv', nargs='+', help='episodes.csv or label=episodes.csv')
    p.add_argument('--window', type=int, default=100)
    p.add_argument('--band', choices=('std', 'ci95'), default='std')
    p.set_defaults(handler=cmd_plot)

    p = sub.add_parser('bench', parents=[common], help='time self-model queries and planning')
    p.add_argument('--calls', type=int, default=200)
    p.set_defaults(handler=cmd_bench)
    return parser


def cli(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand; 0 on success, 1 on usage errors, 2 on runtime errors."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(f"{parser.format_usage()}{parser.prog}: error: a subcommand is required")
        if args.verbose:
            logging.getLogger().setLevel(logging.DEBUG)
        return args.handler(args)
    except UsageError as e:
        print(str(e), file=sys.stderr)
        return 1
    except SystemExit as e:
        # --help
        return int(e.code or 0)
    except Exception as e:
        logger.exception("Command failed")
        print(f"error: {e}", file=sys.stderr)
        return 2
