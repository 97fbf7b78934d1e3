"""Rolling outcome-proportion learning curves written as SVG."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from scipy import stats as sps

from .records import OUTCOMES, EpisodeRecord, group_by_seed, read_episodes_csv

logger = logging.getLogger(__name__)

BANDS = ('std', 'ci95')


@dataclass
class Curve:
    """Mean rolling proportion across seeds with lower/upper band edges.

    ``episodes[i]`` is the 1-based index of the last episode in window i.
    """
    episodes: np.ndarray
    mean: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    n_seeds: int


def rolling_proportion(hits: np.ndarray, window: int) -> np.ndarray:
    """Trailing full-window means of a 0/1 series."""
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    if hits.size < window:
        return np.zeros(0)
    cumsum = np.concatenate([[0.0], np.cumsum(hits, dtype=float)])
    return (cumsum[window:] - cumsum[:-window]) / window


def rolling_outcome_curve(
    records: Sequence[EpisodeRecord],
    outcome: str,
    window: int,
    band: str = 'std',
) -> Curve:
    """Training-phase curve for one outcome.

    Each seed contributes its rolling proportion; curves are truncated to the
    shortest seed. A single seed yields a zero-width band.
    """
    if outcome not in OUTCOMES:
        raise ValueError(f"unknown outcome '{outcome}'")
    if band not in BANDS:
        raise ValueError(f"band must be one of {BANDS}, got '{band}'")
    per_seed = group_by_seed(records, 'train')
    if not per_seed:
        raise ValueError("no training episodes to plot")
    window = min(window, min(len(rows) for rows in per_seed.values()))
    series = [
        rolling_proportion(np.array([r.outcome == outcome for r in rows], dtype=float), window)
        for rows in per_seed.values()
    ]
    length = min(s.size for s in series)
    matrix = np.stack([s[:length] for s in series])
    mean = matrix.mean(axis=0)
    n = matrix.shape[0]
    if n < 2:
        half = np.zeros(length)
    else:
        half = matrix.std(axis=0, ddof=1)
        if band == 'ci95':
            half = half * float(sps.t.ppf(0.975, n - 1)) / math.sqrt(n)
    episodes = np.arange(window, window + length)
    return Curve(episodes, mean, mean - half, mean + half, n)


def _plot_curves(curves: Mapping[str, Curve], outcome: str, window: int, band: str, path: Path) -> Path:
    plt.figure(figsize=(8, 5))
    for label, curve in curves.items():
        line, = plt.plot(curve.episodes, curve.mean, label=label)
        plt.fill_between(curve.episodes, curve.lower, curve.upper, color=line.get_color(), alpha=0.2)
    plt.xlabel("Episodes")
    plt.ylabel(f"Proportion of {outcome}")
    plt.ylim(-0.05, 1.05)
    plt.title(f"{outcome.capitalize()} rate (window {window}, band {band})")
    plt.grid(True, linestyle="--", alpha=0.3)
    plt.legend()
    plt.tight_layout()
    plt.savefig(path, format='svg')
    plt.close()
    return path


def emit_plot(
    inputs: Mapping[str, Path] | Path,
    window: int,
    out_dir: Path,
    band: str = 'std',
) -> List[Path]:
    """Write outcome_{success,death,timeout}.svg into ``out_dir``.

    ``inputs`` is one episodes.csv or a mapping label -> episodes.csv; every
    label becomes one mean line with its shaded band.
    """
    if not isinstance(inputs, Mapping):
        inputs = {Path(inputs).parent.name or 'agent': Path(inputs)}
    loaded: Dict[str, List[EpisodeRecord]] = {label: read_episodes_csv(path) for label, path in inputs.items()}
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    written = []
    for outcome in OUTCOMES:
        curves = {label: rolling_outcome_curve(rows, outcome, window, band) for label, rows in loaded.items()}
        written.append(_plot_curves(curves, outcome, window, band, out_dir / f"outcome_{outcome}.svg"))
    logger.info(f"Wrote {len(written)} learning-curve plots to {out_dir}")
    return written
