"""Episode records and the episodes.csv format."""
from __future__ import annotations

import csv
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List

from ..errors import PlotDataError

CSV_HEADER = [
    'run_seed', 'episode_index', 'phase', 'outcome', 'steps', 'return',
    'plan_steps', 'reflex_steps', 'modelfree_steps',
]
PHASES = ('train', 'eval')
OUTCOMES = ('success', 'death', 'timeout')


@dataclass
class EpisodeRecord:
    run_seed: int
    episode_index: int
    phase: str
    outcome: str
    steps: int
    episode_return: float
    plan_steps: int = 0
    reflex_steps: int = 0
    modelfree_steps: int = 0

    def __post_init__(self):
        if self.phase not in PHASES:
            raise ValueError(f"phase must be one of {PHASES}, got '{self.phase}'")
        if self.outcome not in OUTCOMES:
            raise ValueError(f"outcome must be one of {OUTCOMES}, got '{self.outcome}'")
        if self.plan_steps + self.reflex_steps + self.modelfree_steps != self.steps:
            raise ValueError("mode step counts must sum to steps")

    def as_row(self) -> List[str]:
        return [
            str(self.run_seed), str(self.episode_index), self.phase, self.outcome,
            str(self.steps), repr(float(self.episode_return)),
            str(self.plan_steps), str(self.reflex_steps), str(self.modelfree_steps),
        ]


def write_episodes_csv(records: Iterable[EpisodeRecord], path: Path) -> Path:
    """UTF-8, LF line endings, fixed header."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(CSV_HEADER)
        for record in records:
            writer.writerow(record.as_row())
    return path


def read_episodes_csv(path: Path) -> List[EpisodeRecord]:
    """Parse episodes.csv; malformed rows raise PlotDataError with the line number."""
    records = []
    with open(path, 'r', encoding='utf-8', newline='') as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != CSV_HEADER:
            raise PlotDataError(1, f"unexpected header {header}")
        for line_number, row in enumerate(reader, start=2):
            if len(row) != len(CSV_HEADER):
                raise PlotDataError(line_number, f"expected {len(CSV_HEADER)} fields, got {len(row)}")
            try:
                records.append(EpisodeRecord(
                    run_seed=int(row[0]),
                    episode_index=int(row[1]),
                    phase=row[2],
                    outcome=row[3],
                    steps=int(row[4]),
                    episode_return=float(row[5]),
                    plan_steps=int(row[6]),
                    reflex_steps=int(row[7]),
                    modelfree_steps=int(row[8]),
                ))
            except ValueError as e:
                raise PlotDataError(line_number, str(e)) from e
    return records


def group_by_seed(records: Iterable[EpisodeRecord], phase: str) -> Dict[int, List[EpisodeRecord]]:
    grouped: Dict[int, List[EpisodeRecord]] = defaultdict(list)
    for record in records:
        if record.phase == phase:
            grouped[record.run_seed].append(record)
    for seed in grouped:
        grouped[seed].sort(key=lambda r: r.episode_index)
    return dict(sorted(grouped.items()))


def outcome_proportions(records: Iterable[EpisodeRecord], phase: str = 'eval') -> Dict[int, Dict[str, float]]:
    """Per-seed outcome fractions from integer counts (they sum to 1 per seed)."""
    proportions = {}
    for seed, rows in group_by_seed(records, phase).items():
        counts = Counter(r.outcome for r in rows)
        proportions[seed] = {o: counts[o] / len(rows) for o in OUTCOMES}
    return proportions
