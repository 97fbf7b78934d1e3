"""Outcome statistics: mean/std/95% CI across seeds and Welch's t-test."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import stats as sps

CI_LEVEL = 0.95


@dataclass
class OutcomeSummary:
    """Aggregate of one outcome's per-seed proportions.

    ``std`` and ``ci95`` are None when fewer than two seeds are available.
    """
    mean: float
    std: Optional[float]
    ci95: Optional[Tuple[float, float]]
    n: int

    def as_dict(self) -> Dict:
        return {
            'mean': self.mean,
            'std': self.std,
            'ci95': list(self.ci95) if self.ci95 is not None else None,
        }


def summarize(samples: Sequence[float]) -> OutcomeSummary:
    """Mean, sample std (n-1) and t-based 95% CI of ``samples``."""
    values = np.asarray(samples, dtype=float)
    n = values.size
    if n == 0:
        raise ValueError("summarize() needs at least one sample")
    mean = float(values.mean())
    if n < 2:
        return OutcomeSummary(mean, None, None, n)
    std = float(values.std(ddof=1))
    half_width = float(sps.t.ppf(0.5 + CI_LEVEL / 2, n - 1)) * std / math.sqrt(n)
    return OutcomeSummary(mean, std, (mean - half_width, mean + half_width), n)


def welch_t_test(a: Sequence[float], b: Sequence[float]) -> Tuple[float, float]:
    """Two-sided Welch t-test; returns (t, p)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise ValueError("welch_t_test needs at least two samples on each side")
    mean_diff = float(a.mean() - b.mean())
    se2_a = a.var(ddof=1) / a.size
    se2_b = b.var(ddof=1) / b.size
    se2 = se2_a + se2_b
    if se2 == 0.0:
        if mean_diff == 0.0:
            return 0.0, 1.0
        return math.copysign(math.inf, mean_diff), 0.0
    t = mean_diff / math.sqrt(se2)
    df = se2 ** 2 / (se2_a ** 2 / (a.size - 1) + se2_b ** 2 / (b.size - 1))
    p = float(2.0 * sps.t.sf(abs(t), df))
    return float(t), min(p, 1.0)
