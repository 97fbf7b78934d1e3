"""Labeled random streams derived from one master seed.

Each consumer (environment, agent sampling, planner, minibatch shuffles, ...)
gets its own ``numpy.random.Generator``. Child seeds come from hashing the
master seed together with the label, so adding draws in one stream never
perturbs another.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Dict

import numpy as np

# Stream labels used across the package
ENV = 'env'
AGENT = 'agent'
PLANNER = 'planner'
SHUFFLE = 'shuffle'
INIT = 'init'


def _hash_to_u64(text: str) -> int:
    digest = hashlib.sha256(text.encode('utf-8')).digest()
    return int.from_bytes(digest[:8], 'big', signed=False)


def derive_seed(master_seed: int, label: str) -> int:
    """Map (master seed, label) to a stable 64-bit child seed."""
    if not label:
        raise ValueError("stream label must be non-empty")
    return _hash_to_u64(f"{int(master_seed)}:{label}")


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator for an explicit seed."""
    return np.random.default_rng(np.random.PCG64(seed))


@dataclass
class SeedStreams:
    """Persistent named child streams of one master seed."""

    master_seed: int
    _streams: Dict[str, np.random.Generator] = field(default_factory=dict, init=False, repr=False)

    def stream(self, label: str) -> np.random.Generator:
        """Return the generator for ``label``, creating it on first use."""
        if label not in self._streams:
            self._streams[label] = make_rng(derive_seed(self.master_seed, label))
        return self._streams[label]

    def child(self, label: str) -> 'SeedStreams':
        """Nested stream family, e.g. one per evaluation phase."""
        return SeedStreams(derive_seed(self.master_seed, label))
