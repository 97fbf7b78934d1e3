"""Hard-wired flight/freeze overrides that fire when the predator is close."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from ..errors import ConfigError
from .survival_env import EnvState

# Flight direction when predator and agent coincide exactly
FLIGHT_FALLBACK = np.array([1.0, 0.0])


class ReflexKind(str, Enum):
    NONE = 'none'
    FLIGHT = 'flight'
    FREEZE = 'freeze'


@dataclass(frozen=True)
class ReflexConfig:
    kind: ReflexKind = ReflexKind.NONE
    trigger_distance: float = 1.5

    def __post_init__(self):
        object.__setattr__(self, 'kind', ReflexKind(self.kind))
        if self.trigger_distance <= 0:
            raise ConfigError(f"reflex.trigger_distance must be positive, got {self.trigger_distance}")

    def validate_against(self, catch_radius: float):
        """A reflex must be able to fire before the agent is caught."""
        if self.kind is not ReflexKind.NONE and self.trigger_distance <= catch_radius:
            raise ConfigError(
                f"reflex.trigger_distance ({self.trigger_distance}) must exceed "
                f"env.catch_radius ({catch_radius})"
            )


def reflex_override(state: EnvState, config: ReflexConfig) -> Optional[np.ndarray]:
    """Reflex action, or None when no reflex fires (boundary inclusive)."""
    if config.kind is ReflexKind.NONE:
        return None
    offset = np.asarray(state.agent_xy, dtype=float) - np.asarray(state.predator_xy, dtype=float)
    distance = float(np.linalg.norm(offset))
    if distance > config.trigger_distance:
        return None
    if config.kind is ReflexKind.FREEZE:
        return np.zeros(2)
    if distance == 0.0:
        return FLIGHT_FALLBACK.copy()
    return offset / distance
