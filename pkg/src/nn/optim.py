"""Adam with bias correction over lists of numpy parameter arrays."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ParamLabel:
    """Where a parameter array lives: owning network, layer and role."""
    network: str
    layer: Optional[int]
    role: str

    def __str__(self) -> str:
        if self.layer is None:
            return f"{self.network}.{self.role}"
        return f"{self.network}.layer{self.layer}.{self.role}"


class NonFiniteGradientError(FloatingPointError):
    """Raised when a gradient contains NaN/inf; the update is rejected."""

    def __init__(self, param_index: int, label: Optional[ParamLabel] = None):
        self.param_index = param_index
        self.label = label
        self.layer_index = label.layer if label is not None else None
        where = str(label) if label is not None else f"parameter {param_index}"
        super().__init__(f"Non-finite gradient in {where} (parameter {param_index}); update rejected")


@dataclass
class AdamState:
    first_moment: List[np.ndarray] = field(default_factory=list)
    second_moment: List[np.ndarray] = field(default_factory=list)
    step_count: int = 0
    lr: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: Sequence[np.ndarray], lr: float = 3e-4, **kwargs) -> 'AdamState':
        return cls(
            first_moment=[np.zeros_like(p) for p in params],
            second_moment=[np.zeros_like(p) for p in params],
            lr=lr,
            **kwargs,
        )


def adam_step(
    params: Sequence[np.ndarray],
    grads: Sequence[np.ndarray],
    state: AdamState,
    labels: Optional[Sequence[ParamLabel]] = None,
) -> Tuple[List[np.ndarray], AdamState]:
    """One Adam update. Returns new parameter arrays and the advanced state.

    ``labels`` names each parameter in the non-finite gradient error.
    """
    if len(params) != len(grads):
        raise ValueError(f"{len(params)} parameters but {len(grads)} gradients")
    if labels is not None and len(labels) != len(params):
        raise ValueError(f"{len(params)} parameters but {len(labels)} labels")
    if not state.first_moment:
        state = replace(
            state,
            first_moment=[np.zeros_like(p) for p in params],
            second_moment=[np.zeros_like(p) for p in params],
        )
    for i, (p, g) in enumerate(zip(params, grads)):
        if p.shape != np.shape(g):
            raise ValueError(f"Gradient {i} has shape {np.shape(g)}, parameter has {p.shape}")
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradientError(i, labels[i] if labels is not None else None)

    t = state.step_count + 1
    new_params, new_m, new_v = [], [], []
    for p, g, m, v in zip(params, grads, state.first_moment, state.second_moment):
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * g * g
        m_hat = m / (1.0 - state.beta1 ** t)
        v_hat = v / (1.0 - state.beta2 ** t)
        new_params.append(p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps))
        new_m.append(m)
        new_v.append(v)
    return new_params, replace(state, first_moment=new_m, second_moment=new_v, step_count=t)


class Adam:
    """Stateful optimizer bound to a list of live parameter arrays."""

    def __init__(
        self,
        params: Sequence[np.ndarray],
        lr: float = 3e-4,
        labels: Optional[Sequence[ParamLabel]] = None,
    ):
        self.params = list(params)
        self.labels = list(labels) if labels is not None else None
        if self.labels is not None and len(self.labels) != len(self.params):
            raise ValueError(f"{len(self.params)} parameters but {len(self.labels)} labels")
        self.state = AdamState.for_params(self.params, lr=lr)

    @classmethod
    def for_model(cls, model, lr: float = 3e-4) -> 'Adam':
        """Bind to ``model.parameters()`` labelled by ``model.parameter_labels()``."""
        return cls(model.parameters(), lr=lr, labels=model.parameter_labels())

    def step(self, grads: Sequence[np.ndarray]):
        """Apply one update in place; parameters stay untouched on error."""
        new_params, self.state = adam_step(self.params, grads, self.state, self.labels)
        for p, new in zip(self.params, new_params):
            p[...] = new
