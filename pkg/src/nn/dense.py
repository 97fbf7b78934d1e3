"""Dense tanh networks with analytic reverse-mode gradients."""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Sequence, Tuple

import numpy as np

from .optim import ParamLabel

HIDDEN_GAIN = float(np.sqrt(2.0))


@dataclass(frozen=True)
class NetSpec:
    """Shape of a dense network: input -> hidden layers (tanh) -> linear output."""
    input_dim: int
    hidden: Tuple[int, ...]
    output_dim: int
    activation: str = 'tanh'

    def __post_init__(self):
        object.__setattr__(self, 'hidden', tuple(int(h) for h in self.hidden))
        if not self.hidden:
            raise ValueError("NetSpec.hidden must contain at least one layer")
        dims = (self.input_dim, *self.hidden, self.output_dim)
        if any(int(d) <= 0 for d in dims):
            raise ValueError(f"NetSpec dimensions must be positive, got {dims}")
        if self.activation != 'tanh':
            raise ValueError(f"Unsupported activation '{self.activation}'")

    @property
    def layer_dims(self) -> List[Tuple[int, int]]:
        dims = [self.input_dim, *self.hidden, self.output_dim]
        return list(zip(dims[:-1], dims[1:]))


class HeadLayout(str, Enum):
    """Output head arrangement of a policy network."""
    ACTOR_CRITIC_SEPARATE = 'actor+critic-separate'
    COMBINED_DISTILLED = 'combined-distilled'


def orthogonal(shape: Tuple[int, int], gain: float, rng: np.random.Generator) -> np.ndarray:
    """Orthogonal matrix of ``shape`` scaled by ``gain``."""
    rows, cols = shape
    flat = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(flat)
    q = q * np.sign(np.diag(r))
    if rows < cols:
        q = q.T
    return gain * q[:rows, :cols]


@dataclass
class Gradients:
    """Parameter gradients in the same layout as DenseNet.parameters()."""
    weights: List[np.ndarray]
    biases: List[np.ndarray]

    def as_list(self) -> List[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend([w, b])
        return out


@dataclass
class DenseNet:
    """Parameter container for one dense network.

    Weights are stored as (in, out) matrices so a batch ``x`` of shape
    (batch, in) maps to ``x @ W + b``.
    """
    spec: NetSpec
    weights: List[np.ndarray] = field(default_factory=list)
    biases: List[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        if not self.weights:
            self.weights = [np.zeros(shape) for shape in self.spec.layer_dims]
            self.biases = [np.zeros(shape[1]) for shape in self.spec.layer_dims]
        if len(self.weights) != len(self.spec.layer_dims) or len(self.biases) != len(self.weights):
            raise ValueError("Layer count does not match NetSpec")
        for i, (shape, w, b) in enumerate(zip(self.spec.layer_dims, self.weights, self.biases)):
            if w.shape != shape or b.shape != (shape[1],):
                raise ValueError(f"Layer {i} has shape {w.shape}/{b.shape}, expected {shape}")

    @classmethod
    def initialize(
        cls,
        spec: NetSpec,
        rng: np.random.Generator,
        output_gain: float | Sequence[float] = 1.0,
    ) -> 'DenseNet':
        """Orthogonal init, gain sqrt(2) on hidden layers, zero biases.

        ``output_gain`` may be a per-output-column sequence (the combined
        distilled head uses 0.01 for action means and 1.0 for the value).
        """
        weights = []
        for shape in spec.layer_dims[:-1]:
            weights.append(orthogonal(shape, HIDDEN_GAIN, rng))
        last = spec.layer_dims[-1]
        gains = np.broadcast_to(np.asarray(output_gain, dtype=float), (last[1],))
        weights.append(orthogonal(last, 1.0, rng) * gains[np.newaxis, :])
        biases = [np.zeros(shape[1]) for shape in spec.layer_dims]
        return cls(spec, weights, biases)

    def parameters(self) -> List[np.ndarray]:
        """[W0, b0, W1, b1, ...] (live references, updated in place by Adam)."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend([w, b])
        return out

    def parameter_labels(self, network: str) -> List[ParamLabel]:
        """Labels matching parameters() one to one."""
        labels = []
        for i in range(len(self.weights)):
            labels.extend([ParamLabel(network, i, 'W'), ParamLabel(network, i, 'b')])
        return labels

    def num_parameters(self) -> int:
        return int(sum(p.size for p in self.parameters()))

    def clone(self) -> 'DenseNet':
        return copy.deepcopy(self)

    def _check_input(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim not in (1, 2) or x.shape[-1] != self.spec.input_dim:
            raise ValueError(
                f"Input of shape {x.shape} does not match input_dim {self.spec.input_dim}"
            )
        return x

    def _activations(self, x: np.ndarray) -> List[np.ndarray]:
        last = len(self.weights) - 1
        acts = [x]
        h = x
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            h = np.tanh(z) if i < last else z
            acts.append(h)
        return acts

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Output for a single input vector or a (batch, input_dim) matrix."""
        x = self._check_input(x)
        return self._activations(x)[-1]

    def backward(self, x: np.ndarray, output_gradient: np.ndarray) -> Tuple[Gradients, np.ndarray]:
        """Reverse-mode gradients of <output_gradient, forward(x)>.

        Batched inputs sum parameter gradients over the batch.
        Returns (parameter gradients, gradient w.r.t. the input).
        """
        x = self._check_input(x)
        single = x.ndim == 1
        g = np.asarray(output_gradient, dtype=float)
        expected = (self.spec.output_dim,) if single else (x.shape[0], self.spec.output_dim)
        if g.shape != expected:
            raise ValueError(f"Output gradient shape {g.shape} does not match {expected}")
        if single:
            x = x[np.newaxis, :]
            g = g[np.newaxis, :]

        acts = self._activations(x)
        last = len(self.weights) - 1
        dws: List[np.ndarray] = [None] * len(self.weights)
        dbs: List[np.ndarray] = [None] * len(self.weights)
        for i in range(last, -1, -1):
            if i < last:
                g = g * (1.0 - acts[i + 1] ** 2)
            dws[i] = acts[i].T @ g
            dbs[i] = g.sum(axis=0)
            g = g @ self.weights[i].T
        input_grad = g[0] if single else g
        return Gradients(dws, dbs), input_grad


def forward(net: DenseNet, x: np.ndarray) -> np.ndarray:
    return net.forward(x)


def backward(net: DenseNet, x: np.ndarray, output_gradient: np.ndarray) -> Tuple[Gradients, np.ndarray]:
    return net.backward(x, output_gradient)


def dense_param_count(spec: NetSpec) -> int:
    return sum(i * o + o for i, o in spec.layer_dims)


def param_count(spec: NetSpec, head: HeadLayout | str, action_dim: int = 2) -> int:
    """Trainable parameters of a policy built on ``spec``'s input and hidden sizes.

    The output size of ``spec`` is ignored; the head layout decides it.
    Both layouts carry ``action_dim`` state-independent log-std entries.
    """
    head = HeadLayout(head)
    if head is HeadLayout.ACTOR_CRITIC_SEPARATE:
        actor = NetSpec(spec.input_dim, spec.hidden, action_dim)
        critic = NetSpec(spec.input_dim, spec.hidden, 1)
        return dense_param_count(actor) + dense_param_count(critic) + action_dim
    trunk = NetSpec(spec.input_dim, spec.hidden, action_dim + 1)
    return dense_param_count(trunk) + action_dim
