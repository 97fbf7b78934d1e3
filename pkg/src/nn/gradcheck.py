"""Finite-difference checks of analytic gradients."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np

from .dense import DenseNet, NetSpec

logger = logging.getLogger(__name__)

# Specs the experiments use: policy actors/critics, distilled trunks, world model
EXPERIMENT_SPECS: Tuple[NetSpec, ...] = tuple(
    NetSpec(input_dim, hidden, output_dim)
    for hidden in ((32,), (64, 64), (128, 128, 128, 128))
    for input_dim, output_dim in ((6, 2), (6, 1), (6, 3))
) + (NetSpec(20, (64, 64), 7),)

RELATIVE_FLOOR = 1e-4


def relative_error(analytic: float, numeric: float, floor: float = RELATIVE_FLOOR) -> float:
    """|a - n| / max(|a| + |n|, floor); the floor keeps near-zero gradients meaningful."""
    return abs(analytic - numeric) / max(abs(analytic) + abs(numeric), floor)


def check_function(
    loss_fn: Callable[[], float],
    params: Sequence[np.ndarray],
    grads: Sequence[np.ndarray],
    rng: np.random.Generator,
    probes: int = 100,
    h: float = 1e-5,
) -> float:
    """Max relative error between ``grads`` and central differences of ``loss_fn``.

    ``loss_fn`` must read the live ``params`` arrays; each probe perturbs one
    randomly chosen entry and restores it.
    """
    worst = 0.0
    sizes = np.array([p.size for p in params], dtype=float)
    for _ in range(probes):
        k = int(rng.choice(len(params), p=sizes / sizes.sum()))
        flat = params[k].reshape(-1)
        j = int(rng.integers(flat.size))
        original = flat[j]
        flat[j] = original + h
        plus = loss_fn()
        flat[j] = original - h
        minus = loss_fn()
        flat[j] = original
        numeric = (plus - minus) / (2.0 * h)
        analytic = float(np.asarray(grads[k]).reshape(-1)[j])
        worst = max(worst, relative_error(analytic, numeric))
    return worst


def check_net(spec: NetSpec, rng: np.random.Generator, probes: int = 100, batch: int = 4) -> float:
    """Gradcheck of the scalar <c, forward(x)> for a random net, input batch and c."""
    net = DenseNet.initialize(spec, rng, output_gain=1.0)
    for b in net.biases:
        b[...] = rng.normal(0.0, 0.1, b.shape)
    x = rng.uniform(-1.0, 1.0, (batch, spec.input_dim))
    c = rng.normal(size=(batch, spec.output_dim))

    def loss() -> float:
        return float(np.sum(c * net.forward(x)))

    grads, _ = net.backward(x, c)
    return check_function(loss, net.parameters(), grads.as_list(), rng, probes=probes)


@dataclass
class GradcheckResult:
    spec: NetSpec
    max_relative_error: float


def run_suite(seed: int = 0, probes: int = 100) -> List[GradcheckResult]:
    """Gradcheck every network shape the experiments instantiate."""
    rng = np.random.default_rng(seed)
    results = []
    for spec in EXPERIMENT_SPECS:
        err = check_net(spec, rng, probes=probes)
        logger.debug(f"gradcheck {spec.input_dim}->{list(spec.hidden)}->{spec.output_dim}: {err:.3e}")
        results.append(GradcheckResult(spec, err))
    return results
