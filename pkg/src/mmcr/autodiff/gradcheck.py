"""Central finite-difference gradient checking."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .tensor import Tensor


def gradcheck(
    fn: Callable[..., Tensor],
    inputs: Sequence[np.ndarray],
    h: float = 1e-5,
    seed: int = 0,
    floor: float = 1e-6,
) -> float:
    """Max per-element relative error between backprop and central differences.

    ``fn`` maps float64 tensors to a tensor of any shape; it is reduced to a
    scalar through a fixed random projection so every output entry counts.
    Relative error is |analytic - numeric| / max(|analytic|, floor).
    """
    arrays = [np.array(a, dtype=np.float64) for a in inputs]
    probe = fn(*[Tensor(a) for a in arrays])
    proj = np.random.default_rng(seed).standard_normal(probe.shape)

    def scalar(arrs):
        return float((fn(*[Tensor(a) for a in arrs]).data * proj).sum())

    leaves = [Tensor(a.copy(), requires_grad=True) for a in arrays]
    out = fn(*leaves)
    (out * Tensor(proj)).sum().backward()

    worst = 0.0
    for k, leaf in enumerate(leaves):
        analytic = leaf.grad if leaf.grad is not None else np.zeros_like(arrays[k])
        flat = arrays[k].reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = scalar(arrays)
            flat[i] = orig - h
            down = scalar(arrays)
            flat[i] = orig
            numeric = (up - down) / (2 * h)
            a = analytic.reshape(-1)[i]
            worst = max(worst, abs(a - numeric) / max(abs(a), floor))
    return worst
