"""Trainable parameter sets, seeded randomness, dropout and initialization."""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Iterator, Mapping

import numpy as np

from .tensor import DEFAULT_DTYPE, ShapeError, Tensor, _result

_MASK64 = (1 << 64) - 1


def _key(part) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    return int(part) & _MASK64


def rng_for(seed: int, *keys) -> np.random.Generator:
    """Independent generator for (seed, *keys); strings are hashed stably."""
    return np.random.default_rng([_key(seed), *(_key(k) for k in keys)])


class ParameterStore:
    """Named trainable tensors, iterated in sorted-name order."""

    def __init__(self, params: Mapping[str, Tensor] | None = None, rng_seed: int = 0):
        self._params: dict[str, Tensor] = {}
        self.rng_seed = rng_seed
        for name, t in (params or {}).items():
            self.add(name, t)

    def add(self, name: str, tensor: Tensor) -> Tensor:
        if name in self._params:
            raise KeyError(f"duplicate parameter name {name!r}")
        tensor.requires_grad = True
        tensor.name = name
        self._params[name] = tensor
        return tensor

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __len__(self) -> int:
        return len(self._params)

    def __iter__(self) -> Iterator[str]:
        return iter(sorted(self._params))

    def names(self) -> list[str]:
        return sorted(self._params)

    def items(self) -> list[tuple[str, Tensor]]:
        return [(n, self._params[n]) for n in self.names()]

    def subset(self, prefix: str) -> ParameterStore:
        """View sharing the same tensors for names starting with ``prefix``."""
        out = ParameterStore(rng_seed=self.rng_seed)
        out._params = {n: t for n, t in self._params.items() if n.startswith(prefix)}
        return out

    def merged(self, *others: ParameterStore) -> ParameterStore:
        out = ParameterStore(rng_seed=self.rng_seed)
        out._params = dict(self._params)
        for other in others:
            for n, t in other._params.items():
                if n in out._params and out._params[n] is not t:
                    raise KeyError(f"duplicate parameter name {n!r}")
                out._params[n] = t
        return out

    def zero_grad(self) -> None:
        for t in self._params.values():
            t.grad = None

    def state(self) -> dict[str, np.ndarray]:
        return {n: t.data.copy() for n, t in self.items()}

    def load_state(self, state: Mapping[str, np.ndarray]) -> None:
        for n, arr in state.items():
            if self._params[n].shape != arr.shape:
                raise ShapeError(f"{n}: shape {arr.shape} != {self._params[n].shape}")
            self._params[n].data = np.array(arr, dtype=self._params[n].dtype)

    def num_values(self) -> int:
        return sum(t.data.size for t in self._params.values())


def uniform_init(shape, bound: float, seed: int, name: str = "", counter: int = 0, dtype=DEFAULT_DTYPE) -> Tensor:
    """I.i.d. U[-bound, bound], deterministic per (seed, name, counter)."""
    if bound <= 0:
        raise ValueError("uniform_init: bound must be positive")
    rng = rng_for(seed, "init", name, counter)
    data = rng.uniform(-bound, bound, size=tuple(shape)).astype(dtype)
    return Tensor(data, requires_grad=True, name=name or None)


@dataclass
class DropoutMask:
    shape: tuple[int, ...]
    keep: np.ndarray  # bool, same shape
    p: float

    def __post_init__(self):
        if not 0 <= self.p < 1:
            raise ValueError(f"dropout probability must be in [0, 1), got {self.p}")
        self.keep = np.asarray(self.keep, dtype=bool)
        self.shape = tuple(self.shape)
        if self.keep.shape != self.shape:
            raise ShapeError(f"mask shape {self.keep.shape} != declared shape {self.shape}")

    @classmethod
    def draw(cls, shape, p: float, seed: int, counter: int = 0) -> DropoutMask:
        """Mask derived from (seed, draw counter); each entry kept w.p. 1 - p."""
        shape = tuple(shape)
        if not 0 <= p < 1:
            raise ValueError(f"dropout probability must be in [0, 1), got {p}")
        keep = rng_for(seed, "dropout", counter).random(shape) >= p
        return cls(shape, keep, p)


def dropout(x: Tensor, p: float, mask: DropoutMask | None) -> Tensor:
    """Inverted dropout: kept entries scaled by 1/(1-p). ``mask=None`` is identity."""
    if not 0 <= p < 1:
        raise ValueError(f"dropout probability must be in [0, 1), got {p}")
    if mask is None or p == 0:
        return x
    if mask.shape != x.shape:
        raise ShapeError(f"dropout: mask shape {mask.shape} != input shape {x.shape}")
    scale = (mask.keep / (1.0 - p)).astype(x.dtype)
    return _result(x.data * scale, "dropout", (x,), lambda g: (g * scale,))


def l2_penalty(store: ParameterStore, lam: float) -> Tensor:
    """lam * sum of squared parameter values, as one fused node."""
    if lam < 0:
        raise ValueError("l2 weight must be non-negative")
    tensors = [t for _, t in store.items()]
    if not tensors:
        return Tensor(np.zeros((), dtype=DEFAULT_DTYPE))
    dtype = np.result_type(*(t.dtype for t in tensors))
    total = sum(np.vdot(t.data, t.data) for t in tensors)
    out = np.asarray(lam * total, dtype=dtype)

    def backward(g):
        return tuple((2.0 * lam * g) * t.data for t in tensors)

    return _result(out, "l2_penalty", tensors, backward)


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step_count: int = 0

    def __post_init__(self):
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}


def adam_step(store: ParameterStore, state: AdamState) -> None:
    """One bias-corrected Adam update over every parameter; clears gradients."""
    missing = [n for n, t in store.items() if t.grad is None]
    if missing:
        raise ValueError(f"adam_step: no gradient for {', '.join(missing[:10])}")
    state.step_count += 1
    t = state.step_count
    c1 = 1 - state.beta1**t
    c2 = 1 - state.beta2**t
    for name, p in store.items():
        g = p.grad.astype(p.dtype, copy=False)
        m = state.m.get(name)
        if m is None:
            m = state.m[name] = np.zeros_like(p.data)
            state.v[name] = np.zeros_like(p.data)
        v = state.v[name]
        m *= state.beta1
        m += (1 - state.beta1) * g
        v *= state.beta2
        v += (1 - state.beta2) * (g * g)
        m_hat = m / c1
        v_hat = v / c2
        p.data = p.data - (state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon)).astype(p.dtype)
        p.grad = None
