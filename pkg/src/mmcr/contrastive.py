"""Unsupervised contrastive pretraining with dropout-twice positives."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from .autodiff import AdamState, ParameterStore, Tensor, adam_step, l2_normalize, log_softmax, rng_for
from .data import batches

log = logging.getLogger(__name__)


class Encoder(Protocol):
    params: ParameterStore

    def encode_batch(self, items: Sequence, mask_seed: int | None = None) -> Tensor: ...


@dataclass
class ContrastiveConfig:
    temperature: float = 0.05
    batch_size: int = 64
    epochs: int = 10
    lr: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


def similarity_logits(h: Tensor, h_plus: Tensor, temperature: float) -> Tensor:
    """N x N matrix of cosine(h_i, h+_j) / temperature."""
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    if h.shape != h_plus.shape or h.ndim != 2:
        raise ValueError(f"expected two N x d matrices, got {h.shape} and {h_plus.shape}")
    return (l2_normalize(h, axis=1) @ l2_normalize(h_plus, axis=1).T) * (1.0 / temperature)


def info_nce_loss(h: Tensor, h_plus: Tensor, temperature: float = 0.05) -> Tensor:
    """Mean over rows of -log softmax_j(sim(h_i, h+_j) / t) evaluated at j = i."""
    logits = similarity_logits(h, h_plus, temperature)
    n = h.shape[0]
    diag = np.arange(n)
    return -(log_softmax(logits, axis=1)[diag, diag].mean())


@dataclass
class PretrainResult:
    params: ParameterStore
    loss_history: list[float] = field(default_factory=list)


def draw_mask_pair(rng: np.random.Generator) -> tuple[int, int]:
    z = int(rng.integers(1 << 62))
    z2 = int(rng.integers(1 << 62))
    while z2 == z:
        z2 = int(rng.integers(1 << 62))
    return z, z2


def pretrain_encoder(inputs: Sequence, encoder: Encoder, config: ContrastiveConfig | None = None) -> PretrainResult:
    """Train ``encoder`` so two dropout views of an input identify each other in-batch.

    ``inputs`` are unlabeled encoder inputs (code graphs or comment token
    lists); no label ever reaches this loop.
    """
    config = config or ContrastiveConfig()
    if not inputs:
        raise ValueError("pretrain_encoder: empty corpus")
    if len({repr(x) for x in inputs}) == 1 and len(inputs) > 1:
        log.warning("pretraining corpus has only one distinct input; negatives are copies of the positive")
    rng = rng_for(config.seed, "contrastive")
    state = AdamState(lr=config.lr)
    history = []
    for epoch in range(config.epochs):
        losses = []
        for batch in batches(inputs, config.batch_size, seed=config.seed * 1_000_003 + epoch):
            if batch.size == 0:
                continue
            z, z2 = draw_mask_pair(rng)
            h = encoder.encode_batch(batch.samples, mask_seed=z)
            h_plus = encoder.encode_batch(batch.samples, mask_seed=z2)
            loss = info_nce_loss(h, h_plus, config.temperature)
            loss.backward()
            _fill_missing_grads(encoder.params)
            adam_step(encoder.params, state)
            losses.append(loss.item())
        history.append(float(np.mean(losses)))
        log.info("contrastive epoch %d mean loss %.4f", epoch, history[-1])
    return PretrainResult(encoder.params, history)


def _fill_missing_grads(store: ParameterStore) -> None:
    # A batch of one gives a constant loss, so nothing reaches the parameters.
    for _, t in store.items():
        if t.grad is None:
            t.grad = np.zeros_like(t.data)


def alignment_gap(encoder: Encoder, inputs: Sequence, seeds: tuple[int, int] = (11, 12)) -> tuple[float, float]:
    """(mean positive-pair cosine, mean in-batch negative cosine) under two dropout masks."""
    h = encoder.encode_batch(inputs, mask_seed=seeds[0]).data.astype(np.float64)
    hp = encoder.encode_batch(inputs, mask_seed=seeds[1]).data.astype(np.float64)
    h /= np.linalg.norm(h, axis=1, keepdims=True)
    hp /= np.linalg.norm(hp, axis=1, keepdims=True)
    sims = h @ hp.T
    n = len(inputs)
    pos = float(np.trace(sims) / n)
    neg = float((sims.sum() - np.trace(sims)) / (n * (n - 1))) if n > 1 else 0.0
    return pos, neg
