"""Skip-gram with negative sampling for symbol embeddings."""

from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from ..autodiff.params import rng_for
from .vocab import Vocab

log = logging.getLogger(__name__)


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def skipgram_pretrain(
    sequences: Sequence[Sequence[str]],
    vocab: Vocab,
    dim: int,
    window: int = 2,
    negatives: int = 5,
    epochs: int = 5,
    seed: int = 0,
    lr: float = 0.025,
    batch_size: int = 256,
) -> np.ndarray:
    """Train input embeddings, returned as a (len(vocab), dim) float32 matrix.

    Noise words are drawn from the unigram distribution raised to 0.75.
    The learning rate decays linearly to 1e-4 * lr over all updates.
    """
    if dim <= 0:
        raise ValueError("skipgram_pretrain: dim must be positive")
    if window < 1:
        raise ValueError("skipgram_pretrain: window must be >= 1")
    rng = rng_for(seed, "skipgram")
    V = len(vocab)
    w_in = rng.uniform(-0.5 / dim, 0.5 / dim, size=(V, dim))
    w_out = np.zeros((V, dim))

    encoded = [np.asarray(vocab.encode(s), dtype=np.int64) for s in sequences]
    centers, contexts = [], []
    for ids in encoded:
        n = len(ids)
        for off in range(1, window + 1):
            if off >= n:
                break
            centers += [ids[:-off], ids[off:]]
            contexts += [ids[off:], ids[:-off]]
    real_tokens = V - 2
    if real_tokens < 2 or not centers:
        return w_in.astype(np.float32)
    centers = np.concatenate(centers)
    contexts = np.concatenate(contexts)

    counts = np.bincount(np.concatenate(encoded), minlength=V).astype(np.float64)
    counts[vocab.pad_index] = 0
    noise = counts**0.75
    noise /= noise.sum()

    total = epochs * int(np.ceil(len(centers) / batch_size))
    step = 0
    for epoch in range(epochs):
        order = rng.permutation(len(centers))
        loss_sum = 0.0
        for start in range(0, len(order), batch_size):
            idx = order[start : start + batch_size]
            c, o = centers[idx], contexts[idx]
            neg = rng.choice(V, size=(len(idx), negatives), p=noise)
            alpha = lr * max(1e-4, 1.0 - step / total)
            step += 1

            vc = w_in[c]  # (b, d)
            targets = np.concatenate([o[:, None], neg], axis=1)  # (b, 1+k)
            vo = w_out[targets]  # (b, 1+k, d)
            score = np.einsum("bd,bkd->bk", vc, vo)
            label = np.zeros_like(score)
            label[:, 0] = 1.0
            p = _sigmoid(score)
            loss_sum -= np.log(np.clip(np.where(label > 0, p, 1 - p), 1e-12, None)).sum()
            err = (label - p) * alpha  # gradient ascent on log-likelihood
            np.add.at(w_out, targets.reshape(-1), (err[:, :, None] * vc[:, None, :]).reshape(-1, dim))
            np.add.at(w_in, c, np.einsum("bk,bkd->bd", err, vo))
        log.debug("skipgram epoch %d loss %.4f", epoch, loss_sum / len(centers))
    return w_in.astype(np.float32)
