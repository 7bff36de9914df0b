"""Small Bi-GRU comment encoder, pretrained with the same contrastive loop as code."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from ..autodiff import DropoutMask, ParameterStore, Tensor, dropout, embedding, uniform_init
from .code import add_bigru_params, run_bigru
from .vocab import Vocab, text_tokens


@dataclass
class TextEncoderConfig:
    vocab_size: int = 0
    embed_dim: int = 32
    hidden_dim: int = 32
    dropout_p: float = 0.1
    max_len: int = 64
    init_bound: float = 0.1

    def __post_init__(self):
        for name in ("embed_dim", "hidden_dim", "max_len"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0 <= self.dropout_p < 1:
            raise ValueError("dropout_p must be in [0, 1)")

    @property
    def out_dim(self) -> int:
        return 2 * self.hidden_dim

    def to_dict(self) -> dict:
        return asdict(self)


class TextEncoder:
    """Embed -> Bi-GRU -> mean over real positions -> dropout (training only)."""

    def __init__(
        self,
        vocab: Vocab,
        config: TextEncoderConfig | None = None,
        seed: int = 0,
        prefix: str = "text",
        params: ParameterStore | None = None,
    ):
        self.vocab = vocab
        self.config = config or TextEncoderConfig()
        self.config.vocab_size = len(vocab)
        self.prefix = prefix
        cfg = self.config
        if params is None:
            params = ParameterStore(rng_seed=seed)
            params.add(
                f"{prefix}.embed", uniform_init((len(vocab), cfg.embed_dim), cfg.init_bound, seed, f"{prefix}.embed")
            )
            add_bigru_params(params, prefix, cfg.embed_dim, cfg.hidden_dim, cfg.init_bound, seed)
        self.params = params
        table = params[f"{prefix}.embed"]
        if table.shape != (len(vocab), cfg.embed_dim):
            raise ValueError(f"{prefix}.embed: shape {table.shape} does not match vocab/config")
        if params[f"{prefix}.gru_fwd.U"].shape != (cfg.hidden_dim, 3 * cfg.hidden_dim):
            raise ValueError(f"{prefix}.gru_fwd.U: shape does not match hidden_dim {cfg.hidden_dim}")

    @property
    def out_dim(self) -> int:
        return self.config.out_dim

    def prepare(self, texts: Sequence[Sequence[str] | str]) -> tuple[np.ndarray, np.ndarray]:
        seqs = []
        for t in texts:
            toks = text_tokens(t) if isinstance(t, str) else list(t)
            seqs.append(self.vocab.encode(toks[: self.config.max_len]))
        B = len(seqs)
        T = max(1, max(len(s) for s in seqs))
        ids = np.full((B, T), self.vocab.pad_index, dtype=np.int64)
        mask = np.zeros((B, T), dtype=np.float32)
        for b, s in enumerate(seqs):
            if s:
                ids[b, : len(s)] = s
                mask[b, : len(s)] = 1
            else:
                mask[b, 0] = 1  # empty comment encodes a single pad token
        return ids, mask

    def encode_batch(self, texts: Sequence[Sequence[str] | str], mask_seed: int | None = None) -> Tensor:
        if not texts:
            raise ValueError("encode_batch: no texts")
        cfg, p, store = self.config, self.prefix, self.params
        ids, mask = self.prepare(texts)
        H = run_bigru(store, p, embedding(store[f"{p}.embed"], ids), mask)
        counts = mask.sum(axis=1, keepdims=True)
        pooled = (H * mask[:, :, None]).sum(axis=1) / counts
        if mask_seed is not None and cfg.dropout_p > 0:
            pooled = dropout(pooled, cfg.dropout_p, DropoutMask.draw(pooled.shape, cfg.dropout_p, mask_seed, 0))
        return pooled

    def encode(self, text: Sequence[str] | str, mask_seed: int | None = None) -> Tensor:
        return self.encode_batch([text], mask_seed).reshape(self.out_dim)

    __call__ = encode_batch


def encode_text(encoder: TextEncoder, tokens: Sequence[str] | str, mask_seed: int | None = None) -> Tensor:
    return encoder.encode(tokens, mask_seed)
