"""Graph code encoder: embedding -> Bi-GRU -> GCN stack -> retrieval attention."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from ..autodiff import (
    DropoutMask,
    ParameterStore,
    Tensor,
    concat,
    dropout,
    embedding,
    gru,
    relu,
    softmax,
    uniform_init,
)
from ..java.tree import CodeGraph
from .vocab import Vocab

MASKED_SCORE = -1e9


@dataclass
class CodeEncoderConfig:
    embed_dim: int = 64
    hidden_dim: int = 64
    gcn_layers: int = 4
    dropout_p: float = 0.1
    init_bound: float = 0.1

    def __post_init__(self):
        for name in ("embed_dim", "hidden_dim", "gcn_layers"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0 <= self.dropout_p < 1:
            raise ValueError("dropout_p must be in [0, 1)")
        if self.init_bound <= 0:
            raise ValueError("init_bound must be positive")

    @property
    def out_dim(self) -> int:
        return 2 * self.hidden_dim

    def to_dict(self) -> dict:
        return asdict(self)


def add_bigru_params(store: ParameterStore, prefix: str, in_dim: int, hidden: int, bound: float, seed: int):
    for direction in ("gru_fwd", "gru_bwd"):
        for name, shape in (("W", (in_dim, 3 * hidden)), ("U", (hidden, 3 * hidden)), ("b", (3 * hidden,))):
            full = f"{prefix}.{direction}.{name}"
            store.add(full, uniform_init(shape, bound, seed, full))


def run_bigru(store: ParameterStore, prefix: str, x: Tensor, mask: np.ndarray) -> Tensor:
    fwd = gru(x, mask, store[f"{prefix}.gru_fwd.W"], store[f"{prefix}.gru_fwd.U"], store[f"{prefix}.gru_fwd.b"])
    bwd = gru(
        x, mask, store[f"{prefix}.gru_bwd.W"], store[f"{prefix}.gru_bwd.U"], store[f"{prefix}.gru_bwd.b"],
        reverse=True,
    )
    return concat([fwd, bwd], axis=2)


def gcn_layer(h: Tensor, adj: Tensor, W: Tensor, b: Tensor) -> Tensor:
    """ReLU(A_norm (h W) + b); ``adj`` is already row-normalized."""
    return relu(adj @ (h @ W) + b)


class CodeEncoder:
    """Maps a CodeGraph to a fixed vector of width 2 * hidden_dim.

    Passing ``mask_seed`` switches on training-mode dropout after every GCN
    layer, with masks derived from (mask_seed, layer index).
    """

    def __init__(
        self,
        vocab: Vocab,
        config: CodeEncoderConfig | None = None,
        seed: int = 0,
        prefix: str = "code",
        params: ParameterStore | None = None,
    ):
        self.vocab = vocab
        self.config = config or CodeEncoderConfig()
        self.prefix = prefix
        cfg = self.config
        if params is None:
            params = ParameterStore(rng_seed=seed)
            bound = cfg.init_bound
            params.add(f"{prefix}.embed", uniform_init((len(vocab), cfg.embed_dim), bound, seed, f"{prefix}.embed"))
            add_bigru_params(params, prefix, cfg.embed_dim, cfg.hidden_dim, bound, seed)
            width = cfg.out_dim
            for layer in range(cfg.gcn_layers):
                for name, shape in (("W", (width, width)), ("b", (width,))):
                    full = f"{prefix}.gcn{layer}.{name}"
                    params.add(full, uniform_init(shape, bound, seed, full))
        self.params = params
        self._check_shapes()

    def _check_shapes(self) -> None:
        cfg, p = self.config, self.prefix
        expected = {
            f"{p}.embed": (len(self.vocab), cfg.embed_dim),
            f"{p}.gru_fwd.U": (cfg.hidden_dim, 3 * cfg.hidden_dim),
            f"{p}.gcn{cfg.gcn_layers - 1}.W": (cfg.out_dim, cfg.out_dim),
        }
        for name, shape in expected.items():
            if name not in self.params:
                raise ValueError(f"code encoder parameter {name} missing")
            if self.params[name].shape != shape:
                raise ValueError(f"{name}: shape {self.params[name].shape} does not match config {shape}")

    @property
    def out_dim(self) -> int:
        return self.config.out_dim

    def set_embeddings(self, matrix: np.ndarray) -> None:
        table = self.params[f"{self.prefix}.embed"]
        if matrix.shape != table.shape:
            raise ValueError(f"embedding matrix {matrix.shape} != {table.shape}")
        table.data = np.asarray(matrix, dtype=table.dtype).copy()

    def prepare(self, graphs: Sequence[CodeGraph]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        B = len(graphs)
        T = max(len(g) for g in graphs)
        ids = np.full((B, T), self.vocab.pad_index, dtype=np.int64)
        mask = np.zeros((B, T), dtype=np.float32)
        adj = np.zeros((B, T, T), dtype=np.float32)
        for b, g in enumerate(graphs):
            n = len(g)
            ids[b, :n] = self.vocab.encode(g.nodes)
            mask[b, :n] = 1
            adj[b, :n, :n] = g.row_normalized
        return ids, mask, adj

    def encode_batch(self, graphs: Sequence[CodeGraph], mask_seed: int | None = None, return_attention: bool = False):
        if not graphs:
            raise ValueError("encode_batch: no graphs")
        cfg, p, store = self.config, self.prefix, self.params
        ids, mask, adj = self.prepare(graphs)
        B, T = ids.shape

        H = run_bigru(store, p, embedding(store[f"{p}.embed"], ids), mask)
        h = H
        A = Tensor(adj)
        for layer in range(cfg.gcn_layers):
            h = gcn_layer(h, A, store[f"{p}.gcn{layer}.W"], store[f"{p}.gcn{layer}.b"])
            if mask_seed is not None and cfg.dropout_p > 0:
                h = dropout(h, cfg.dropout_p, DropoutMask.draw(h.shape, cfg.dropout_p, mask_seed, layer))

        # Retrieval attention: score each sequence state against the pooled graph state.
        mask3 = mask[:, :, None]
        graph_sum = (h * mask3).sum(axis=1, keepdims=True)  # (B, 1, D)
        scores = (H * graph_sum).sum(axis=2) + (1 - mask) * MASKED_SCORE
        alpha = softmax(scores, axis=1)
        out = (H * alpha.reshape(B, T, 1)).sum(axis=1)
        if return_attention:
            return out, alpha
        return out

    def encode(self, graph: CodeGraph, mask_seed: int | None = None) -> Tensor:
        return self.encode_batch([graph], mask_seed).reshape(self.out_dim)

    __call__ = encode_batch


def encode_code(encoder: CodeEncoder, graph: CodeGraph, mask_seed: int | None = None) -> Tensor:
    return encoder.encode(graph, mask_seed)
