"""Finite-difference cases: every differentiable op plus the composed model."""

from __future__ import annotations

import numpy as np

from mmcr import autodiff as ad
from mmcr.autodiff import DropoutMask, ParameterStore, Tensor, gradcheck
from mmcr.classifier import ClassWeights, ReviewModel, fuse, predict, weighted_ce_loss
from mmcr.contrastive import info_nce_loss
from mmcr.encoders import CodeEncoder, CodeEncoderConfig, TextEncoder, TextEncoderConfig, build_vocab
from mmcr.java import method_graph

POINTS = 20
TOLERANCE = 1e-4


def _pos(rng, shape):
    return rng.uniform(0.5, 2.0, size=shape)


def _away_from_zero(rng, shape):
    x = rng.uniform(0.1, 1.0, size=shape)
    return x * rng.choice([-1.0, 1.0], size=shape)


def _gru_case(reverse):
    mask = np.array([[1, 1, 1], [1, 1, 0]], dtype=np.float64)

    def fn(x, W, U, b):
        return ad.gru(x, mask, W, U, b, reverse=reverse)

    return fn, lambda r: [r.normal(size=(2, 3, 2)), r.normal(size=(2, 9)) * 0.5, r.normal(size=(3, 9)) * 0.5,
                          r.normal(size=9) * 0.1]


def _dropout_case():
    mask = DropoutMask.draw((3, 4), 0.3, seed=7)
    return (lambda x: ad.dropout(x, 0.3, mask)), lambda r: [r.normal(size=(3, 4))]


IDX = np.array([2, 0, 2, 1])
IDS = np.array([[0, 3], [3, 1]])

OP_CASES = {
    "add": (lambda a, b: a + b, lambda r: [r.normal(size=(3, 4)), r.normal(size=(4,))]),
    "sub": (lambda a, b: a - b, lambda r: [r.normal(size=(3, 1)), r.normal(size=(3, 4))]),
    "mul": (lambda a, b: a * b, lambda r: [r.normal(size=(2, 3)), r.normal(size=(2, 3))]),
    "div": (lambda a, b: a / b, lambda r: [r.normal(size=(2, 3)), _pos(r, (2, 3))]),
    "neg": (lambda a: -a, lambda r: [r.normal(size=(5,))]),
    "matmul": (lambda a, b: a @ b, lambda r: [r.normal(size=(3, 4)), r.normal(size=(4, 2))]),
    "matmul_batched": (lambda a, b: a @ b, lambda r: [r.normal(size=(2, 3, 4)), r.normal(size=(4, 2))]),
    "matmul_vector": (lambda a, b: a @ b, lambda r: [r.normal(size=(4,)), r.normal(size=(4, 3))]),
    "transpose": (lambda a: ad.transpose(a, (1, 0)) * 2.0, lambda r: [r.normal(size=(3, 4))]),
    "reshape": (lambda a: ad.reshape(a, (6, 2)) * 3.0, lambda r: [r.normal(size=(3, 4))]),
    "concat": (lambda a, b: ad.concat([a, b], axis=1), lambda r: [r.normal(size=(2, 3)), r.normal(size=(2, 2))]),
    "index_select": (lambda a: ad.index_select(a, IDX), lambda r: [r.normal(size=(3, 2))]),
    "slice": (lambda a: a[1:, :2], lambda r: [r.normal(size=(3, 4))]),
    "embedding": (lambda t: ad.embedding(t, IDS), lambda r: [r.normal(size=(4, 3))]),
    "sum": (lambda a: ad.sum_(a, axis=0), lambda r: [r.normal(size=(3, 4))]),
    "mean": (lambda a: ad.mean(a, axis=1, keepdims=True), lambda r: [r.normal(size=(3, 4))]),
    "relu": (ad.relu, lambda r: [_away_from_zero(r, (3, 4))]),
    "tanh": (ad.tanh, lambda r: [r.normal(size=(3, 4))]),
    "sigmoid": (ad.sigmoid, lambda r: [r.normal(size=(3, 4)) * 3]),
    "exp": (ad.exp, lambda r: [r.normal(size=(3, 4))]),
    "log": (ad.log, lambda r: [_pos(r, (3, 4))]),
    "sqrt": (ad.sqrt, lambda r: [_pos(r, (3, 4))]),
    "clip": (lambda a: ad.clip(a, -0.5, 0.5), lambda r: [r.choice([-1, 1], size=(3, 4)) * r.uniform(0.05, 0.4, (3, 4))
                                                          + r.choice([0, 1.2], size=(3, 4))]),
    "softmax": (lambda a: ad.softmax(a, axis=1), lambda r: [r.normal(size=(3, 4))]),
    "log_softmax": (lambda a: ad.log_softmax(a, axis=0), lambda r: [r.normal(size=(3, 4))]),
    "l2_normalize": (lambda a: ad.l2_normalize(a, axis=1), lambda r: [r.normal(size=(3, 4))]),
    "cosine_sim": (ad.cosine_sim, lambda r: [r.normal(size=(5,)), r.normal(size=(5,))]),
    "gru": _gru_case(False),
    "gru_reverse": _gru_case(True),
    "dropout": _dropout_case(),
    "info_nce_loss": (lambda h, hp: info_nce_loss(h, hp, 0.5), lambda r: [r.normal(size=(4, 3)), r.normal(size=(4, 3))]),
    "fuse": (fuse, lambda r: [r.normal(size=(3,)), r.normal(size=(3,)), r.normal(size=(2,))]),
    "predict": (predict, lambda r: [r.normal(size=(2, 5)), r.normal(size=(2, 5)), r.normal(size=(2,))]),
    "weighted_ce_loss": (
        lambda p: weighted_ce_loss(p, [1, 0, 1], ClassWeights(1.7, 0.6)),
        lambda r: [r.uniform(0.05, 0.95, size=3)],
    ),
    "l2_penalty": (
        lambda a, b: ad.l2_penalty(ParameterStore({"a": a, "b": b}), 0.3),
        lambda r: [r.normal(size=(2, 3)), r.normal(size=(4,))],
    ),
}


def op_errors(name: str, points: int = POINTS, seed: int = 0) -> list[float]:
    fn, gen = OP_CASES[name]
    rng = np.random.default_rng([seed, len(name)])
    return [gradcheck(fn, gen(rng), seed=k) for k in range(points)]


# -- composed model at tiny widths --------------------------------------------------

_SOURCES = [
    ("int f(int a){ return a + 1; }", "int f(int a){ a = a * 2; return a + 1; }", "fix the bound", 1),
    ("int g(int b){ if (b > 2) { b = b - 1; } return b; }", "int g(int b){ return b; }", "tidy", 0),
]


class TinyPipeline:
    """Code encoder (out 4) + text encoder (out 4) + head, built from flat parameter arrays."""

    def __init__(self):
        graphs = [method_graph(s) for o, r, _, _ in _SOURCES for s in (o, r)]
        self.code_vocab = build_vocab([g.nodes for g in graphs])
        self.text_vocab = build_vocab([c.split() for _, _, c, _ in _SOURCES])
        self.code_cfg = CodeEncoderConfig(embed_dim=3, hidden_dim=2, gcn_layers=2, dropout_p=0.2, init_bound=0.8)
        self.text_cfg = TextEncoderConfig(embed_dim=3, hidden_dim=2, dropout_p=0.2, init_bound=0.8)
        code = CodeEncoder(self.code_vocab, self.code_cfg, seed=1)
        text = TextEncoder(self.text_vocab, self.text_cfg, seed=2)
        model = ReviewModel(code, text, seed=3, init_bound=0.8)
        self.names = model.params.names()
        from mmcr.classifier import prepare
        from mmcr.data import ReviewSample

        self.items = prepare([ReviewSample(f"s{i}", "r", o, r, c, y) for i, (o, r, c, y) in enumerate(_SOURCES)])
        self.shapes = [model.params[n].shape for n in self.names]

    def build(self, tensors) -> ReviewModel:
        store = ParameterStore(dict(zip(self.names, tensors)))
        code = CodeEncoder(self.code_vocab, self.code_cfg, params=store.subset("code."))
        text = TextEncoder(self.text_vocab, self.text_cfg, params=store.subset("text."))
        return ReviewModel(code, text, head=store.subset("head."))

    def loss(self, *tensors) -> Tensor:
        model = self.build(tensors)
        logits = model.forward(self.items, code_seed=11, text_seed=12)
        probs = ad.softmax(logits, axis=1)
        return weighted_ce_loss(probs[:, 1], [p.label for p in self.items], ClassWeights(1.5, 0.7), 1e-3,
                                model.params)

    def contrastive_loss(self, *tensors) -> Tensor:
        model = self.build(tensors)
        graphs = [p.original for p in self.items] + [p.revised for p in self.items]
        return info_nce_loss(model.code.encode_batch(graphs, mask_seed=5), model.code.encode_batch(graphs, mask_seed=6),
                             0.5)

    def random_point(self, rng) -> list[np.ndarray]:
        return [rng.uniform(-0.8, 0.8, size=s) for s in self.shapes]


def pipeline_errors(points: int = POINTS, seed: int = 0, contrastive: bool = False) -> list[float]:
    tiny = TinyPipeline()
    rng = np.random.default_rng([seed, 99])
    fn = tiny.contrastive_loss if contrastive else tiny.loss
    return [gradcheck(fn, tiny.random_point(rng), seed=k) for k in range(points)]
