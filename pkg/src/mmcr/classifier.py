"""Fusion head, weighted cross-entropy fine-tuning and evaluation.

Class order everywhere is (reject, accept): column 0 of the logits and
probabilities is "reject", column 1 is "accept".

Loss weighting: ``w_reject`` multiplies the loss of rejected samples and
``w_accept`` the loss of accepted samples, so balanced weights up-weight
the minority class.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .autodiff import (
    AdamState,
    ParameterStore,
    Tensor,
    adam_step,
    clip,
    concat,
    l2_penalty,
    log,
    rng_for,
    softmax,
    uniform_init,
)
from .data import CorpusStats, ReviewSample, batches
from .encoders import CodeEncoder, TextEncoder, text_tokens
from .java.tree import CodeGraph
from .metrics import ConfusionMatrix, confusion, f1, mcc, precision, recall

log_ = logging.getLogger(__name__)

REJECT, ACCEPT = 0, 1
PROB_FLOOR = 1e-7
WEIGHT_MODES = ("none", "balanced", "explicit")


def fuse(c_orig: Tensor, c_rev: Tensor, t_comment: Tensor) -> Tensor:
    """concat(c_orig - c_rev, t_comment) along the last axis; accepts single vectors or batches."""
    if c_orig.shape != c_rev.shape:
        raise ValueError(f"code vectors differ in shape: {c_orig.shape} vs {c_rev.shape}")
    if c_orig.shape[:-1] != t_comment.shape[:-1]:
        raise ValueError(f"code batch {c_orig.shape} does not match comment batch {t_comment.shape}")
    return concat([c_orig - c_rev, t_comment], axis=-1)


def head_logits(r: Tensor, W: Tensor, b: Tensor) -> Tensor:
    if W.ndim != 2 or W.shape[0] != 2 or W.shape[1] != r.shape[-1] or b.shape != (2,):
        raise ValueError(f"head shapes W{W.shape} b{b.shape} do not fit input width {r.shape[-1]}")
    return r @ W.T + b


def predict(r: Tensor, W: Tensor, b: Tensor) -> Tensor:
    """softmax(W r + b) with class order (reject, accept)."""
    return softmax(head_logits(r, W, b), axis=-1)


def decide(logits: np.ndarray) -> np.ndarray:
    """Accept only when its logit is strictly larger; ties go to reject."""
    logits = np.asarray(logits)
    return (logits[..., ACCEPT] > logits[..., REJECT]).astype(np.int64)


@dataclass(frozen=True)
class ClassWeights:
    w_reject: float = 1.0
    w_accept: float = 1.0

    def __post_init__(self):
        if not (self.w_reject > 0 and self.w_accept > 0):
            raise ValueError(f"class weights must be positive, got {self.w_reject}, {self.w_accept}")


def balanced_weights(stats: CorpusStats) -> ClassWeights:
    """w_c = S / (2 * S_c)."""
    if stats.rejected_count == 0 or stats.accepted_count == 0:
        raise ValueError("balanced weights need both classes present")
    s = stats.sample_count
    return ClassWeights(w_reject=s / (2 * stats.rejected_count), w_accept=s / (2 * stats.accepted_count))


def parse_class_weight(text: str) -> tuple[str, ClassWeights | None]:
    """'none' | 'balanced' | 'w_reject,w_accept'."""
    text = text.strip().lower()
    if text in ("none", "balanced"):
        return text, None
    try:
        wr, wa = (float(x) for x in text.split(","))
    except ValueError:
        raise ValueError(f"class weight must be none, balanced or 'w_reject,w_accept'; got {text!r}") from None
    return "explicit", ClassWeights(wr, wa)


def weighted_ce_loss(
    p_accept: Tensor,
    labels: Sequence[int] | np.ndarray,
    weights: ClassWeights = ClassWeights(),
    lam: float = 0.0,
    store: ParameterStore | None = None,
) -> Tensor:
    """-sum_i [w_accept*y_i*log p_i + w_reject*(1-y_i)*log(1-p_i)] + lam*||theta||^2.

    ``p_accept`` holds the predicted accept probabilities, clamped to
    [1e-7, 1 - 1e-7] before the logarithm.
    """
    y = np.asarray(labels, dtype=p_accept.dtype).reshape(p_accept.shape)
    p = clip(p_accept, PROB_FLOOR, 1 - PROB_FLOOR)
    coef_acc = (weights.w_accept * y).astype(p_accept.dtype)
    coef_rej = (weights.w_reject * (1 - y)).astype(p_accept.dtype)
    data = -((log(p) * coef_acc).sum() + (log(1 - p) * coef_rej).sum())
    if lam and store is not None:
        return data + l2_penalty(store, lam)
    return data


def _data_loss_np(p_accept: np.ndarray, labels: np.ndarray, weights: ClassWeights) -> float:
    p = np.clip(p_accept.astype(np.float64), PROB_FLOOR, 1 - PROB_FLOOR)
    y = labels.astype(np.float64)
    return float(-(weights.w_accept * y * np.log(p) + weights.w_reject * (1 - y) * np.log(1 - p)).sum())


@dataclass
class Prepared:
    original: CodeGraph
    revised: CodeGraph
    comment: list[str]
    label: int
    repo: str


def prepare(samples: Sequence[ReviewSample]) -> list[Prepared]:
    out = []
    for s in samples:
        g_o, g_r = s.graphs()
        out.append(Prepared(g_o, g_r, text_tokens(s.comment), s.label, s.repo))
    return out


class ReviewModel:
    """Code encoder + text encoder + linear softmax head over the fused vector."""

    def __init__(
        self,
        code_encoder: CodeEncoder,
        text_encoder: TextEncoder,
        seed: int = 0,
        use_text: bool = True,
        head: ParameterStore | None = None,
        init_bound: float = 0.1,
    ):
        self.code = code_encoder
        self.text = text_encoder
        self.use_text = use_text
        width = code_encoder.out_dim + text_encoder.out_dim
        if head is None:
            head = ParameterStore(rng_seed=seed)
            head.add("head.W", uniform_init((2, width), init_bound, seed, "head.W"))
            head.add("head.b", Tensor(np.zeros(2, dtype=np.float32)))
        if head["head.W"].shape != (2, width):
            raise ValueError(f"head.W shape {head['head.W'].shape} does not match fused width {width}")
        self.head = head
        self.params = code_encoder.params.merged(text_encoder.params, head)

    def trainable(self, freeze_encoders: bool = False) -> ParameterStore:
        if freeze_encoders:
            return self.head
        if self.use_text:
            return self.params
        return self.code.params.merged(self.head)

    def forward(self, batch: Sequence[Prepared], code_seed: int | None = None, text_seed: int | None = None) -> Tensor:
        """Logits (B, 2). Seeds switch on training-mode dropout."""
        n = len(batch)
        codes = self.code.encode_batch([p.original for p in batch] + [p.revised for p in batch], mask_seed=code_seed)
        if self.use_text:
            t = self.text.encode_batch([p.comment for p in batch], mask_seed=text_seed)
        else:
            t = Tensor(np.zeros((n, self.text.out_dim), dtype=np.float32))
        r = fuse(codes[:n], codes[n:], t)
        return head_logits(r, self.head["head.W"], self.head["head.b"])

    def logits(self, items: Sequence[Prepared], batch_size: int = 64) -> np.ndarray:
        """Inference-mode logits for every item, in order."""
        chunks = [self.forward(items[i : i + batch_size]).data for i in range(0, len(items), batch_size)]
        return np.concatenate(chunks, axis=0) if chunks else np.zeros((0, 2), dtype=np.float32)

    def predict_labels(self, items: Sequence[Prepared]) -> np.ndarray:
        return decide(self.logits(items))


@dataclass
class TrainConfig:
    lam: float = 1e-5
    lr: float = 1e-3
    batch_size: int = 64
    epochs: int = 20
    seed: int = 0
    class_weight_mode: str = "balanced"
    explicit_weights: ClassWeights | None = None
    freeze_encoders: bool = False

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")
        if self.lr < 0:
            raise ValueError("lr must be non-negative")
        if self.batch_size < 1 or self.epochs < 0:
            raise ValueError("batch_size must be >= 1 and epochs >= 0")
        if self.class_weight_mode not in WEIGHT_MODES:
            raise ValueError(f"class_weight_mode must be one of {WEIGHT_MODES}")
        if (self.class_weight_mode == "explicit") != (self.explicit_weights is not None):
            raise ValueError("explicit weights are given exactly when class_weight_mode is 'explicit'")

    def weights_for(self, samples: Sequence) -> ClassWeights:
        if self.class_weight_mode == "none":
            return ClassWeights()
        if self.class_weight_mode == "explicit":
            return self.explicit_weights
        labels = [s.label for s in samples]
        return balanced_weights(CorpusStats(len(labels), labels.count(0)))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["explicit_weights"] = None if self.explicit_weights is None else [
            self.explicit_weights.w_reject, self.explicit_weights.w_accept]
        return d


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_f1: float
    val_mcc: float


@dataclass
class TrainResult:
    params: ParameterStore
    history: list[EpochRecord] = field(default_factory=list)
    weights: ClassWeights = ClassWeights()


def dataset_loss(model: ReviewModel, items: Sequence[Prepared], weights: ClassWeights, lam: float,
                 store: ParameterStore) -> float:
    """Per-sample weighted data loss in inference mode plus the L2 term."""
    logits = model.logits(items)
    shifted = logits - logits.max(axis=1, keepdims=True)
    probs = np.exp(shifted) / np.exp(shifted).sum(axis=1, keepdims=True)
    labels = np.array([p.label for p in items])
    data = _data_loss_np(probs[:, ACCEPT], labels, weights) / len(items)
    penalty = lam * sum(float(np.sum(t.data.astype(np.float64) ** 2)) for _, t in store.items())
    return data + penalty


def train(
    model: ReviewModel,
    train_items: Sequence[Prepared],
    val_items: Sequence[Prepared] | None,
    config: TrainConfig,
) -> TrainResult:
    """Fine-tune with Adam on the weighted loss.

    ``train_loss`` in the history is the full training-set objective
    re-evaluated without dropout after each epoch, so it reflects the
    parameters alone.
    """
    if not train_items:
        raise ValueError("train: empty training set")
    weights = config.weights_for(train_items)
    store = model.trainable(config.freeze_encoders)
    state = AdamState(lr=config.lr)
    rng = rng_for(config.seed, "finetune")
    history = []
    for epoch in range(config.epochs):
        for batch in batches(train_items, config.batch_size, seed=config.seed * 1_000_003 + epoch):
            code_seed, text_seed = (int(x) for x in rng.integers(1 << 62, size=2))
            logits = model.forward(batch.samples, code_seed=code_seed, text_seed=text_seed)
            probs = softmax(logits, axis=1)
            loss = weighted_ce_loss(probs[:, ACCEPT], [p.label for p in batch.samples], weights, config.lam, store)
            loss.backward()
            adam_step(store, state)
            model.params.zero_grad()
        train_loss = dataset_loss(model, train_items, weights, config.lam, store)
        if val_items:
            ev = evaluate(model, val_items)
            vf1, vmcc = ev.f1, ev.mcc
        else:
            vf1 = vmcc = float("nan")
        history.append(EpochRecord(epoch, train_loss, vf1, vmcc))
        log_.info("epoch %d train_loss %.5f val_f1 %.4f val_mcc %.4f", epoch, train_loss, vf1, vmcc)
    return TrainResult(model.params, history, weights)


@dataclass
class Evaluation:
    cm: ConfusionMatrix
    predictions: np.ndarray

    @property
    def precision(self) -> float:
        return precision(self.cm)

    @property
    def recall(self) -> float:
        return recall(self.cm)

    @property
    def f1(self) -> float:
        return f1(self.cm)

    @property
    def mcc(self) -> float:
        return mcc(self.cm)


def evaluate(model: ReviewModel, items: Sequence[Prepared], positive: int = ACCEPT) -> Evaluation:
    if not items:
        raise ValueError("evaluate: empty corpus")
    preds = model.predict_labels(items)
    cm = confusion(preds.tolist(), [p.label for p in items], positive=positive)
    return Evaluation(cm, preds)
