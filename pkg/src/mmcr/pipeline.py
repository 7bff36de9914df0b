"""End-to-end workflows shared by the CLI and the experiment tests."""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .autodiff import atomic_write_bytes, load_checkpoint, save_checkpoint
from .classifier import Evaluation, Prepared, ReviewModel, TrainConfig, TrainResult, evaluate, prepare, train
from .contrastive import ContrastiveConfig, pretrain_encoder
from .data import ReviewSample, SplitSpec, split
from .encoders import (
    CodeEncoder,
    CodeEncoderConfig,
    TextEncoder,
    TextEncoderConfig,
    Vocab,
    build_vocab,
    skipgram_pretrain,
    text_tokens,
)
from .java.tree import CodeGraph

log = logging.getLogger(__name__)

SIDES = ("both", "original", "revised")


def code_fragments(samples: Sequence[ReviewSample], sides: str = "both") -> list[CodeGraph]:
    """Code graphs used as independent pretraining inputs."""
    if sides not in SIDES:
        raise ValueError(f"sides must be one of {SIDES}")
    out = []
    for s in samples:
        if sides in ("both", "original"):
            out.append(s.graph("original"))
        if sides in ("both", "revised"):
            out.append(s.graph("revised"))
    return out


@dataclass
class CodePretrainOptions:
    encoder: CodeEncoderConfig = field(default_factory=CodeEncoderConfig)
    contrastive: ContrastiveConfig = field(default_factory=ContrastiveConfig)
    sides: str = "both"
    skipgram_epochs: int = 5
    min_count: int = 1


def pretrain_code(samples: Sequence[ReviewSample], options: CodePretrainOptions | None = None):
    """Skip-gram symbol embeddings, then contrastive pretraining. Returns (encoder, loss history)."""
    opts = options or CodePretrainOptions()
    graphs = code_fragments(samples, opts.sides)
    vocab = build_vocab([g.nodes for g in graphs], opts.min_count)
    seed = opts.contrastive.seed
    encoder = CodeEncoder(vocab, opts.encoder, seed=seed)
    if opts.skipgram_epochs > 0:
        table = skipgram_pretrain(
            [g.nodes for g in graphs], vocab, opts.encoder.embed_dim, epochs=opts.skipgram_epochs, seed=seed
        )
        encoder.set_embeddings(table)
    result = pretrain_encoder(graphs, encoder, opts.contrastive)
    return encoder, result.loss_history


@dataclass
class TextPretrainOptions:
    encoder: TextEncoderConfig = field(default_factory=TextEncoderConfig)
    contrastive: ContrastiveConfig = field(default_factory=ContrastiveConfig)
    min_count: int = 1


def pretrain_text(samples: Sequence[ReviewSample], options: TextPretrainOptions | None = None):
    opts = options or TextPretrainOptions()
    comments = [text_tokens(s.comment) for s in samples]
    vocab = build_vocab(comments + [[]], opts.min_count) if any(comments) else Vocab([])
    encoder = TextEncoder(vocab, opts.encoder, seed=opts.contrastive.seed)
    result = pretrain_encoder(comments, encoder, opts.contrastive)
    return encoder, result.loss_history


# -- checkpoint sidecars --------------------------------------------------------


def _sidecar(path, suffix: str) -> Path:
    return Path(str(path) + suffix)


def save_encoder(encoder, path, kind: str) -> None:
    save_checkpoint(encoder.params, path)
    encoder.vocab.save(_sidecar(path, ".vocab"))
    meta = {"kind": kind, "config": encoder.config.to_dict()}
    atomic_write_bytes(_sidecar(path, ".json"), (json.dumps(meta, sort_keys=True, indent=1) + "\n").encode())


def _read_meta(path) -> dict:
    meta_path = _sidecar(path, ".json")
    if not meta_path.exists():
        raise FileNotFoundError(f"missing config sidecar {meta_path}")
    return json.loads(meta_path.read_text())


def load_code_encoder(path, partial: bool = False) -> CodeEncoder:
    meta = _read_meta(path)
    if meta.get("kind") not in ("code", "model"):
        raise ValueError(f"{path} is not a code-encoder checkpoint")
    cfg = CodeEncoderConfig(**(meta["config"] if meta["kind"] == "code" else meta["code"]))
    vocab = Vocab.load(_sidecar(path, ".vocab" if meta["kind"] == "code" else ".code.vocab"))
    encoder = CodeEncoder(vocab, cfg, seed=0)
    load_checkpoint(path, encoder.params, partial=partial or meta["kind"] == "model")
    return encoder


def load_text_encoder(path) -> TextEncoder:
    meta = _read_meta(path)
    if meta.get("kind") != "text":
        raise ValueError(f"{path} is not a text-encoder checkpoint")
    encoder = TextEncoder(Vocab.load(_sidecar(path, ".vocab")), TextEncoderConfig(**meta["config"]), seed=0)
    load_checkpoint(path, encoder.params)
    return encoder


def save_model(model: ReviewModel, path, train_config: TrainConfig | None = None) -> None:
    save_checkpoint(model.params, path)
    model.code.vocab.save(_sidecar(path, ".code.vocab"))
    model.text.vocab.save(_sidecar(path, ".text.vocab"))
    meta = {
        "kind": "model",
        "code": model.code.config.to_dict(),
        "text": model.text.config.to_dict(),
        "use_text": model.use_text,
        "train": train_config.to_dict() if train_config else None,
    }
    atomic_write_bytes(_sidecar(path, ".json"), (json.dumps(meta, sort_keys=True, indent=1) + "\n").encode())


def load_model(path) -> ReviewModel:
    meta = _read_meta(path)
    if meta.get("kind") != "model":
        raise ValueError(f"{path} is not a model checkpoint")
    code = CodeEncoder(Vocab.load(_sidecar(path, ".code.vocab")), CodeEncoderConfig(**meta["code"]))
    text = TextEncoder(Vocab.load(_sidecar(path, ".text.vocab")), TextEncoderConfig(**meta["text"]))
    model = ReviewModel(code, text, use_text=meta.get("use_text", True))
    load_checkpoint(path, model.params)
    return model


# -- experiment protocols -------------------------------------------------------


@dataclass
class RunOutcome:
    label: str
    evaluation: Evaluation
    result: TrainResult


def finetune_and_evaluate(
    code: CodeEncoder,
    text: TextEncoder,
    train_items: Sequence[Prepared],
    test_items: Sequence[Prepared],
    config: TrainConfig,
    use_text: bool = True,
    label: str = "",
) -> RunOutcome:
    model = ReviewModel(code, text, seed=config.seed, use_text=use_text)
    result = train(model, train_items, test_items, config)
    return RunOutcome(label, evaluate(model, test_items), result)


@dataclass
class TransferOptions:
    code: CodePretrainOptions = field(default_factory=CodePretrainOptions)
    text: TextPretrainOptions = field(default_factory=TextPretrainOptions)
    train: TrainConfig = field(default_factory=TrainConfig)
    split: SplitSpec = field(default_factory=SplitSpec)


def transfer_eval(
    source: Sequence[ReviewSample], target: Sequence[ReviewSample], options: TransferOptions | None = None
) -> tuple[RunOutcome, RunOutcome]:
    """Fine-tune on the target with a code encoder pretrained on the source, and with one
    pretrained on the target itself. Returns (transferred, self-pretrained)."""
    opts = options or TransferOptions()
    train_s, test_s = split(target, opts.split)
    train_items, test_items = prepare(train_s), prepare(test_s)
    text, _ = pretrain_text(train_s, opts.text)
    text_state = text.params.state()

    outcomes = []
    for label, corpus in (("transfer", source), ("self", train_s)):
        code, _ = pretrain_code(corpus, opts.code)
        text.params.load_state(text_state)
        outcomes.append(finetune_and_evaluate(code, text, train_items, test_items, opts.train, label=label))
    return outcomes[0], outcomes[1]


def environment_seed(default: int = 0) -> int:
    raw = os.environ.get("MMCR_SEED")
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"MMCR_SEED must be an integer, got {raw!r}") from None
