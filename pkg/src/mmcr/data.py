"""Corpus records, loading/serialization, method-pair extraction, splits and batches."""

from __future__ import annotations

import json
import os
from collections import Counter
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .autodiff.checkpoint import atomic_write_bytes
from .autodiff.params import rng_for
from .java import CodeGraph, deserialize_tree, find_methods, parse_method, simplify, to_code_graph

FIELDS = ("id", "repo", "original", "revised", "comment", "label")
AST_FIELDS = ("id", "repo", "original_ast", "revised_ast", "comment", "label")


class CorpusError(ValueError):
    """Malformed corpus line."""


class ValidationError(CorpusError):
    """A record violates a sample invariant."""


@dataclass
class ReviewSample:
    id: str
    repo: str
    original: str = ""
    revised: str = ""
    comment: str = ""
    label: int = 1
    original_ast: str | None = None
    revised_ast: str | None = None

    def __post_init__(self):
        if isinstance(self.label, bool) or self.label not in (0, 1):
            raise ValidationError(f"sample {self.id!r}: label must be 0 or 1, got {self.label!r}")
        if not self.id:
            raise ValidationError("sample id must be non-empty")
        for side in ("original", "revised"):
            if not getattr(self, side) and not getattr(self, f"{side}_ast"):
                raise ValidationError(f"sample {self.id!r}: {side} code is empty")

    @property
    def accepted(self) -> bool:
        return self.label == 1

    def to_dict(self) -> dict:
        if self.original_ast is not None or self.revised_ast is not None:
            return {k: getattr(self, k) for k in AST_FIELDS}
        return {k: getattr(self, k) for k in FIELDS}

    def graphs(self) -> tuple[CodeGraph, CodeGraph]:
        return self.graph("original"), self.graph("revised")

    def graph(self, side: str) -> CodeGraph:
        tree_text = getattr(self, f"{side}_ast")
        if tree_text:
            root = deserialize_tree(tree_text)
        else:
            root = parse_method(getattr(self, side))
        return to_code_graph(simplify(root))


@dataclass
class CorpusStats:
    sample_count: int
    rejected_count: int

    def __post_init__(self):
        if self.sample_count < 0 or not 0 <= self.rejected_count <= self.sample_count:
            raise ValueError("rejected_count must be within [0, sample_count]")

    @property
    def accepted_count(self) -> int:
        return self.sample_count - self.rejected_count

    @property
    def reject_rate(self) -> float:
        return self.rejected_count / self.sample_count if self.sample_count else 0.0


def parse_record(line: str, lineno: int = 0, strict: bool = True) -> ReviewSample:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorpusError(f"line {lineno}: invalid JSON ({exc.msg})") from None
    if not isinstance(obj, dict):
        raise CorpusError(f"line {lineno}: expected an object")
    keys = AST_FIELDS if "original_ast" in obj or "revised_ast" in obj else FIELDS
    missing = [k for k in keys if k not in obj]
    if missing:
        raise CorpusError(f"line {lineno}: missing keys {missing}")
    unknown = sorted(set(obj) - set(keys))
    if unknown and strict:
        raise CorpusError(f"line {lineno}: unknown keys {unknown}")
    label = obj["label"]
    if not isinstance(label, int) or isinstance(label, bool):
        raise ValidationError(f"line {lineno}: label must be an integer, got {label!r}")
    for k in keys:
        if k != "label" and not isinstance(obj[k], str):
            raise CorpusError(f"line {lineno}: field {k!r} must be a string")
    try:
        return ReviewSample(**{k: obj[k] for k in keys})
    except ValidationError as exc:
        raise ValidationError(f"line {lineno}: {exc}") from None


def load_corpus(path: str | os.PathLike, strict: bool = True) -> list[ReviewSample]:
    """Read a JSON-lines corpus; blank lines are skipped."""
    samples: list[ReviewSample] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            sample = parse_record(line, lineno, strict)
            if sample.id in seen:
                raise ValidationError(f"line {lineno}: duplicate id {sample.id!r}")
            seen.add(sample.id)
            samples.append(sample)
    return samples


def dumps_corpus(samples: Sequence[ReviewSample]) -> str:
    return "".join(json.dumps(s.to_dict(), ensure_ascii=False) + "\n" for s in samples)


def save_corpus(samples: Sequence[ReviewSample], path: str | os.PathLike) -> None:
    atomic_write_bytes(path, dumps_corpus(samples).encode("utf-8"))


def corpus_stats(samples: Sequence[ReviewSample]) -> CorpusStats:
    if not samples:
        raise ValueError("corpus_stats: empty corpus")
    rejected = sum(1 for s in samples if s.label == 0)
    return CorpusStats(len(samples), rejected)


def stats_by_repo(samples: Sequence[ReviewSample]) -> dict[str, CorpusStats]:
    groups: dict[str, list[ReviewSample]] = {}
    for s in samples:
        groups.setdefault(s.repo, []).append(s)
    return {repo: corpus_stats(group) for repo, group in sorted(groups.items())}


def _token_texts(tokens) -> list[str]:
    return [t.text for t in tokens]


def extract_method_pairs(original_file: str, revised_file: str) -> list[tuple[str, str]]:
    """Pair methods by (name, arity, parameter types) and keep those whose tokens changed.

    Methods present on only one side are dropped, as are unchanged ones.
    Whitespace and comment edits do not count as changes.
    """
    before = {m.identity: m for m in find_methods(original_file)}
    after = {m.identity: m for m in find_methods(revised_file)}
    pairs = []
    for key, old in before.items():
        new = after.get(key)
        if new is None:
            continue
        if _token_texts(old.tokens) != _token_texts(new.tokens):
            pairs.append((old.text, new.text))
    return pairs


@dataclass
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ValueError(f"train_fraction must be in (0, 1), got {self.train_fraction}")


def split(samples: Sequence[ReviewSample], spec: SplitSpec) -> tuple[list[ReviewSample], list[ReviewSample]]:
    """Deterministic train/test partition; stratified keeps each side's reject rate."""
    rng = rng_for(spec.seed, "split")
    if spec.stratified:
        train_idx, test_idx = [], []
        for label in (0, 1):
            idx = np.array([i for i, s in enumerate(samples) if s.label == label], dtype=np.int64)
            idx = idx[rng.permutation(len(idx))]
            k = int(round(spec.train_fraction * len(idx)))
            train_idx += idx[:k].tolist()
            test_idx += idx[k:].tolist()
        train_idx.sort()
        test_idx.sort()
    else:
        order = rng.permutation(len(samples))
        k = int(round(spec.train_fraction * len(samples)))
        train_idx, test_idx = sorted(order[:k].tolist()), sorted(order[k:].tolist())
    return [samples[i] for i in train_idx], [samples[i] for i in test_idx]


@dataclass
class Batch:
    samples: list
    size: int


def batches(samples: Sequence, n: int, seed: int | None = 0) -> Iterator[Batch]:
    """Shuffle by ``seed`` (None keeps order), then yield chunks of ``n``."""
    if n < 1:
        raise ValueError("batch size must be >= 1")
    order = np.arange(len(samples)) if seed is None else rng_for(seed, "batches").permutation(len(samples))
    for start in range(0, len(order), n):
        chunk = [samples[i] for i in order[start : start + n]]
        yield Batch(chunk, len(chunk))


def count_labels(samples: Sequence[ReviewSample]) -> Counter:
    return Counter(s.label for s in samples)
