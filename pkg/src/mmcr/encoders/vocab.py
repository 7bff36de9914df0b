from __future__ import annotations

import os
import re
from collections import Counter
from pathlib import Path
from typing import Iterable

PAD = "<pad>"
UNK = "<unk>"
SPECIALS = (PAD, UNK)

_TEXT_TOKEN = re.compile(r"\w+|[^\w\s]")


def text_tokens(comment: str) -> list[str]:
    """Lowercase; words and individual punctuation marks are tokens."""
    return _TEXT_TOKEN.findall(comment.lower())


class Vocab:
    pad_index = 0
    unk_index = 1

    def __init__(self, tokens: Iterable[str]):
        self.itos: list[str] = list(SPECIALS)
        for tok in tokens:
            if tok in SPECIALS:
                continue
            self.itos.append(tok)
        self.stoi = {t: i for i, t in enumerate(self.itos)}
        if len(self.stoi) != len(self.itos):
            raise ValueError("vocabulary tokens must be unique")

    def __len__(self) -> int:
        return len(self.itos)

    def __contains__(self, token: str) -> bool:
        return token in self.stoi

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocab) and self.itos == other.itos

    def index(self, token: str) -> int:
        return self.stoi.get(token, self.unk_index)

    def encode(self, tokens: Iterable[str]) -> list[int]:
        return [self.stoi.get(t, self.unk_index) for t in tokens]

    def save(self, path: str | os.PathLike) -> None:
        from ..autodiff.checkpoint import atomic_write_bytes

        atomic_write_bytes(path, ("\n".join(self.itos) + "\n").encode("utf-8"))

    @classmethod
    def load(cls, path: str | os.PathLike) -> Vocab:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        if tuple(lines[: len(SPECIALS)]) != SPECIALS:
            raise ValueError(f"{path}: vocabulary file must start with {SPECIALS}")
        return cls(lines[len(SPECIALS) :])


def build_vocab(sequences: Iterable[Iterable[str]], min_count: int = 1) -> Vocab:
    """Tokens seen at least ``min_count`` times, most frequent first, ties lexicographic."""
    counts: Counter[str] = Counter()
    for seq in sequences:
        counts.update(seq)
    if not counts:
        raise ValueError("build_vocab: empty corpus")
    kept = [t for t, c in counts.items() if c >= min_count and t not in SPECIALS]
    kept.sort(key=lambda t: (-counts[t], t))
    return Vocab(kept)
