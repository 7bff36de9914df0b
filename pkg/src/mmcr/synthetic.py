"""Generators for synthetic Java review corpora used in tests, fixtures and demos.

Each synthetic project draws identifiers from its own pool but shares the
same statement templates, so encoders pretrained on one project see
familiar structure (and unfamiliar names) on another.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff.params import rng_for
from .data import ReviewSample

MARKER = "requireNonNull"
FIX_WORD = "fix"

POOLS = {
    "A": {
        "methods": ["computeTotal", "scaleValue", "countItems", "mergeRange", "sumWeights", "applyLimit",
                    "readOffset", "clampIndex", "nextBlock", "adjustScore"],
        "params": ["count", "limit", "offset", "size", "width", "depth", "start", "step"],
        "locals": ["result", "total", "acc", "value", "tmp", "index"],
        "helpers": ["normalize", "shift", "combine", "bound"],
        "objects": ["buffer", "table", "cache"],
    },
    "B": {
        "methods": ["encodeFrame", "flushQueue", "parseHeader", "rotateKey", "packBits", "splitChunk",
                    "drainPool", "hashSegment", "probeSlot", "trimLog"],
        "params": ["frame", "capacity", "cursor", "length", "shard", "mask", "round", "level"],
        "locals": ["out", "bits", "pos", "sum", "cur", "word"],
        "helpers": ["rotate", "pack", "mix", "fold"],
        "objects": ["queue", "ring", "store"],
    },
}

COMMENT_VERBS = ["update", "refactor", "adjust", "tidy", "rework", "simplify", "change", "improve"]
COMMENT_OBJECTS = ["loop bounds", "helper call", "return value", "local names", "arithmetic",
                   "edge handling", "input checks", "method body", "counter logic", "naming"]
COMMENT_TAILS = ["", "as discussed", "per review", "before release", "for clarity", "in this path"]


def _pick(rng: np.random.Generator, items):
    return items[int(rng.integers(len(items)))]


def _statement(rng, pool, var: str, params: list[str]) -> str:
    p = _pick(rng, params)
    n = int(rng.integers(1, 50))
    kind = int(rng.integers(7))
    if kind == 0:
        return f"{var} = {var} + {p} * {n};"
    if kind == 1:
        return f"if ({var} > {p}) {{ {var} = {var} - {n}; }}"
    if kind == 2:
        return f"for (int i = 0; i < {p}; i++) {{ {var} += i; }}"
    if kind == 3:
        return f"while ({var} > {n}) {{ {var} = {var} / 2; }}"
    if kind == 4:
        return f"{var} = {_pick(rng, pool['helpers'])}({var}, {p});"
    if kind == 5:
        return f"{_pick(rng, pool['objects'])}.put({p}, {var});"
    return f"{var} = {p} > {n} ? {var} : {var} + 1;"


@dataclass
class SyntheticMethod:
    name: str
    params: list[str]
    var: str
    body: list[str]

    def render(self, extra_first: str | None = None) -> str:
        lines = [f"public int {self.name}({', '.join('int ' + p for p in self.params)}) {{"]
        lines.append(f"    int {self.var} = 0;")
        if extra_first:
            lines.append(f"    {extra_first}")
        lines += [f"    {s}" for s in self.body]
        lines.append(f"    return {self.var};")
        lines.append("}")
        return "\n".join(lines)


def random_method(rng: np.random.Generator, project: str = "A", min_stmts: int = 2, max_stmts: int = 5) -> SyntheticMethod:
    pool = POOLS[project]
    k = int(rng.integers(1, 4))
    params = list(rng.choice(pool["params"], size=k, replace=False))
    var = _pick(rng, pool["locals"])
    body = [_statement(rng, pool, var, params) for _ in range(int(rng.integers(min_stmts, max_stmts + 1)))]
    return SyntheticMethod(_pick(rng, pool["methods"]), params, var, body)


def _neutral_edit(rng, method: SyntheticMethod, project: str) -> str:
    pool = POOLS[project]
    choice = int(rng.integers(3))
    if choice == 0:
        extra = _statement(rng, pool, method.var, method.params)
        return method.render(extra_first=extra)
    if choice == 1:
        body = list(method.body)
        body[int(rng.integers(len(body)))] = _statement(rng, pool, method.var, method.params)
        return SyntheticMethod(method.name, method.params, method.var, body).render()
    return method.render(extra_first=f"{method.var} = {method.var} + 1;")


def _marker_edit(rng, method: SyntheticMethod) -> str:
    target = _pick(rng, method.params)
    return method.render(extra_first=f"{target} = Objects.{MARKER}({target});")


def random_comment(rng: np.random.Generator, with_fix: bool) -> str:
    verb = FIX_WORD if with_fix else _pick(rng, COMMENT_VERBS)
    words = [verb, _pick(rng, COMMENT_OBJECTS)]
    tail = _pick(rng, COMMENT_TAILS)
    if tail:
        words.append(tail)
    return " ".join(words)


def review_pair(rng: np.random.Generator, project: str, marker: bool) -> tuple[str, str]:
    method = random_method(rng, project)
    original = method.render()
    revised = _marker_edit(rng, method) if marker else _neutral_edit(rng, method, project)
    if revised == original:
        revised = method.render(extra_first=f"{method.var} = {method.var} - 1;")
    return original, revised


def joint_corpus(n: int, seed: int = 0, project: str = "A", repo: str | None = None) -> list[ReviewSample]:
    """Accept iff the revision adds the marker call AND the comment says "fix".

    The four (marker, fix) cells are equally likely, so a quarter of the
    samples are accepted and neither modality alone decides the label.
    """
    rng = rng_for(seed, "joint", project)
    out = []
    for i in range(n):
        marker = bool(rng.integers(2))
        fix = bool(rng.integers(2))
        original, revised = review_pair(rng, project, marker)
        out.append(
            ReviewSample(
                id=f"{project}-{i:05d}",
                repo=repo or f"synthetic-{project}",
                original=original,
                revised=revised,
                comment=random_comment(rng, fix),
                label=int(marker and fix),
            )
        )
    return out


def ratio_corpus(n: int, rejected: int, seed: int = 0, repo: str = "synthetic", project: str = "A") -> list[ReviewSample]:
    """Corpus with exactly ``rejected`` label-0 samples out of ``n``."""
    if not 0 <= rejected <= n:
        raise ValueError("rejected must be within [0, n]")
    rng = rng_for(seed, "ratio", repo)
    labels = np.array([0] * rejected + [1] * (n - rejected))[rng.permutation(n)]
    out = []
    for i, label in enumerate(labels):
        original, revised = review_pair(rng, project, marker=bool(rng.integers(2)))
        out.append(
            ReviewSample(
                id=f"{repo}-{i:05d}",
                repo=repo,
                original=original,
                revised=revised,
                comment=random_comment(rng, bool(rng.integers(2))),
                label=int(label),
            )
        )
    return out


def distinct_fragments(n: int, seed: int = 0, project: str = "A") -> list[str]:
    """``n`` pairwise-distinct method sources."""
    rng = rng_for(seed, "fragments", project)
    seen: dict[str, None] = {}
    while len(seen) < n:
        seen.setdefault(random_method(rng, project).render())
    return list(seen)
