"""Confusion-matrix accounting, F1, MCC and the per-repository CSV report."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

REPORT_COLUMNS = ("repo", "samples", "tp", "fp", "fn", "tn", "precision", "recall", "f1", "mcc")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        for name in ("tp", "fp", "fn", "tn"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v!r}")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def inverted(self) -> ConfusionMatrix:
        """Counts obtained when every prediction is flipped."""
        return ConfusionMatrix(tp=self.fn, fp=self.tn, fn=self.tp, tn=self.fp)

    def swapped_positive(self) -> ConfusionMatrix:
        """Counts under the opposite positive-class convention."""
        return ConfusionMatrix(tp=self.tn, fp=self.fn, fn=self.fp, tn=self.tp)

    def __add__(self, other: ConfusionMatrix) -> ConfusionMatrix:
        return ConfusionMatrix(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn)


def confusion(predictions: Sequence[int], labels: Sequence[int], positive: int = 1) -> ConfusionMatrix:
    if len(predictions) != len(labels):
        raise ValueError(f"length mismatch: {len(predictions)} predictions, {len(labels)} labels")
    if not labels:
        raise ValueError("confusion: empty input")
    if positive not in (0, 1):
        raise ValueError("positive class must be 0 or 1")
    tp = fp = fn = tn = 0
    for p, y in zip(predictions, labels):
        p, y = int(p), int(y)
        if p not in (0, 1) or y not in (0, 1):
            raise ValueError(f"predictions and labels must be 0/1, got {p}, {y}")
        if p == positive:
            if y == positive:
                tp += 1
            else:
                fp += 1
        elif y == positive:
            fn += 1
        else:
            tn += 1
    return ConfusionMatrix(tp, fp, fn, tn)


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


def precision(cm: ConfusionMatrix) -> float:
    return _ratio(cm.tp, cm.tp + cm.fp)


def recall(cm: ConfusionMatrix) -> float:
    return _ratio(cm.tp, cm.tp + cm.fn)


def f1(cm: ConfusionMatrix) -> float:
    p, r = precision(cm), recall(cm)
    return _ratio(2 * p * r, p + r)


def mcc(cm: ConfusionMatrix) -> float:
    """Matthews correlation with the standard TP*TN - FP*FN numerator; 0 when undefined."""
    tp, fp, fn, tn = cm.tp, cm.fp, cm.fn, cm.tn
    den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if den == 0:
        return 0.0
    # Python ints keep the numerator and the denominator product exact.
    return (tp * tn - fp * fn) / math.sqrt(den)


@dataclass(frozen=True)
class MetricRow:
    repo: str
    cm: ConfusionMatrix

    def values(self) -> dict:
        return {
            "repo": self.repo,
            "samples": self.cm.total,
            "tp": self.cm.tp,
            "fp": self.cm.fp,
            "fn": self.cm.fn,
            "tn": self.cm.tn,
            "precision": precision(self.cm),
            "recall": recall(self.cm),
            "f1": f1(self.cm),
            "mcc": mcc(self.cm),
        }


def _fmt(v) -> str:
    return f"{v:.6f}" if isinstance(v, float) else str(v)


def report_csv(rows: Iterable[MetricRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for row in rows:
        vals = row.values()
        writer.writerow([_fmt(vals[c]) for c in REPORT_COLUMNS])
    return buf.getvalue()


def report_text(rows: Iterable[MetricRow]) -> str:
    lines = []
    for row in rows:
        v = row.values()
        lines.append(
            f"{v['repo']}: samples={v['samples']} tp={v['tp']} fp={v['fp']} fn={v['fn']} tn={v['tn']} "
            f"precision={v['precision']:.4f} recall={v['recall']:.4f} f1={v['f1']:.4f} mcc={v['mcc']:.4f}"
        )
    return "\n".join(lines) + "\n"
