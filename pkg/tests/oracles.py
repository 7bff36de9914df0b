"""Independent reference implementations used to cross-check the package.

Each is written from the textbook definition, in a different style from the
code under test (exact fractions, explicit loops, float64 only).
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


def brute_metrics(tp: int, fp: int, fn: int, tn: int) -> tuple[float, float]:
    """(F1, MCC) from explicit label lists, counted one sample at a time."""
    preds = [1] * tp + [1] * fp + [0] * fn + [0] * tn
    labels = [1] * tp + [0] * fp + [1] * fn + [0] * tn
    TP = sum(1 for p, y in zip(preds, labels) if p == 1 and y == 1)
    FP = sum(1 for p, y in zip(preds, labels) if p == 1 and y == 0)
    FN = sum(1 for p, y in zip(preds, labels) if p == 0 and y == 1)
    TN = sum(1 for p, y in zip(preds, labels) if p == 0 and y == 0)
    prec = Fraction(TP, TP + FP) if TP + FP else Fraction(0)
    rec = Fraction(TP, TP + FN) if TP + FN else Fraction(0)
    f1 = 2 * prec * rec / (prec + rec) if prec + rec else Fraction(0)
    den2 = (TP + FP) * (TP + FN) * (TN + FP) * (TN + FN)
    if den2 == 0:
        m = 0.0
    else:
        num = Fraction(TP * TN - FP * FN)
        m = float(num / Fraction(math.isqrt(den2))) if math.isqrt(den2) ** 2 == den2 else float(num) / math.sqrt(den2)
    return float(f1), m


def info_nce_reference(h: np.ndarray, hp: np.ndarray, tau: float) -> float:
    """Row-by-row loop over the definition."""
    h = np.asarray(h, dtype=np.float64)
    hp = np.asarray(hp, dtype=np.float64)
    n = h.shape[0]
    total = 0.0
    for i in range(n):
        sims = []
        for j in range(n):
            sims.append(float(h[i] @ hp[j]) / (np.linalg.norm(h[i]) * np.linalg.norm(hp[j])) / tau)
        m = max(sims)
        denom = sum(math.exp(s - m) for s in sims)
        total += -(sims[i] - m - math.log(denom))
    return total / n


def orthonormal_info_nce(n: int, tau: float) -> float:
    """Closed form when h_i = h+_i are orthonormal: -log(e^(1/t) / (e^(1/t) + (n-1)))."""
    return math.log1p((n - 1) * math.exp(-1.0 / tau))


def plain_cross_entropy(probs: np.ndarray, labels: np.ndarray) -> float:
    """Unweighted binary CE over (reject, accept) probability rows, summed."""
    total = 0.0
    for row, y in zip(probs, labels):
        p = min(max(float(row[int(y)]), 1e-7), 1 - 1e-7)
        total -= math.log(p)
    return total


def softmax_pair(logits) -> tuple[float, float]:
    a, b = (float(x) for x in logits)
    m = max(a, b)
    ea, eb = math.exp(a - m), math.exp(b - m)
    return ea / (ea + eb), eb / (ea + eb)
