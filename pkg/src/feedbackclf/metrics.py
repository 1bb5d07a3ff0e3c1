"""Micro-averaged precision, recall and F-measure."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


def fbeta(precision: float, recall: float, beta: float = 1.0) -> float:
    """F-measure ``((b^2+1) P R) / (b^2 P + R)``; 0.0 when the denominator is 0."""
    b2 = beta * beta
    denom = b2 * precision + recall
    if denom == 0:
        return 0.0
    return (b2 + 1) * precision * recall / denom


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


@dataclass(frozen=True)
class EvalReport:
    labels: tuple[str, ...]
    confusion: np.ndarray  # rows = gold, columns = predicted
    beta: float = 1.0
    micro_precision: float = field(init=False)
    micro_recall: float = field(init=False)
    micro_f1: float = field(init=False)
    # True when a micro ratio had a zero denominator and was reported as 0.
    degenerate: bool = field(init=False)

    def __post_init__(self):
        tp = int(np.trace(self.confusion))
        fp = int(self.confusion.sum()) - tp
        fn = fp  # single-label: every miss is one FP and one FN
        b2 = self.beta * self.beta
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        set_("micro_precision", _ratio(tp, tp + fp))
        set_("micro_recall", _ratio(tp, tp + fn))
        # From pooled counts; equals fbeta(P, R) and is exact when P == R.
        den = (b2 + 1) * tp + b2 * fn + fp
        set_("micro_f1", (b2 + 1) * tp / den if den else 0.0)
        set_("degenerate", tp + fp == 0)

    @property
    def n(self) -> int:
        return int(self.confusion.sum())

    @property
    def per_class(self) -> dict[str, dict[str, float]]:
        out = {}
        for i, lab in enumerate(self.labels):
            tp = int(self.confusion[i, i])
            p = _ratio(tp, int(self.confusion[:, i].sum()))
            r = _ratio(tp, int(self.confusion[i, :].sum()))
            out[lab] = {"precision": p, "recall": r, "f1": fbeta(p, r, self.beta)}
        return out

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "micro_precision": self.micro_precision,
            "micro_recall": self.micro_recall,
            "micro_f1": self.micro_f1,
            "labels": list(self.labels),
            "confusion": self.confusion.tolist(),
            "per_class": self.per_class,
        }


def micro_scores(predictions: Sequence[str], golds: Sequence[str],
                 label_set: Sequence[str], beta: float = 1.0) -> EvalReport:
    if len(predictions) != len(golds):
        raise ValueError(f"length mismatch: {len(predictions)} predictions, {len(golds)} golds")
    if not golds:
        raise ValueError("empty evaluation set")
    index = {lab: i for i, lab in enumerate(label_set)}
    conf = np.zeros((len(index), len(index)), dtype=np.int64)
    for p, g in zip(predictions, golds):
        if p not in index or g not in index:
            raise ValueError(f"unknown label {p if p not in index else g!r}")
        conf[index[g], index[p]] += 1
    return EvalReport(tuple(label_set), conf, beta)


def accuracy(predictions: Sequence[str], golds: Sequence[str]) -> float:
    if len(predictions) != len(golds):
        raise ValueError("length mismatch")
    if not golds:
        raise ValueError("empty evaluation set")
    return sum(p == g for p, g in zip(predictions, golds)) / len(golds)
