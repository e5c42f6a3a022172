"""Confusion-matrix accounting and the four evaluation measures.

Attack (label 1) is the positive class. Ratios with a zero denominator
are reported as 0 together with an explicit flag so downstream tables
stay totally ordered instead of carrying NaN.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    precision: float
    recall: float
    far: float
    undefined: tuple[str, ...] = ()

    def csv_row(self) -> str:
        """One row in the summary-table column order: Acc(%), Precision, Recall, FAR."""
        return f"{self.accuracy * 100:.4f},{self.precision:.6f},{self.recall:.6f},{self.far:.6f}"


def confusion(predicted, actual) -> ConfusionMatrix:
    predicted = np.asarray(predicted)
    actual = np.asarray(actual)
    if predicted.shape != actual.shape:
        raise DataError(f"length mismatch: {predicted.shape} vs {actual.shape}")
    if predicted.size == 0:
        raise DataError("cannot build a confusion matrix from empty inputs")
    tp = int(np.sum((predicted == 1) & (actual == 1)))
    tn = int(np.sum((predicted == 0) & (actual == 0)))
    fp = int(np.sum((predicted == 1) & (actual == 0)))
    fn = int(np.sum((predicted == 0) & (actual == 1)))
    return ConfusionMatrix(tp=tp, tn=tn, fp=fp, fn=fn)


def report(cm: ConfusionMatrix) -> MetricsReport:
    """Accuracy, precision, recall, and false alarm rate FP/(FP+TN)."""
    if cm.total <= 0:
        raise DataError("confusion matrix is empty")
    undefined = []

    def ratio(num: int, den: int, name: str) -> float:
        if den == 0:
            undefined.append(name)
            return 0.0
        return num / den

    accuracy = (cm.tp + cm.tn) / cm.total
    precision = ratio(cm.tp, cm.tp + cm.fp, "precision")
    recall = ratio(cm.tp, cm.tp + cm.fn, "recall")
    far = ratio(cm.fp, cm.fp + cm.tn, "far")
    return MetricsReport(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        far=far,
        undefined=tuple(undefined),
    )
