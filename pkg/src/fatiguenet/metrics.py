"""Confusion counts, per-class metrics, and report rendering.

Metrics are computed on exact integer counts and only rounded when printed:
two decimals in the text report, six significant digits in CSV. A metric
whose denominator is zero is reported as 0 and flagged degenerate rather
than raising.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidLabelError, ShapeError


@dataclass(frozen=True)
class ConfusionMatrix2:
    """2x2 counts; rows are true labels, columns predicted labels."""

    counts: tuple[tuple[int, int], tuple[int, int]]

    def __post_init__(self):
        flat = [c for row in self.counts for c in row]
        if len(self.counts) != 2 or any(len(r) != 2 for r in self.counts):
            raise ShapeError("confusion matrix must be 2x2")
        if any(c < 0 for c in flat):
            raise ValueError(f"confusion counts must be non-negative, got {self.counts}")

    @property
    def total(self) -> int:
        return sum(c for row in self.counts for c in row)

    def row(self, label: int) -> tuple[int, int]:
        return self.counts[label]

    def col(self, label: int) -> tuple[int, int]:
        return (self.counts[0][label], self.counts[1][label])


@dataclass(frozen=True)
class ClassMetrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    support: int
    degenerate: bool = False  # some denominator was zero; affected metrics are 0


def confusion(labels, predictions) -> ConfusionMatrix2:
    labels = np.asarray(labels)
    predictions = np.asarray(predictions)
    if labels.shape != predictions.shape or labels.ndim != 1 or labels.size == 0:
        raise ShapeError(f"labels {labels.shape} and predictions {predictions.shape} "
                         "must be equal-length non-empty vectors")
    for name, v in (("labels", labels), ("predictions", predictions)):
        if not np.isin(v, (0, 1)).all():
            raise InvalidLabelError(f"{name} must be 0 or 1, got {np.unique(v)}")
    counts = tuple(
        tuple(int(np.sum((labels == t) & (predictions == p))) for p in (0, 1))
        for t in (0, 1)
    )
    return ConfusionMatrix2(counts)


def _ratio(num: int, den: int) -> tuple[float, bool]:
    return (num / den, False) if den else (0.0, True)


def per_class_metrics(cm: ConfusionMatrix2) -> tuple[ClassMetrics, ClassMetrics]:
    """Metrics for class 0 and class 1. Accuracy is shared (trace / total)."""
    accuracy, acc_deg = _ratio(cm.counts[0][0] + cm.counts[1][1], cm.total)
    out = []
    for label in (0, 1):
        tp = cm.counts[label][label]
        precision, p_deg = _ratio(tp, sum(cm.col(label)))
        recall, r_deg = _ratio(tp, sum(cm.row(label)))
        if precision + recall > 0:
            f1, f_deg = 2 * precision * recall / (precision + recall), False
        else:
            f1, f_deg = 0.0, True
        out.append(ClassMetrics(accuracy, precision, recall, f1,
                                support=sum(cm.row(label)),
                                degenerate=acc_deg or p_deg or r_deg or f_deg))
    return tuple(out)


def macro_metrics(cm: ConfusionMatrix2) -> ClassMetrics:
    """Unweighted mean of the two per-class rows; support is the grand total."""
    c0, c1 = per_class_metrics(cm)
    return ClassMetrics(
        accuracy=(c0.accuracy + c1.accuracy) / 2,
        precision=(c0.precision + c1.precision) / 2,
        recall=(c0.recall + c1.recall) / 2,
        f1=(c0.f1 + c1.f1) / 2,
        support=cm.total,
        degenerate=c0.degenerate or c1.degenerate,
    )


_CLASS_NAMES = {0: "closed", 1: "open"}


def classification_report(cm: ConfusionMatrix2) -> tuple[str, str]:
    """Render (text, csv) twins of the per-class / macro table plus counts.

    The CSV has two blocks separated by a blank line: the metric rows, then
    the confusion counts.
    """
    c0, c1 = per_class_metrics(cm)
    macro = macro_metrics(cm)
    rows = [("0 (closed)", c0), ("1 (open)", c1), ("macro", macro)]

    width = max(len(name) for name, _ in rows)
    text_lines = [
        f"{'class':<{width}}  accuracy  precision  recall  f1      support",
    ]
    for name, m in rows:
        text_lines.append(
            f"{name:<{width}}  {m.accuracy:<8.2f}  {m.precision:<9.2f}  "
            f"{m.recall:<6.2f}  {m.f1:<6.2f}  {m.support}"
        )
    text_lines += [
        "",
        "confusion matrix (rows true, columns predicted)",
        f"{'':>12}pred 0  pred 1",
        f"{'true 0':>10}  {cm.counts[0][0]:>6}  {cm.counts[0][1]:>6}",
        f"{'true 1':>10}  {cm.counts[1][0]:>6}  {cm.counts[1][1]:>6}",
    ]
    text = "\n".join(text_lines) + "\n"

    csv_lines = ["class,accuracy,precision,recall,f1,support"]
    for name, m in rows:
        label = name.split()[0]
        csv_lines.append(
            f"{label},{_sig6(m.accuracy)},{_sig6(m.precision)},"
            f"{_sig6(m.recall)},{_sig6(m.f1)},{m.support}"
        )
    csv_lines += [
        "",
        "true\\pred,0,1",
        f"0,{cm.counts[0][0]},{cm.counts[0][1]}",
        f"1,{cm.counts[1][0]},{cm.counts[1][1]}",
    ]
    csv = "\n".join(csv_lines) + "\n"
    return text, csv


def _sig6(value: float) -> str:
    return f"{value:.6g}"


def curve_export(records) -> str:
    """Per-epoch training curves as CSV: epoch, losses and accuracies, with
    floats at six significant digits and LF line endings."""
    lines = ["epoch,train_loss,train_acc,test_loss,test_acc"]
    for r in records:
        lines.append(f"{r.epoch},{_sig6(r.train_loss)},{_sig6(r.train_acc)},"
                     f"{_sig6(r.test_loss)},{_sig6(r.test_acc)}")
    return "\n".join(lines) + "\n"
