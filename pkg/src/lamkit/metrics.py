"""Evaluation: confusion matrices, per-class recall, and unweighted average
recall (UAR). Classes with zero true samples are excluded from the UAR mean.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import EmptyEvaluation, InvalidLabel, ShapeError


@dataclass
class ConfusionMatrix:
    classes: tuple  # ordered class names
    counts: np.ndarray  # (C, C) ints, rows = true, cols = predicted

    def __eq__(self, other):
        return (
            isinstance(other, ConfusionMatrix)
            and self.classes == other.classes
            and np.array_equal(self.counts, other.counts)
        )


def confusion(true_labels, predicted_labels, classes) -> ConfusionMatrix:
    """Count (true, predicted) pairs. ``classes`` is an int count or a
    sequence of class names."""
    if isinstance(classes, int):
        classes = tuple(f"class{i}" for i in range(classes))
    else:
        classes = tuple(classes)
    c = len(classes)
    t = np.asarray(true_labels, dtype=np.int64)
    p = np.asarray(predicted_labels, dtype=np.int64)
    if t.shape != p.shape or t.ndim != 1:
        raise ShapeError(f"label sequences disagree: {t.shape} vs {p.shape}")
    if t.size and (t.min() < 0 or t.max() >= c or p.min() < 0 or p.max() >= c):
        raise InvalidLabel(f"labels must lie in [0, {c})")
    counts = np.zeros((c, c), dtype=np.int64)
    for ti, pi in zip(t, p):
        counts[ti, pi] += 1
    return ConfusionMatrix(classes, counts)


def uar(cm: ConfusionMatrix) -> float:
    """Mean per-class recall over classes that have true samples."""
    row_sums = cm.counts.sum(axis=1)
    present = row_sums > 0
    if not present.any():
        raise EmptyEvaluation("no class has any true samples")
    recalls = np.diag(cm.counts)[present] / row_sums[present]
    return float(recalls.mean())


def per_emotion_report(cm: ConfusionMatrix) -> dict:
    """Recall per class name; classes without true samples are absent."""
    out = {}
    row_sums = cm.counts.sum(axis=1)
    for idx, name in enumerate(cm.classes):
        if row_sums[idx] > 0:
            out[name] = float(cm.counts[idx, idx] / row_sums[idx])
    return out


def format_per_emotion(report: dict) -> dict:
    """Recalls formatted as percent with two decimals, for report tables."""
    return {name: f"{100.0 * r:.2f}" for name, r in report.items()}


def export_confusion_json(cm: ConfusionMatrix, destination) -> None:
    payload = {
        "classes": list(cm.classes),
        "counts": cm.counts.tolist(),
        "uar": uar(cm),
        "per_class_recall": per_emotion_report(cm),
    }
    text = json.dumps(payload, indent=2)
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(destination, "w", encoding="utf-8") as f:
            f.write(text)
