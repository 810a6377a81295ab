"""Classification metrics, cross-validation harnesses, and oversampling.

Metrics follow the classic report layout: per-class precision/recall/f1 and
support, overall accuracy, and macro / support-weighted averages. A zero
denominator yields 0 with a flag rather than an error so degenerate CV folds
never abort a run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigError, ValidationError
from .tabular import Table

LOOCV_SCHEME = "loocv"
KFOLD_SCHEME = "kfold"


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class EvaluationReport:
    confusion: dict[int, dict[str, int]]   # per class treated as positive: tp/fp/tn/fn
    per_class: dict[int, ClassMetrics]
    accuracy: float
    macro_avg: tuple[float, float, float]      # precision, recall, f1
    weighted_avg: tuple[float, float, float]
    total_support: int
    zero_division_flags: tuple[str, ...]       # e.g. "precision[1]" when TP+FP == 0


@dataclass(frozen=True)
class CVResult:
    scheme: str
    fold_count: int
    per_fold_accuracy: tuple[float, ...]
    mean_accuracy: float
    k: int | None = None


def _ratio(num: int, den: int, flag: str, flags: list[str]) -> float:
    if den == 0:
        flags.append(flag)
        return 0.0
    return num / den


def metrics(y_true, y_pred) -> EvaluationReport:
    """Binary classification report over aligned 0/1 label sequences."""
    t = np.asarray(y_true, dtype=np.int64)
    p = np.asarray(y_pred, dtype=np.int64)
    if t.shape != p.shape or t.ndim != 1 or t.size == 0:
        raise ValidationError("y_true and y_pred must be equal-length non-empty sequences")
    for name, arr in (("y_true", t), ("y_pred", p)):
        if not np.isin(arr, (0, 1)).all():
            raise ValidationError(f"{name} contains values outside {{0, 1}}")
    flags: list[str] = []
    confusion: dict[int, dict[str, int]] = {}
    per_class: dict[int, ClassMetrics] = {}
    for c in (0, 1):
        tp = int(((p == c) & (t == c)).sum())
        fp = int(((p == c) & (t != c)).sum())
        fn = int(((p != c) & (t == c)).sum())
        tn = int(((p != c) & (t != c)).sum())
        confusion[c] = {"tp": tp, "fp": fp, "tn": tn, "fn": fn}
        precision = _ratio(tp, tp + fp, f"precision[{c}]", flags)
        recall = _ratio(tp, tp + fn, f"recall[{c}]", flags)
        f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
        per_class[c] = ClassMetrics(precision, recall, f1, tp + fn)
    total = t.size
    accuracy = float((t == p).sum()) / total
    macro = tuple(
        (getattr(per_class[0], m) + getattr(per_class[1], m)) / 2
        for m in ("precision", "recall", "f1")
    )
    weighted = tuple(
        (per_class[0].support * getattr(per_class[0], m) + per_class[1].support * getattr(per_class[1], m))
        / total
        for m in ("precision", "recall", "f1")
    )
    return EvaluationReport(
        confusion, per_class, accuracy, macro, weighted, total, tuple(flags)
    )


# ---------------------------------------------------------------------------
# Cross-validation
# ---------------------------------------------------------------------------

ModelFactory = Callable[[int], object]  # seed -> model with fit / predict_row


def _fold_accuracy(model, features: Table, target, test_idx) -> float:
    correct = 0
    for i in test_idx:
        if model.predict_row(features.row(int(i))) == int(target[i]):
            correct += 1
    return correct / len(test_idx)


def loocv(model_factory: ModelFactory, features: Table, target, seed: int = 0) -> CVResult:
    """Leave-one-out: n folds, each scoring exactly one held-out row.

    A fresh model comes from ``model_factory(seed + fold_index)`` per fold, so
    folds are independent and reproducible.
    """
    target = np.asarray(target)
    n = features.n_rows
    if n < 2:
        raise ValidationError("LOOCV needs at least 2 rows")
    accuracies = []
    everything = np.arange(n)
    for i in range(n):
        train_idx = np.delete(everything, i)
        model = model_factory(seed + i)
        model.fit(features.take(train_idx), target[train_idx])
        accuracies.append(_fold_accuracy(model, features, target, [i]))
    return CVResult(LOOCV_SCHEME, n, tuple(accuracies), float(np.mean(accuracies)))


def kfold(
    model_factory: ModelFactory,
    features: Table,
    target,
    k: int,
    rng: np.random.Generator,
    seed: int = 0,
) -> CVResult:
    """Shuffled k-fold over near-equal partitions of the row indices."""
    target = np.asarray(target)
    n = features.n_rows
    if not 2 <= k <= n:
        raise ConfigError(f"k must satisfy 2 <= k <= {n}, got {k}")
    order = rng.permutation(n)
    folds = np.array_split(order, k)
    accuracies = []
    for fold_i, test_idx in enumerate(folds):
        mask = np.ones(n, dtype=bool)
        mask[test_idx] = False
        train_idx = np.arange(n)[mask]
        model = model_factory(seed + fold_i)
        model.fit(features.take(train_idx), target[train_idx])
        accuracies.append(_fold_accuracy(model, features, target, test_idx))
    return CVResult(KFOLD_SCHEME, k, tuple(accuracies), float(np.mean(accuracies)), k=k)


def oversample_minority(features: Table, target, rng: np.random.Generator):
    """Duplicate minority-class rows (with replacement) until classes balance.

    Majority rows are untouched and every original row stays in place;
    duplicates are appended at the end.
    """
    target = np.asarray(target, dtype=np.int64)
    n1 = int(target.sum())
    n0 = target.size - n1
    if n0 == 0 or n1 == 0:
        raise ValidationError("oversampling needs both classes present")
    if n0 == n1:
        return features, target
    minority = 0 if n0 < n1 else 1
    deficit = abs(n0 - n1)
    pool = np.flatnonzero(target == minority)
    extra = rng.choice(pool, size=deficit, replace=True)
    idx = np.concatenate([np.arange(target.size), extra])
    return features.take(idx), target[idx]


# ---------------------------------------------------------------------------
# Report serialization
# ---------------------------------------------------------------------------

def report_to_json(report: EvaluationReport, evaluated_on: str = "training") -> str:
    doc = {
        "evaluated_on": evaluated_on,
        "per_class": {
            str(c): {
                "precision": m.precision,
                "recall": m.recall,
                "f1-score": m.f1,
                "support": m.support,
            }
            for c, m in report.per_class.items()
        },
        "accuracy": report.accuracy,
        "macro avg": {
            "precision": report.macro_avg[0],
            "recall": report.macro_avg[1],
            "f1-score": report.macro_avg[2],
            "support": report.total_support,
        },
        "weighted avg": {
            "precision": report.weighted_avg[0],
            "recall": report.weighted_avg[1],
            "f1-score": report.weighted_avg[2],
            "support": report.total_support,
        },
        "confusion": {
            str(c): report.confusion[c] for c in report.confusion
        },
        "zero_division_flags": list(report.zero_division_flags),
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def report_to_text(report: EvaluationReport) -> str:
    """Aligned plain-text table in the classic report layout."""
    rows = [("", "precision", "recall", "f1-score", "support")]
    for c in (0, 1):
        m = report.per_class[c]
        rows.append((str(c), f"{m.precision:.2f}", f"{m.recall:.2f}", f"{m.f1:.2f}", str(m.support)))
    rows.append(("accuracy", "", "", f"{report.accuracy:.2f}", str(report.total_support)))
    rows.append(
        ("macro avg",) + tuple(f"{v:.2f}" for v in report.macro_avg) + (str(report.total_support),)
    )
    rows.append(
        ("weighted avg",) + tuple(f"{v:.2f}" for v in report.weighted_avg) + (str(report.total_support),)
    )
    widths = [max(len(r[i]) for r in rows) for i in range(5)]
    lines = ["  ".join(cell.rjust(widths[i]) for i, cell in enumerate(row)).rstrip() for row in rows]
    return "\n".join(lines) + "\n"


def cv_to_json(result: CVResult) -> str:
    doc = {
        "scheme": result.scheme,
        "k": result.k,
        "fold_count": result.fold_count,
        "per_fold_accuracy": list(result.per_fold_accuracy),
        "mean_accuracy": result.mean_accuracy,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def cv_to_text(result: CVResult) -> str:
    name = result.scheme if result.k is None else f"{result.scheme}(k={result.k})"
    return (
        f"scheme: {name}\n"
        f"folds: {result.fold_count}\n"
        f"mean accuracy: {result.mean_accuracy:.4f}\n"
    )
