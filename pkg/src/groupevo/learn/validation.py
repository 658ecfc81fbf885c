from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import InputError
from ..evochain import TARGET_CLASSES
from .dataset import N_CLASSES, Dataset
from .models import ClassifierSpec, train


def per_class_scores(confusion: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Precision, recall, F and support per class; rows are actual classes.

    Undefined ratios (class never predicted, zero support, P + R = 0) are 0.
    """
    confusion = np.asarray(confusion, dtype=np.int64)
    if confusion.ndim != 2 or confusion.shape[0] != confusion.shape[1]:
        raise InputError("confusion matrix must be square")
    if (confusion < 0).any():
        raise InputError("confusion matrix must be non-negative")
    tp = np.diag(confusion).astype(np.float64)
    predicted = confusion.sum(axis=0).astype(np.float64)
    support = confusion.sum(axis=1)
    precision = np.divide(tp, predicted, out=np.zeros_like(tp), where=predicted > 0)
    recall = np.divide(tp, support.astype(np.float64), out=np.zeros_like(tp), where=support > 0)
    denom = precision + recall
    f = np.divide(2 * precision * recall, denom, out=np.zeros_like(tp), where=denom > 0)
    return precision, recall, f, support


def weighted_f(confusion: np.ndarray) -> float:
    """Per-class F averaged with weights support_c / N."""
    confusion = np.asarray(confusion)
    total = int(confusion.sum())
    if total == 0:
        raise InputError("confusion matrix is all zero")
    _, _, f, support = per_class_scores(confusion)
    return _support_weighted(f, support, total)


def _support_weighted(values, support, total: int) -> float:
    # sum of support_c * v_c / N, rounded once so a perfect matrix gives exactly 1
    return math.fsum(float(support[c]) * float(values[c]) for c in range(len(values))) / total


@dataclass(frozen=True)
class EvalReport:
    classifier: str
    confusion: np.ndarray
    precision: np.ndarray
    recall: np.ndarray
    f: np.ndarray
    support: np.ndarray
    weighted_f: float
    folds: int
    seed: int

    @classmethod
    def from_confusion(cls, classifier: str, confusion: np.ndarray, folds: int, seed: int) -> "EvalReport":
        p, r, f, s = per_class_scores(confusion)
        return cls(classifier, np.asarray(confusion), p, r, f, s, weighted_f(confusion), folds, seed)

    @property
    def n(self) -> int:
        return int(self.support.sum())

    def weighted(self, values: np.ndarray) -> float:
        return _support_weighted(values, self.support, self.n)


def fold_seed(seed: int, fold: int) -> int:
    return int(np.random.SeedSequence([seed & (2**63 - 1), 1, fold]).generate_state(1, np.uint64)[0] >> 1)


def stratified_folds(y: np.ndarray, folds: int, seed: int) -> np.ndarray:
    """Fold number per instance.

    Instances are shuffled with ``seed``, then dealt round-robin class by
    class, continuing the deal across classes so fold sizes stay balanced.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed & (2**63 - 1), 0]))
    perm = rng.permutation(len(y))
    assignment = np.empty(len(y), dtype=np.int64)
    dealt = 0
    for c in range(N_CLASSES):
        members = perm[y[perm] == c]
        assignment[members] = (dealt + np.arange(len(members))) % folds
        dealt += len(members)
    return assignment


def cross_validate(dataset: Dataset, spec: ClassifierSpec, folds: int = 10) -> EvalReport:
    if folds < 2:
        raise InputError("need at least two folds")
    if len(dataset) < folds:
        raise InputError(f"{len(dataset)} instances cannot fill {folds} folds")
    assignment = stratified_folds(dataset.y, folds, spec.seed)
    confusion = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    for k in range(folds):
        test = np.flatnonzero(assignment == k)
        train_idx = np.flatnonzero(assignment != k)
        fold_spec = ClassifierSpec(spec.kind, dict(spec.hyperparameters), fold_seed(spec.seed, k))
        model = train(dataset.subset(train_idx), fold_spec)
        predicted = model.predict_codes(dataset.X[test])
        np.add.at(confusion, (dataset.y[test], predicted), 1)
    return EvalReport.from_confusion(spec.name, confusion, folds, spec.seed)


def format_report(report: EvalReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["class", "precision", "recall", "f", "support"])
    for c, cls in enumerate(TARGET_CLASSES):
        writer.writerow(
            [cls.value, f"{report.precision[c]:.6f}", f"{report.recall[c]:.6f}", f"{report.f[c]:.6f}", int(report.support[c])]
        )
    writer.writerow(
        [
            "weighted",
            f"{report.weighted(report.precision):.6f}",
            f"{report.weighted(report.recall):.6f}",
            f"{report.weighted_f:.6f}",
            report.n,
        ]
    )
    return buf.getvalue()


def format_confusion(report: EvalReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["actual\\predicted", *(c.value for c in TARGET_CLASSES)])
    for c, cls in enumerate(TARGET_CLASSES):
        writer.writerow([cls.value, *(int(v) for v in report.confusion[c])])
    return buf.getvalue()


def write_report(report: EvalReport, path: str | Path, confusion_path: str | Path | None = None) -> None:
    path = Path(path)
    path.write_text(format_report(report), encoding="utf-8", newline="\n")
    if confusion_path is None:
        confusion_path = path.with_name(path.stem + "_confusion.csv")
    Path(confusion_path).write_text(format_confusion(report), encoding="utf-8", newline="\n")
