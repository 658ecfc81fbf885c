"""Training and evaluation of next-event classifiers."""

from .dataset import CLASS_INDEX, N_CLASSES, Dataset, make_dataset
from .models import ClassifierKind, ClassifierSpec, Model, predict, train
from .validation import (
    EvalReport,
    cross_validate,
    format_confusion,
    format_report,
    per_class_scores,
    stratified_folds,
    weighted_f,
    write_report,
)

__all__ = [
    "CLASS_INDEX",
    "N_CLASSES",
    "ClassifierKind",
    "ClassifierSpec",
    "Dataset",
    "EvalReport",
    "Model",
    "cross_validate",
    "format_confusion",
    "format_report",
    "make_dataset",
    "per_class_scores",
    "predict",
    "stratified_folds",
    "train",
    "weighted_f",
    "write_report",
]
