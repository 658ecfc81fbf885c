from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import InputError
from ..evochain import TARGET_CLASSES, SequenceInstance, column_names
from ..ged import EventType

EVENT_CODES = {e: i for i, e in enumerate(EventType)}
N_EVENT_CODES = len(EVENT_CODES)
CLASS_INDEX = {c: i for i, c in enumerate(TARGET_CLASSES)}
N_CLASSES = len(TARGET_CLASSES)


@dataclass(frozen=True)
class Dataset:
    """Feature matrix in file column order: sizes are numeric, events are
    categorical codes (``EventType`` definition order)."""

    X: np.ndarray
    y: np.ndarray
    categorical: np.ndarray
    feature_names: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.y)

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def subset(self, idx: np.ndarray) -> "Dataset":
        return Dataset(self.X[idx], self.y[idx], self.categorical, self.feature_names)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.y, minlength=N_CLASSES)


def encode_features(instances: Sequence[SequenceInstance]) -> tuple[np.ndarray, np.ndarray]:
    steps = instances[0].steps
    X = np.empty((len(instances), 2 * steps - 1), dtype=np.float64)
    for r, inst in enumerate(instances):
        if inst.steps != steps:
            raise InputError("all instances must have the same number of steps")
        for i, size in enumerate(inst.sizes):
            X[r, 2 * i] = size
            if i < len(inst.events):
                X[r, 2 * i + 1] = EVENT_CODES[inst.events[i]]
    categorical = np.zeros(X.shape[1], dtype=bool)
    categorical[1::2] = True
    return X, categorical


def make_dataset(instances: Sequence[SequenceInstance]) -> Dataset:
    if not instances:
        raise InputError("dataset is empty")
    X, categorical = encode_features(instances)
    y = np.array([CLASS_INDEX[inst.label] for inst in instances], dtype=np.int64)
    names = tuple(column_names(instances[0].steps)[:-1])
    return Dataset(X, y, categorical, names)
