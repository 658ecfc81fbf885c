"""Next-event classifiers.

Every model exposes ``fit(X, y)`` and ``predict_proba(X)``; the predicted
class is the argmax of the probability row with ties resolved towards the
lowest class index (the target-class order).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np

from ..errors import InputError
from ..evochain import TARGET_CLASSES, SequenceInstance
from ..ged import EventType
from .dataset import N_CLASSES, N_EVENT_CODES, Dataset, encode_features
from .tree import GainRatioTree

logger = logging.getLogger(__name__)


class ClassifierKind(Enum):
    BASELINE = "baseline"
    BAYES = "bayes"
    KNN = "knn"
    TREE = "tree"
    FOREST = "forest"


_DEFAULTS: dict[ClassifierKind, dict[str, Any]] = {
    ClassifierKind.BASELINE: {},
    ClassifierKind.BAYES: {},
    ClassifierKind.KNN: {"k": 1},
    ClassifierKind.TREE: {"min_leaf": 2, "prune": False, "confidence": 0.25},
    ClassifierKind.FOREST: {"trees": 10, "features": None, "min_leaf": 2},
}


@dataclass(frozen=True)
class ClassifierSpec:
    kind: ClassifierKind
    hyperparameters: dict[str, Any] = field(default_factory=dict, hash=False)
    seed: int = 0

    def __post_init__(self) -> None:
        kind = self.kind if isinstance(self.kind, ClassifierKind) else ClassifierKind(self.kind)
        object.__setattr__(self, "kind", kind)
        unknown = set(self.hyperparameters) - set(_DEFAULTS[kind])
        if unknown:
            raise InputError(f"{kind.value}: unknown hyperparameter(s) {sorted(unknown)}")
        params = self.params
        if kind is ClassifierKind.KNN and int(params["k"]) < 1:
            raise InputError("knn: k must be >= 1")
        if kind is ClassifierKind.FOREST and int(params["trees"]) < 1:
            raise InputError("forest: trees must be >= 1")
        if kind in (ClassifierKind.TREE, ClassifierKind.FOREST) and int(params["min_leaf"]) < 1:
            raise InputError("min_leaf must be >= 1")

    @property
    def params(self) -> dict[str, Any]:
        return {**_DEFAULTS[self.kind], **self.hyperparameters}

    @property
    def name(self) -> str:
        return self.kind.value


class MajorityBaseline:
    """Always predicts the most frequent training class."""

    def fit(self, X, y):
        counts = np.bincount(y, minlength=N_CLASSES).astype(np.float64)
        self.proba_ = counts / counts.sum()
        return self

    def predict_proba(self, X):
        return np.tile(self.proba_, (len(X), 1))


class NaiveBayes:
    """Gaussian likelihoods for numeric features, Laplace-smoothed
    frequencies for categorical ones."""

    def __init__(self, categorical: np.ndarray):
        self.categorical = np.asarray(categorical, dtype=bool)

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        counts = np.bincount(y, minlength=N_CLASSES).astype(np.float64)
        self.log_prior_ = np.log((counts + 1) / (counts.sum() + N_CLASSES))
        self.num_ = np.flatnonzero(~self.categorical)
        self.cat_ = np.flatnonzero(self.categorical)
        self.mean_ = np.zeros((N_CLASSES, len(self.num_)))
        self.std_ = np.ones((N_CLASSES, len(self.num_)))
        for j, f in enumerate(self.num_):
            col = X[:, f]
            distinct = np.unique(col)
            precision = float(np.mean(np.diff(distinct))) if len(distinct) > 1 else 1.0
            floor = precision / 6.0
            for c in range(N_CLASSES):
                vals = col[y == c]
                if len(vals):
                    self.mean_[c, j] = vals.mean()
                    self.std_[c, j] = max(vals.std(), floor)
                else:
                    self.std_[c, j] = floor
        self.log_cat_ = np.zeros((N_CLASSES, len(self.cat_), N_EVENT_CODES))
        for j, f in enumerate(self.cat_):
            for c in range(N_CLASSES):
                codes = X[y == c, f].astype(np.int64)
                freq = np.bincount(codes, minlength=N_EVENT_CODES).astype(np.float64)
                self.log_cat_[c, j] = np.log((freq + 1) / (freq.sum() + N_EVENT_CODES))
        self.present_ = counts > 0
        return self

    def predict_proba(self, X):
        X = np.asarray(X, dtype=np.float64)
        out = np.empty((len(X), N_CLASSES))
        for r, x in enumerate(X):
            z = (x[self.num_][None, :] - self.mean_) / self.std_
            log_lik = (-0.5 * z * z - np.log(self.std_) - 0.5 * math.log(2 * math.pi)).sum(axis=1)
            codes = x[self.cat_].astype(np.int64)
            log_lik += self.log_cat_[:, np.arange(len(self.cat_)), codes].sum(axis=1)
            score = self.log_prior_ + log_lik
            score = np.where(self.present_, score, -np.inf)
            score -= score.max()
            p = np.exp(score)
            out[r] = p / p.sum()
        return out


class KNearest:
    """k nearest neighbours with a mixed distance: range-normalized absolute
    difference on numeric features plus 0/1 mismatch on categorical ones."""

    def __init__(self, categorical: np.ndarray, k: int = 1):
        self.categorical = np.asarray(categorical, dtype=bool)
        self.k = k

    def fit(self, X, y):
        self.X_ = np.asarray(X, dtype=np.float64)
        self.y_ = np.asarray(y)
        num = ~self.categorical
        lo = self.X_[:, num].min(axis=0)
        span = self.X_[:, num].max(axis=0) - lo
        self.lo_ = lo
        self.span_ = np.where(span > 0, span, 1.0)
        return self

    def distances(self, x: np.ndarray) -> np.ndarray:
        num = ~self.categorical
        d = (np.abs(self.X_[:, num] - x[num]) / self.span_).sum(axis=1)
        d += (self.X_[:, self.categorical] != x[self.categorical]).sum(axis=1)
        return d

    def predict_proba(self, X):
        X = np.asarray(X, dtype=np.float64)
        out = np.zeros((len(X), N_CLASSES))
        k = min(self.k, len(self.y_))
        for r, x in enumerate(X):
            order = np.lexsort((np.arange(len(self.y_)), self.distances(x)))
            votes = np.bincount(self.y_[order[:k]], minlength=N_CLASSES)
            out[r] = votes / k
        return out


def default_forest_features(n_features: int) -> int:
    return int(math.log2(n_features)) + 1


class RandomForest:
    """Bagged gain-ratio trees with a random feature subset at every split."""

    def __init__(self, categorical: np.ndarray, trees: int = 10, features: int | None = None, min_leaf: int = 2, seed: int = 0):
        self.categorical = np.asarray(categorical, dtype=bool)
        self.n_trees = trees
        self.features = features or default_forest_features(len(self.categorical))
        self.min_leaf = min_leaf
        self.seed = seed

    def tree_rng(self, t: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([self.seed & (2**63 - 1), t]))

    def bootstrap(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.integers(0, n, size=n)

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        self.trees_ = []
        for t in range(self.n_trees):
            rng = self.tree_rng(t)
            sample = self.bootstrap(rng, len(y))
            tree = GainRatioTree(
                N_CLASSES, self.categorical, min_leaf=self.min_leaf, max_features=self.features, rng=rng
            )
            self.trees_.append(tree.fit(X[sample], y[sample]))
        return self

    def predict_proba(self, X):
        total = np.zeros((len(X), N_CLASSES))
        for tree in self.trees_:
            total += tree.predict_proba(X)
        return total / len(self.trees_)


@dataclass
class Model:
    spec: ClassifierSpec
    estimator: Any
    classes: tuple[EventType, ...] = TARGET_CLASSES

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return self.estimator.predict_proba(X)

    def predict_codes(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)


def build_estimator(spec: ClassifierSpec, categorical: np.ndarray):
    p = spec.params
    if spec.kind is ClassifierKind.BASELINE:
        return MajorityBaseline()
    if spec.kind is ClassifierKind.BAYES:
        return NaiveBayes(categorical)
    if spec.kind is ClassifierKind.KNN:
        return KNearest(categorical, int(p["k"]))
    if spec.kind is ClassifierKind.TREE:
        return GainRatioTree(
            N_CLASSES, categorical, min_leaf=int(p["min_leaf"]), prune=bool(p["prune"]), confidence=float(p["confidence"])
        )
    return RandomForest(
        categorical,
        trees=int(p["trees"]),
        features=None if p["features"] is None else int(p["features"]),
        min_leaf=int(p["min_leaf"]),
        seed=spec.seed,
    )


def train(dataset: Dataset, spec: ClassifierSpec) -> Model:
    if len(dataset) == 0:
        raise InputError("cannot train on an empty dataset")
    if np.count_nonzero(dataset.class_counts()) == 1:
        logger.warning("training data holds a single class; the model is trivial")
    estimator = build_estimator(spec, dataset.categorical)
    estimator.fit(dataset.X, dataset.y)
    return Model(spec, estimator)


def predict(model: Model, instance: SequenceInstance) -> tuple[EventType, np.ndarray]:
    X, _ = encode_features([instance])
    proba = model.predict_proba(X)[0]
    return TARGET_CLASSES[int(np.argmax(proba))], proba
