"""C4.5-style decision tree with gain-ratio splits.

Categorical features split multiway (one branch per value present at the
node), numeric features split binary at a midpoint threshold.  Ties in the
split search go to the lowest feature index, then the lowest threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from statistics import NormalDist

import numpy as np


def _entropy_rows(counts: np.ndarray) -> np.ndarray:
    """Entropy (bits) of each row of a class-count matrix."""
    counts = np.asarray(counts, dtype=np.float64)
    totals = counts.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(totals > 0, counts / totals, 0.0)
        logs = np.where(p > 0, np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return -(p * logs).sum(axis=-1)


def _split_info(sizes: np.ndarray, n: float) -> float:
    p = sizes[sizes > 0] / n
    return float(-(p * np.log2(p)).sum())


@dataclass
class Node:
    counts: np.ndarray
    feature: int = -1
    threshold: float | None = None
    children: dict[int, "Node"] = field(default_factory=dict)
    default_child: int = -1

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0


@dataclass
class _Candidate:
    gain: float
    ratio: float
    feature: int
    threshold: float | None


def add_errors(n: float, e: float, confidence: float) -> float:
    """Extra errors predicted by the C4.5 pessimistic upper bound."""
    if e < 1:
        base = n * (1 - confidence ** (1 / n))
        if e == 0:
            return base
        return base + e * (add_errors(n, 1, confidence) - base)
    if e + 0.5 >= n:
        return max(n - e, 0.0)
    z = NormalDist().inv_cdf(1 - confidence)
    f = (e + 0.5) / n
    r = (f + z * z / (2 * n) + z * math.sqrt(f / n - f * f / n + z * z / (4 * n * n))) / (1 + z * z / n)
    return r * n - e


class GainRatioTree:
    def __init__(
        self,
        n_classes: int,
        categorical: np.ndarray,
        min_leaf: int = 2,
        prune: bool = False,
        confidence: float = 0.25,
        max_features: int | None = None,
        rng: np.random.Generator | None = None,
    ):
        if min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")
        if not 0 < confidence < 1:
            raise ValueError("confidence must lie in (0, 1)")
        self.n_classes = n_classes
        self.categorical = np.asarray(categorical, dtype=bool)
        self.min_leaf = min_leaf
        self.prune = prune
        self.confidence = confidence
        self.max_features = max_features
        self.rng = rng
        self.root: Node | None = None

    # -- training --------------------------------------------------------
    def fit(self, X: np.ndarray, y: np.ndarray) -> "GainRatioTree":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        self.root = Node(np.bincount(y, minlength=self.n_classes))
        stack = [(self.root, np.arange(len(y)))]
        while stack:
            node, idx = stack.pop()
            split = self._best_split(X, y, idx, node.counts)
            if split is None:
                continue
            node.feature = split.feature
            node.threshold = split.threshold
            col = X[idx, split.feature]
            if split.threshold is None:
                parts = {int(v): idx[col == v] for v in np.unique(col)}
            else:
                parts = {0: idx[col <= split.threshold], 1: idx[col > split.threshold]}
            best_size = -1
            for key in sorted(parts):
                sub = parts[key]
                child = Node(np.bincount(y[sub], minlength=self.n_classes))
                node.children[key] = child
                if len(sub) > best_size:
                    best_size, node.default_child = len(sub), key
            # reversed so the lowest branch is expanded first
            for key in sorted(parts, reverse=True):
                stack.append((node.children[key], parts[key]))
        if self.prune:
            self._prune(self.root)
        return self

    def _features(self) -> np.ndarray:
        m = len(self.categorical)
        if self.max_features is None or self.max_features >= m or self.rng is None:
            return np.arange(m)
        return np.sort(self.rng.choice(m, size=self.max_features, replace=False))

    def _best_split(self, X, y, idx, counts) -> _Candidate | None:
        n = len(idx)
        if n < 2 * self.min_leaf or np.count_nonzero(counts) <= 1:
            return None
        parent_h = float(_entropy_rows(counts))
        features = self._features()
        found = self._search(X, y, idx, parent_h, features)
        if not found and len(features) < len(self.categorical):
            found = self._search(X, y, idx, parent_h, np.arange(len(self.categorical)))
        if not found:
            return None
        positive = [c for c in found if c.gain > 0]
        if positive:
            mean_gain = sum(c.gain for c in positive) / len(positive)
            found = [c for c in positive if c.gain >= mean_gain - 1e-12]
        best = found[0]
        for c in found[1:]:
            if c.ratio > best.ratio:
                best = c
        return best

    def _search(self, X, y, idx, parent_h, features) -> list[_Candidate]:
        n = len(idx)
        out = []
        yy = y[idx]
        for f in features:
            col = X[idx, f]
            if self.categorical[f]:
                cand = self._categorical_split(col, yy, n, parent_h, int(f))
            else:
                cand = self._numeric_split(col, yy, n, parent_h, int(f))
            if cand is not None:
                out.append(cand)
        return out

    def _categorical_split(self, col, yy, n, parent_h, f) -> _Candidate | None:
        values, inverse = np.unique(col, return_inverse=True)
        if len(values) < 2:
            return None
        table = np.zeros((len(values), self.n_classes))
        np.add.at(table, (inverse, yy), 1)
        sizes = table.sum(axis=1)
        if np.count_nonzero(sizes >= self.min_leaf) < 2:
            return None
        gain = parent_h - float((sizes / n) @ _entropy_rows(table))
        si = _split_info(sizes, n)
        if si <= 0:
            return None
        return _Candidate(gain, gain / si, f, None)

    def _numeric_split(self, col, yy, n, parent_h, f) -> _Candidate | None:
        order = np.argsort(col, kind="stable")
        v = col[order]
        onehot = np.zeros((n, self.n_classes))
        onehot[np.arange(n), yy[order]] = 1
        left = np.cumsum(onehot, axis=0)[:-1]
        total = left[-1] + onehot[-1] if n > 1 else onehot[0]
        right = total - left
        n_left = np.arange(1, n, dtype=np.float64)
        valid = (v[:-1] < v[1:]) & (n_left >= self.min_leaf) & (n - n_left >= self.min_leaf)
        if not valid.any():
            return None
        pos = np.flatnonzero(valid)
        nl = n_left[pos]
        cond = (nl * _entropy_rows(left[pos]) + (n - nl) * _entropy_rows(right[pos])) / n
        gains = parent_h - cond
        k = int(np.argmax(gains))  # first maximum = lowest threshold
        i = pos[k]
        sizes = np.array([nl[k], n - nl[k]])
        gain = float(gains[k])
        si = _split_info(sizes, n)
        return _Candidate(gain, gain / si, f, float((v[i] + v[i + 1]) / 2))

    # -- pruning ---------------------------------------------------------
    def _leaf_error(self, node: Node) -> float:
        n = float(node.counts.sum())
        e = n - float(node.counts.max())
        return e + add_errors(n, e, self.confidence)

    def _prune(self, node: Node) -> float:
        """Subtree replacement, bottom-up; returns the estimated subtree error."""
        if node.is_leaf:
            return self._leaf_error(node)
        subtree = sum(self._prune(child) for child in node.children.values())
        as_leaf = self._leaf_error(node)
        if as_leaf <= subtree + 0.1:
            node.feature, node.threshold, node.children, node.default_child = -1, None, {}, -1
            return as_leaf
        return subtree

    # -- prediction ------------------------------------------------------
    def leaf_for(self, x: np.ndarray) -> Node:
        node = self.root
        if node is None:
            raise RuntimeError("tree is not fitted")
        while not node.is_leaf:
            value = x[node.feature]
            if node.threshold is None:
                key = int(value)
                node = node.children.get(key, node.children[node.default_child])
            else:
                node = node.children[0 if value <= node.threshold else 1]
        return node

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        out = np.empty((len(X), self.n_classes))
        for r, x in enumerate(X):
            counts = self.leaf_for(x).counts
            out[r] = counts / counts.sum()
        return out

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)

    def n_leaves(self) -> int:
        count, stack = 0, [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                count += 1
            else:
                stack.extend(node.children.values())
        return count
