"""Random forest classifier built on Gini-impurity decision trees.

Trees grow greedily: at each node a subset of candidate features is drawn
without replacement, every midpoint between sorted distinct values is
scored by weighted Gini decrease, and the best strictly-positive split
wins. Each tree trains on a bootstrap sample the size of the training set,
with its own generator derived from (forest seed, tree index), so forests
are reproducible tree by tree.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ModelError
from ..seeding import rng_for

_MIN_GAIN = 1e-12


def gini(class_counts) -> float:
    """Gini impurity 1 - sum(p_i^2) of a class-count vector."""
    counts = np.asarray(class_counts, dtype=float)
    if np.any(counts < 0):
        raise ModelError("class counts must be non-negative")
    total = counts.sum()
    if total < 1:
        raise ModelError("gini of all-zero counts is undefined")
    p = counts / total
    return float(1.0 - np.dot(p, p))


@dataclass
class TreeNode:
    """Internal node (feature/threshold/children) or leaf (counts only)."""

    counts: np.ndarray
    n_samples: int
    feature: int | None = None
    threshold: float = 0.0
    gain: float = 0.0  # weighted impurity decrease of the split
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


@dataclass
class DecisionTree:
    root: TreeNode
    n_features: int
    n_classes: int
    bootstrap_indices: np.ndarray | None = field(default=None, repr=False)

    def predict_class_index(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        out = np.empty(X.shape[0], dtype=int)
        for i, x in enumerate(X):
            node = self.root
            while not node.is_leaf:
                node = node.left if x[node.feature] <= node.threshold else node.right
            out[i] = int(np.argmax(node.counts))  # first max: lowest class
        return out

    def importance(self) -> np.ndarray:
        """Per-feature sum of (sample fraction x Gini decrease) over splits."""
        imp = np.zeros(self.n_features)
        total = self.root.n_samples
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                continue
            imp[node.feature] += (node.n_samples / total) * node.gain
            stack.append(node.left)
            stack.append(node.right)
        return imp


def _best_split(X, y_idx, n_classes, candidates):
    """Best (gain, feature, threshold) over candidate features, or None."""
    n = y_idx.shape[0]
    parent_counts = np.bincount(y_idx, minlength=n_classes).astype(float)
    parent_gini = 1.0 - np.dot(parent_counts / n, parent_counts / n)
    best = None
    for f in candidates:
        col = X[:, f]
        order = np.argsort(col, kind="stable")
        xs = col[order]
        boundary = np.nonzero(xs[:-1] < xs[1:])[0]
        if boundary.size == 0:
            continue
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), y_idx[order]] = 1.0
        cum = np.cumsum(onehot, axis=0)
        n_left = boundary + 1.0
        n_right = n - n_left
        c_left = cum[boundary]
        c_right = parent_counts - c_left
        g_left = 1.0 - np.square(c_left / n_left[:, None]).sum(axis=1)
        g_right = 1.0 - np.square(c_right / n_right[:, None]).sum(axis=1)
        gains = parent_gini - (n_left * g_left + n_right * g_right) / n
        j = int(np.argmax(gains))
        if best is None or gains[j] > best[0]:
            threshold = float((xs[boundary[j]] + xs[boundary[j] + 1]) / 2.0)
            best = (float(gains[j]), int(f), threshold)
    return best


def _feature_subset_size(max_features: str, n_features: int) -> int:
    if max_features == "sqrt":
        return max(1, int(np.sqrt(n_features)))
    if max_features == "log2":
        return max(1, int(np.log2(n_features)))
    if max_features == "all":
        return n_features
    raise ModelError(f"max_features must be sqrt, log2, or all, got {max_features!r}")


def _grow(X, y_idx, n_classes, m, max_depth, rng, depth=0) -> TreeNode:
    counts = np.bincount(y_idx, minlength=n_classes).astype(float)
    n = y_idx.shape[0]
    node = TreeNode(counts=counts, n_samples=n)
    pure = np.count_nonzero(counts) <= 1
    if pure or n < 2 or (max_depth is not None and depth >= max_depth):
        return node
    d = X.shape[1]
    if m >= d:
        candidates = np.arange(d)
    else:
        candidates = rng.choice(d, size=m, replace=False)
    best = _best_split(X, y_idx, n_classes, candidates)
    if best is None or best[0] <= _MIN_GAIN:
        return node
    gain, feature, threshold = best
    mask = X[:, feature] <= threshold
    node.feature = feature
    node.threshold = threshold
    node.gain = gain
    node.left = _grow(X[mask], y_idx[mask], n_classes, m, max_depth, rng, depth + 1)
    node.right = _grow(X[~mask], y_idx[~mask], n_classes, m, max_depth, rng, depth + 1)
    return node


def train_tree(X, y_idx, n_classes, max_features, max_depth, rng) -> DecisionTree:
    """Grow one greedy Gini tree on (X, y_idx) with class indices in y_idx."""
    X = np.asarray(X, dtype=float)
    y_idx = np.asarray(y_idx, dtype=int)
    if X.shape[0] < 1:
        raise ModelError("at least one sample required to grow a tree")
    m = _feature_subset_size(max_features, X.shape[1])
    root = _grow(X, y_idx, n_classes, m, max_depth, rng)
    return DecisionTree(root=root, n_features=X.shape[1], n_classes=n_classes)


@dataclass
class ForestClassifier:
    """Bag of Gini trees voting by majority, ties to the lowest class."""

    trees: list[DecisionTree]
    n_classes: int

    def predict_class_index(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        votes = np.zeros((X.shape[0], self.n_classes), dtype=int)
        for tree in self.trees:
            pred = tree.predict_class_index(X)
            votes[np.arange(X.shape[0]), pred] += 1
        return np.argmax(votes, axis=1)  # first max: lowest class

    def importance(self) -> np.ndarray:
        """MDI: per-tree weighted Gini decreases, averaged, then normalized."""
        per_tree = np.stack([tree.importance() for tree in self.trees])
        mean = per_tree.mean(axis=0)
        total = mean.sum()
        if total > 0:
            mean = mean / total
        return mean


def fit_forest(X, y_idx, n_classes, n_estimators, max_features, max_depth, seed) -> ForestClassifier:
    """Train n_estimators trees, each on its own bootstrap resample."""
    X = np.asarray(X, dtype=float)
    y_idx = np.asarray(y_idx, dtype=int)
    n = X.shape[0]
    trees = []
    for t in range(n_estimators):
        rng = rng_for(seed, "tree", t)
        boot = rng.integers(0, n, size=n)
        tree = train_tree(X[boot], y_idx[boot], n_classes, max_features, max_depth, rng)
        tree.bootstrap_indices = boot
        trees.append(tree)
    return ForestClassifier(trees=trees, n_classes=n_classes)
