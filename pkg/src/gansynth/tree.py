"""Binary CART classifier grown by greedy Gini minimisation (no pruning)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .data import DataError


@dataclass(frozen=True)
class Leaf:
    predicted_label: int
    class_counts: tuple


@dataclass(frozen=True)
class Internal:
    """Routes ``x[feature_index] < threshold`` left, everything else right."""

    feature_index: int
    threshold: float
    left: object
    right: object
    class_counts: tuple


@dataclass(frozen=True)
class TreeConfig:
    max_depth: int | None = None
    min_samples_split: int = 2
    # None scans features in index order; an int scans them in a seeded
    # random order, so impurity ties go to whichever feature comes first.
    seed: int | None = None

    def __post_init__(self):
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be at least 2")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be non-negative")


def gini(class_counts):
    n0, n1 = class_counts
    if n0 < 0 or n1 < 0:
        raise ValueError("class counts must be non-negative")
    total = n0 + n1
    if total == 0:
        raise ValueError("Gini impurity of an empty node is undefined")
    p0, p1 = n0 / total, n1 / total
    return 1.0 - p0 * p0 - p1 * p1


def _majority(counts):
    return 1 if counts[1] > counts[0] else 0


def midpoint(lo, hi):
    mid = lo / 2.0 + hi / 2.0
    # adjacent floats: the midpoint can round onto lo, which would route lo right
    if not lo < mid:
        mid = hi
    return mid


def find_best_split(X, y, feature_order=None):
    """Best ``(weighted_gini, feature, threshold)`` for one node, or ``None``.

    ``X`` and ``y`` hold only the node's rows.
    """
    n, d = X.shape
    order_f = range(d) if feature_order is None else feature_order
    labels_u8 = y.astype(np.uint8)
    best = None
    for f in order_f:
        col = X[:, f]
        order = np.argsort(col, kind="stable")
        values = np.ascontiguousarray(col[order])
        k, imp = kernels.best_gini_cut_sorted(values, np.ascontiguousarray(labels_u8[order]))
        if k < 0:
            continue
        if best is None or imp < best[0]:
            best = (imp, f, midpoint(values[k], values[k + 1]))
    return best


def fit_tree(dataset, config=TreeConfig()):
    """Grow a tree on ``dataset`` until leaves are pure or a limit is hit."""
    if dataset.n_rows == 0:
        raise DataError("cannot fit a tree on an empty dataset")
    X = np.ascontiguousarray(dataset.features)
    y = dataset.labels
    feature_order = None
    if config.seed is not None:
        feature_order = np.random.default_rng(config.seed).permutation(X.shape[1])

    # Iterative build: records are [counts, feature, threshold, left_id, right_id].
    records = []
    stack = [(np.arange(X.shape[0]), 0, None, None)]
    while stack:
        idx, depth, parent, side = stack.pop()
        yy = y[idx]
        ones = int(yy.sum())
        counts = (idx.size - ones, ones)
        node_id = len(records)
        records.append([counts, -1, 0.0, -1, -1])
        if parent is not None:
            records[parent][3 if side == "left" else 4] = node_id
        split = None
        if (
            counts[0] and counts[1]
            and idx.size >= config.min_samples_split
            and (config.max_depth is None or depth < config.max_depth)
        ):
            split = find_best_split(X[idx], yy, feature_order)
        if split is None:
            continue
        _, f, thr = split
        go_left = X[idx, f] < thr
        records[node_id][1] = f
        records[node_id][2] = thr
        # right pushed first so the left subtree is built first (stable ids)
        stack.append((idx[~go_left], depth + 1, node_id, "right"))
        stack.append((idx[go_left], depth + 1, node_id, "left"))

    nodes = [None] * len(records)
    for node_id in range(len(records) - 1, -1, -1):
        counts, f, thr, left, right = records[node_id]
        if f < 0:
            nodes[node_id] = Leaf(_majority(counts), counts)
        else:
            nodes[node_id] = Internal(int(f), float(thr), nodes[left], nodes[right], counts)
    return nodes[0]


def _n_features_needed(tree):
    deepest = -1
    stack = [tree]
    while stack:
        node = stack.pop()
        if isinstance(node, Internal):
            deepest = max(deepest, node.feature_index)
            stack.extend((node.left, node.right))
    return deepest + 1


def predict(tree, features):
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("predict takes a single feature vector; use predict_many for batches")
    if x.shape[0] < _n_features_needed(tree):
        raise ValueError(f"tree tests feature {_n_features_needed(tree) - 1}, vector has {x.shape[0]}")
    node = tree
    while isinstance(node, Internal):
        node = node.left if x[node.feature_index] < node.threshold else node.right
    return node.predicted_label


def predict_many(tree, X, n_features=None):
    """Vectorised :func:`predict` over the rows of ``X``."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("predict_many expects a 2-D matrix")
    if n_features is not None and X.shape[1] != n_features:
        raise ValueError(f"expected {n_features} features, got {X.shape[1]}")
    if X.shape[1] < _n_features_needed(tree):
        raise ValueError("matrix has fewer columns than the tree tests")
    out = np.empty(X.shape[0], dtype=np.int64)
    stack = [(tree, np.arange(X.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if idx.size == 0:
            continue
        if isinstance(node, Leaf):
            out[idx] = node.predicted_label
            continue
        go_left = X[idx, node.feature_index] < node.threshold
        stack.append((node.left, idx[go_left]))
        stack.append((node.right, idx[~go_left]))
    return out


def depth(tree):
    best = 0
    stack = [(tree, 0)]
    while stack:
        node, d = stack.pop()
        best = max(best, d)
        if isinstance(node, Internal):
            stack.extend(((node.left, d + 1), (node.right, d + 1)))
    return best


def leaves(tree):
    found = []
    stack = [tree]
    while stack:
        node = stack.pop()
        if isinstance(node, Leaf):
            found.append(node)
        else:
            stack.extend((node.right, node.left))
    return found


def export_text(tree, feature_names=None, decimals=4):
    """Indented text rendering, one line per branch and per leaf."""
    lines = []
    stack = [(tree, 0)]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            lines.append(item)
            continue
        node, level = item
        pad = "|   " * level + "|--- "
        if isinstance(node, Leaf):
            lines.append(f"{pad}class: {node.predicted_label} {list(node.class_counts)}")
            continue
        name = feature_names[node.feature_index] if feature_names else f"feature_{node.feature_index}"
        thr = f"{node.threshold:.{decimals}f}"
        stack.append((node.right, level + 1))
        stack.append(f"{pad}{name} >= {thr}")
        stack.append((node.left, level + 1))
        stack.append(f"{pad}{name} <  {thr}")
    return "\n".join(lines)
