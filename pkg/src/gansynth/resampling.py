"""Minority oversampling (SMOTE and a perturbed-SMOTE ADASYN) and undersampling.

ADASYN here is SMOTE whose synthetic points receive a small uniform random
offset, then get clamped to [0, 1]; it is not the density-weighted variant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import DataError, Dataset, concat


@dataclass(frozen=True)
class ResampleRequest:
    dataset: Dataset
    minority_label: int
    target_count: int
    k_neighbors: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.minority_label not in (0, 1):
            raise ValueError("minority label must be 0 or 1")
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be at least 1")
        current = self.minority_count
        if current < 2:
            raise DataError(f"minority class has {current} samples; need at least 2")
        if self.k_neighbors >= current:
            raise ValueError(f"k_neighbors={self.k_neighbors} needs more than {current} minority rows")
        if self.target_count < current:
            raise ValueError(f"target count {self.target_count} is below the current {current}")

    @property
    def minority_count(self):
        return int(np.count_nonzero(self.dataset.labels == self.minority_label))

    @classmethod
    def to_parity(cls, dataset, k_neighbors=5, seed=0):
        """Request that grows the smaller class to the size of the larger one."""
        neg, pos = dataset.counts()
        minority = 1 if pos <= neg else 0
        return cls(dataset, minority, max(neg, pos), k_neighbors, seed)


def _sq_distances_from(points, query):
    diff = points - points[query]
    return np.einsum("ij,ij->i", diff, diff)


def knn_same_class(points, query_index, k):
    """Indices of the ``k`` rows nearest to row ``query_index`` (itself excluded).

    Euclidean distance; ties go to the lower row index.
    """
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    if k < 1 or k >= n:
        raise ValueError(f"k must lie in [1, {n - 1}] for {n} points, got {k}")
    d = _sq_distances_from(points, query_index)
    d[query_index] = np.inf
    order = np.argsort(d, kind="stable")
    return order[:k]


def _neighbor_table(points, k):
    n = points.shape[0]
    table = np.empty((n, k), dtype=np.intp)
    for i in range(n):
        table[i] = knn_same_class(points, i, k)
    return table


def _interpolate(points, count, k, rng):
    table = _neighbor_table(points, k)
    base = rng.integers(0, points.shape[0], size=count)
    pick = rng.integers(0, k, size=count)
    gap = rng.random(count)
    neighbor = table[base, pick]
    synth = points[base] + gap[:, None] * (points[neighbor] - points[base])
    return synth, base, neighbor, gap


def _append_minority(request, synth):
    extra = Dataset(
        request.dataset.feature_names,
        synth,
        np.full(synth.shape[0], request.minority_label, dtype=np.int64),
        request.dataset.label_name,
        request.dataset.scaling_params,
    )
    return concat(request.dataset, extra)


def _smote_draws(request, rng):
    minority = request.dataset.features[request.dataset.labels == request.minority_label]
    count = request.target_count - request.minority_count
    if count == 0:
        no_idx = np.empty(0, dtype=np.intp)
        return np.empty((0, minority.shape[1])), no_idx, no_idx, np.empty(0)
    return _interpolate(minority, count, request.k_neighbors, rng)


def smote_points(request):
    """The synthetic minority rows SMOTE would append, with their provenance.

    Returns ``(points, base_index, neighbor_index, gap)``; indices refer to
    the minority rows in dataset order.
    """
    return _smote_draws(request, np.random.default_rng(request.seed))


def smote(request):
    """Original rows followed by ``target_count - minority_count`` SMOTE rows."""
    synth, _, _, _ = smote_points(request)
    if synth.shape[0] == 0:
        return request.dataset
    return _append_minority(request, synth)


def adasyn(request, bias_scale=0.01):
    """SMOTE rows plus i.i.d. uniform offsets in ``[-bias_scale, bias_scale]``, clamped to [0, 1]."""
    if bias_scale < 0:
        raise ValueError("bias_scale must be non-negative")
    rng = np.random.default_rng(request.seed)
    synth, _, _, _ = _smote_draws(request, rng)
    if synth.shape[0] == 0:
        return request.dataset
    offset = rng.uniform(-bias_scale, bias_scale, size=synth.shape)
    return _append_minority(request, np.clip(synth + offset, 0.0, 1.0))


def undersample_majority(dataset, seed):
    """Balanced, shuffled subset: all minority rows and as many random majority rows."""
    neg, pos = dataset.counts()
    if neg == 0 or pos == 0:
        raise DataError("undersampling needs both classes present")
    minority = 1 if pos <= neg else 0
    rng = np.random.default_rng(seed)
    min_idx = np.nonzero(dataset.labels == minority)[0]
    maj_idx = np.nonzero(dataset.labels != minority)[0]
    chosen = rng.choice(maj_idx, size=min_idx.size, replace=False)
    keep = np.concatenate([min_idx, chosen])
    return dataset.take(rng.permutation(keep))
