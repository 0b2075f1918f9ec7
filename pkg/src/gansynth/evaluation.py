"""Classification metrics, label proportions and nearest-neighbour distances."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels

METRICS = ("accuracy", "precision", "recall")


@dataclass(frozen=True)
class ClassificationReport:
    tp: int
    fp: int
    tn: int
    fn: int
    accuracy: float
    precision: float
    recall: float
    label_proportion: tuple  # (% predicted 0, % predicted 1)
    precision_undefined: bool = False
    recall_undefined: bool = False

    @property
    def n(self):
        return self.tp + self.fp + self.tn + self.fn

    def as_dict(self):
        return {
            "tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn,
            "accuracy": self.accuracy, "precision": self.precision, "recall": self.recall,
            "precision_undefined": self.precision_undefined,
            "recall_undefined": self.recall_undefined,
        }


def _binary(values, name):
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a vector")
    if not np.all((arr == 0) | (arr == 1)):
        raise ValueError(f"{name} must contain only 0 and 1")
    return arr.astype(np.int64)


def classification_metrics(predictions, truth):
    """Confusion counts and accuracy/precision/recall with label 1 as positive.

    An undefined precision (nothing predicted positive) or recall (no actual
    positives) is reported as 0 with the matching ``*_undefined`` flag set.
    """
    pred = _binary(predictions, "predictions")
    true = _binary(truth, "truth")
    if pred.shape != true.shape:
        raise ValueError(f"{pred.size} predictions for {true.size} labels")
    if pred.size == 0:
        raise ValueError("cannot score an empty prediction vector")
    tp = int(np.sum((pred == 1) & (true == 1)))
    fp = int(np.sum((pred == 1) & (true == 0)))
    tn = int(np.sum((pred == 0) & (true == 0)))
    fn = int(np.sum((pred == 0) & (true == 1)))
    n = pred.size
    p_undef = tp + fp == 0
    r_undef = tp + fn == 0
    return ClassificationReport(
        tp, fp, tn, fn,
        accuracy=(tp + tn) / n,
        precision=0.0 if p_undef else tp / (tp + fp),
        recall=0.0 if r_undef else tp / (tp + fn),
        label_proportion=_proportion(pred),
        precision_undefined=p_undef,
        recall_undefined=r_undef,
    )


def _proportion(labels):
    labels = np.asarray(labels)
    if labels.size == 0:
        raise ValueError("label proportion of an empty set is undefined")
    ones = 100.0 * float(np.count_nonzero(labels == 1)) / labels.size
    return (100.0 - ones, ones)


def label_proportion(dataset):
    """(percent label 0, percent label 1) of a dataset or a label vector."""
    labels = dataset.labels if hasattr(dataset, "labels") else dataset
    return _proportion(labels)


def nn_distances(synthetic, original):
    """Distance from each synthetic row to its nearest original row.

    Rows include the label column. Accepts datasets or plain matrices.
    """
    a = synthetic.matrix() if hasattr(synthetic, "matrix") else np.asarray(synthetic, dtype=np.float64)
    b = original.matrix() if hasattr(original, "matrix") else np.asarray(original, dtype=np.float64)
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"column counts differ: {a.shape[1]} vs {b.shape[1]}")
    if b.shape[0] == 0:
        raise ValueError("original set is empty")
    sq, _ = kernels.nearest_sq_distances(np.ascontiguousarray(a), np.ascontiguousarray(b))
    return np.sqrt(sq)


def mean_nn_distance(synthetic, original):
    """Mean and (population) standard deviation of :func:`nn_distances`."""
    d = nn_distances(synthetic, original)
    if d.size == 0:
        raise ValueError("synthetic set is empty")
    return float(d.mean()), float(d.std())


@dataclass(frozen=True)
class AggregateStats:
    n: int
    mean: dict
    std: dict
    single_sample: bool = False
    flags: dict = field(default_factory=dict)


def _mean_std(values):
    values = [float(v) for v in values]
    n = len(values)
    mean = math.fsum(values) / n
    if n == 1:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var)


def aggregate_values(values):
    if len(values) == 0:
        raise ValueError("nothing to aggregate")
    return _mean_std(values)


def aggregate(reports, metrics=METRICS):
    """Per-metric mean and sample standard deviation over ``reports``.

    ``reports`` may be :class:`ClassificationReport` objects or mappings of
    metric name to value.
    """
    if len(reports) == 0:
        raise ValueError("nothing to aggregate")
    means, stds = {}, {}
    for m in metrics:
        values = [r[m] if isinstance(r, dict) else getattr(r, m) for r in reports]
        means[m], stds[m] = _mean_std(values)
    flags = {}
    if isinstance(reports[0], ClassificationReport):
        flags = {
            "precision_undefined": sum(r.precision_undefined for r in reports),
            "recall_undefined": sum(r.recall_undefined for r in reports),
        }
    return AggregateStats(len(reports), means, stds, len(reports) == 1, flags)
