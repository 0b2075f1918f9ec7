import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gansynth import evaluation as E

from .conftest import make_dataset


def _brute_counts(pred, truth):
    tp = fp = tn = fn = 0
    for p, t in zip(pred, truth):
        if p == 1 and t == 1:
            tp += 1
        elif p == 1:
            fp += 1
        elif t == 0:
            tn += 1
        else:
            fn += 1
    return tp, fp, tn, fn


pairs = st.integers(1, 60).flatmap(
    lambda n: st.tuples(st.lists(st.integers(0, 1), min_size=n, max_size=n),
                        st.lists(st.integers(0, 1), min_size=n, max_size=n)))


@given(pairs)
def test_metrics_match_brute_force_counter(pair):
    pred, truth = pair
    r = E.classification_metrics(pred, truth)
    tp, fp, tn, fn = _brute_counts(pred, truth)
    assert (r.tp, r.fp, r.tn, r.fn) == (tp, fp, tn, fn)
    assert r.n == len(pred)
    assert r.accuracy == pytest.approx((tp + tn) / len(pred))
    if tp + fp:
        assert r.precision == pytest.approx(tp / (tp + fp)) and not r.precision_undefined
    else:
        assert r.precision == 0.0 and r.precision_undefined
    if tp + fn:
        assert r.recall == pytest.approx(tp / (tp + fn)) and not r.recall_undefined
    else:
        assert r.recall == 0.0 and r.recall_undefined
    assert sum(r.label_proportion) == pytest.approx(100.0)
    assert r.label_proportion[1] == pytest.approx(100.0 * sum(pred) / len(pred))


def test_metric_examples():
    r = E.classification_metrics([1, 1, 0, 0], [1, 0, 0, 1])
    assert (r.accuracy, r.precision, r.recall) == (0.5, 0.5, 0.5)
    r = E.classification_metrics([0, 0], [0, 0])
    assert r.accuracy == 1.0 and r.precision_undefined and r.recall_undefined


def test_metric_errors():
    with pytest.raises(ValueError):
        E.classification_metrics([0, 1], [0])
    with pytest.raises(ValueError):
        E.classification_metrics([], [])
    with pytest.raises(ValueError):
        E.classification_metrics([2], [1])


def test_label_proportion():
    ds = make_dataset(np.zeros((4, 1)), [0, 1, 1, 1])
    assert E.label_proportion(ds) == (25.0, 75.0)
    with pytest.raises(ValueError):
        E.label_proportion(np.array([]))


def test_nn_distance_against_brute_force():
    rng = np.random.default_rng(0)
    a, b = rng.random((25, 4)), rng.random((40, 4))
    expected = [min(np.linalg.norm(x - y) for y in b) for x in a]
    np.testing.assert_allclose(E.nn_distances(a, b), expected, rtol=1e-12)


def test_nn_distance_includes_label_and_zero_for_copies():
    ds = make_dataset([[0.1, 0.2], [0.5, 0.5]], [0, 1])
    assert E.mean_nn_distance(ds, ds) == (0.0, 0.0)
    flipped = ds.replace(labels=[1, 0])
    d = E.nn_distances(flipped, ds)
    assert np.all(d > 0)
    with pytest.raises(ValueError):
        E.nn_distances(np.ones((2, 3)), np.ones((2, 2)))


def test_aggregate_mean_and_sample_std():
    reports = [E.classification_metrics(p, [1, 0, 1, 0]) for p in ([1, 0, 1, 0], [1, 1, 1, 1], [0, 0, 0, 0])]
    stats = E.aggregate(reports)
    acc = [1.0, 0.5, 0.5]
    assert stats.n == 3
    assert stats.mean["accuracy"] == pytest.approx(np.mean(acc))
    assert stats.std["accuracy"] == pytest.approx(np.std(acc, ddof=1))
    assert stats.flags["precision_undefined"] == 1


def test_aggregate_single_sample_has_zero_std():
    stats = E.aggregate([E.classification_metrics([1, 0], [1, 1])])
    assert stats.single_sample and all(v == 0.0 for v in stats.std.values())
    with pytest.raises(ValueError):
        E.aggregate([])


@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=30))
def test_aggregate_values_matches_numpy(values):
    mean, std = E.aggregate_values(values)
    assert mean == pytest.approx(np.mean(values), abs=1e-9)
    assert std == pytest.approx(np.std(values, ddof=1), abs=1e-6)
    assert math.isfinite(std)
