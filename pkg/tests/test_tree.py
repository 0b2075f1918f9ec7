import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gansynth import tree as T
from gansynth.data import DataError

from .conftest import make_dataset


def _weighted_gini(y, mask):
    n = len(y)
    total = 0.0
    for part in (y[mask], y[~mask]):
        total += len(part) / n * T.gini((int(np.sum(part == 0)), int(np.sum(part == 1))))
    return total


def _exhaustive_best(X, y):
    best = np.inf
    for f in range(X.shape[1]):
        values = np.unique(X[:, f])
        for lo, hi in zip(values[:-1], values[1:]):
            best = min(best, _weighted_gini(y, X[:, f] < T.midpoint(lo, hi)))
    return best


def test_gini_values():
    assert T.gini((5, 5)) == pytest.approx(0.5)
    assert T.gini((4, 0)) == 0.0
    with pytest.raises(ValueError):
        T.gini((0, 0))


@given(
    n=st.integers(2, 9),
    d=st.integers(1, 3),
    seed=st.integers(0, 10_000),
)
def test_root_split_is_optimal_over_all_thresholds(n, d, seed):
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 4, size=(n, d)).astype(float)
    y = rng.integers(0, 2, size=n)
    found = T.find_best_split(X, y)
    best = _exhaustive_best(X, y)
    if not np.isfinite(best):
        assert found is None
        return
    imp, f, thr = found
    assert imp == pytest.approx(best, abs=1e-12)
    assert _weighted_gini(y, X[:, f] < thr) == pytest.approx(best, abs=1e-12)


def test_exhaustive_all_labelings_of_five_points():
    X = np.array([[0.0], [1.0], [1.0], [2.0], [3.0]])
    for labels in itertools.product([0, 1], repeat=5):
        y = np.array(labels)
        found = T.find_best_split(X, y)
        best = _exhaustive_best(X, y)
        assert found is not None
        assert found[0] == pytest.approx(best, abs=1e-12)


@given(seed=st.integers(0, 5000), n=st.integers(2, 40))
def test_unlimited_tree_fits_consistent_training_data(seed, n):
    rng = np.random.default_rng(seed)
    X = rng.random((n, 3))
    y = rng.integers(0, 2, n)
    tree = T.fit_tree(make_dataset(X, y))
    np.testing.assert_array_equal(T.predict_many(tree, X), y)
    for leaf in T.leaves(tree):
        assert min(leaf.class_counts) == 0


def test_duplicate_rows_with_conflicting_labels_stop():
    X = np.array([[0.5], [0.5], [0.5]])
    tree = T.fit_tree(make_dataset(X, [0, 1, 1]))
    assert isinstance(tree, T.Leaf)
    assert tree.predicted_label == 1 and tree.class_counts == (1, 2)


def test_majority_tie_prefers_zero():
    tree = T.fit_tree(make_dataset([[0.5], [0.5]], [1, 0]))
    assert tree.predicted_label == 0


def test_threshold_routing_and_predict():
    tree = T.fit_tree(make_dataset([[0.0], [1.0], [2.0], [3.0]], [0, 0, 1, 1]))
    assert isinstance(tree, T.Internal)
    assert tree.threshold == pytest.approx(1.5)
    assert T.predict(tree, [1.4999]) == 0
    assert T.predict(tree, [1.5]) == 1
    with pytest.raises(ValueError):
        T.predict(tree, [])
    with pytest.raises(ValueError):
        T.predict_many(tree, np.ones((2, 2)), n_features=1)


def test_midpoint_of_adjacent_floats_separates():
    lo = 1.0
    hi = np.nextafter(1.0, 2.0)
    thr = T.midpoint(lo, hi)
    assert lo < thr <= hi


def test_max_depth_and_min_samples():
    rng = np.random.default_rng(0)
    X = rng.random((60, 2))
    y = (X[:, 0] + X[:, 1] > 1).astype(int) ^ (rng.random(60) < 0.2)
    ds = make_dataset(X, y)
    assert T.depth(T.fit_tree(ds, T.TreeConfig(max_depth=2))) <= 2
    assert T.depth(T.fit_tree(ds, T.TreeConfig(max_depth=0))) == 0
    big = T.fit_tree(ds, T.TreeConfig(min_samples_split=30))
    for leaf in T.leaves(big):
        assert sum(leaf.class_counts) < 30 or min(leaf.class_counts) == 0
    with pytest.raises(ValueError):
        T.TreeConfig(min_samples_split=1)


def test_seeded_feature_order_changes_only_ties():
    X = np.array([[0.0, 0.0], [1.0, 1.0]])  # both features split perfectly
    a = T.fit_tree(make_dataset(X, [0, 1]))
    assert a.feature_index == 0
    picks = {T.fit_tree(make_dataset(X, [0, 1]), T.TreeConfig(seed=s)).feature_index for s in range(20)}
    assert picks == {0, 1}


def test_empty_dataset_error():
    with pytest.raises(DataError):
        T.fit_tree(make_dataset(np.empty((0, 2)), np.empty(0, int)))


def test_matches_sklearn_unpruned_tree_accuracy():
    sklearn = pytest.importorskip("sklearn.tree")
    rng = np.random.default_rng(4)
    X = rng.random((200, 4))
    y = ((X[:, 0] > 0.4) & (X[:, 2] < 0.7)).astype(int)
    Xt = rng.random((300, 4))
    yt = ((Xt[:, 0] > 0.4) & (Xt[:, 2] < 0.7)).astype(int)
    ours = T.predict_many(T.fit_tree(make_dataset(X, y)), Xt)
    ref = sklearn.DecisionTreeClassifier(random_state=0).fit(X, y).predict(Xt)
    # noiseless axis-aligned target: both should be near perfect
    assert np.mean(ours == yt) > 0.95 and np.mean(ref == yt) > 0.95


def test_export_text_lists_every_leaf():
    tree = T.fit_tree(make_dataset([[0.0], [1.0], [2.0]], [0, 1, 0]))
    text = T.export_text(tree, ["x"])
    assert text.count("class:") == len(T.leaves(tree))
    assert "x <  " in text
