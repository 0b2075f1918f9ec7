import itertools
import math

import numpy as np
import pytest

from gansynth import data as D
from gansynth import evaluation as E
from gansynth import experiments as X
from gansynth import gan
from gansynth import tree as T

from .conftest import write_toy_csv


def _spec(path, out, **kw):
    base = dict(
        dataset_path=str(path), label_column="cls", label_mapping={"N": 0, "P": 1},
        architectures=["8", "8/16"], repetitions=2, epochs=3, base_seed=42,
        output_dir=str(out), drop_columns=("id",),
        gan_options={"latent_dim": 4},
    )
    base.update(kw)
    return X.ExperimentSpec(**base)


def test_seed_plan_examples():
    assert X.seed_plan(42, 0, 0) == 42
    assert X.seed_plan(42, 1, 3) == 10045
    with pytest.raises(ValueError):
        X.seed_plan(0, 0, 10_000)


def test_seed_plan_injective_over_a_spec():
    seeds = [X.seed_plan(7, a, r) for a in range(6) for r in range(20)]
    retries = [X.retry_seed(s, k) for s in seeds for k in range(5)]
    assert len(set(seeds)) == len(seeds)
    assert len(set(retries)) == len(retries)
    # a spec at its limits too
    seeds = {X.seed_plan(0, a, r) for a, r in itertools.product(range(X.MAX_ROW_SLOTS), range(0, 10_000, 97))}
    assert len(seeds) == X.MAX_ROW_SLOTS * len(range(0, 10_000, 97))


def test_spec_validation(tmp_path):
    with pytest.raises(ValueError):
        _spec("x.csv", tmp_path, repetitions=0)
    with pytest.raises(ValueError):
        _spec("x.csv", tmp_path, architectures=[])
    with pytest.raises(ValueError):
        _spec("x.csv", tmp_path, gan_options={"epochs": 3})
    with pytest.raises(ValueError):
        _spec("x.csv", tmp_path, gan_options={"nonsense": 1})


def _strip_provenance(path):
    return [line for line in path.read_text().splitlines() if not line.startswith("#")]


def test_exp1_full_run_determinism(tmp_path):
    """Identical specs write identical reports apart from the timestamp header."""
    csv = write_toy_csv(tmp_path / "toy.csv", n=50)
    spec_kw = dict(repetitions=2, epochs=50)
    a = X.run_experiment1(_spec(csv, tmp_path / "a", **spec_kw))
    b = X.run_experiment1(_spec(csv, tmp_path / "b", **spec_kw))
    assert set(a.files) == set(b.files)
    for key in a.files:
        assert _strip_provenance(a.files[key]) == _strip_provenance(b.files[key]), key
    no_stamp = X.run_experiment1(_spec(csv, tmp_path / "c", **spec_kw), timestamp=False)
    assert a.files["metrics"].read_text().split("\n", 1)[1] == no_stamp.files["metrics"].read_text().split("\n", 1)[1]
    assert "generated=" not in no_stamp.files["metrics"].read_text()


def test_exp1_tables_complete_and_sized(tmp_path):
    csv = write_toy_csv(tmp_path / "toy.csv", n=60)
    result = X.run_experiment1(_spec(csv, tmp_path / "o"))
    header, rows = result.tables["metrics"]
    assert [r[0] for r in rows] == ["original", "8", "8/16"]
    assert all(len(r) == len(header) for r in rows)
    assert all(v is not None for r in rows for v in r)
    for r in result.runs:
        assert r.report is not None and r.report.n == 60 - D.train_rows(60)
    for name in ("metrics", "label_proportion", "nn_distance", "runs", "runs_8", "runs_8-16", "report"):
        assert result.files[name].exists()
    assert result.files["runs_8-16"].name == "toy_exp1_8-16_runs.csv"


def test_exp1_synthetic_size_equals_train_size(tmp_path, monkeypatch):
    csv = write_toy_csv(tmp_path / "toy.csv", n=60)
    sizes = []
    orig = gan.synthesize

    def spy(model, n_rows, rng):
        sizes.append(n_rows)
        return orig(model, n_rows, rng)

    monkeypatch.setattr(gan, "synthesize", spy)
    X.run_experiment1(_spec(csv, tmp_path / "o"))
    assert sizes == [D.train_rows(60)] * 4


def test_exp1_single_repetition_has_zero_std(tmp_path):
    csv = write_toy_csv(tmp_path / "toy.csv")
    result = X.run_experiment1(_spec(csv, tmp_path / "o", repetitions=1))
    header, rows = result.tables["metrics"]
    std_cols = [i for i, h in enumerate(header) if h.endswith("_std")]
    assert all(rows[k][i] == 0.0 for k in range(len(rows)) for i in std_cols)


def _diverge_first_attempts(n_bad):
    """A train_fn that reports divergence for the first ``n_bad`` calls."""
    calls = {"n": 0}

    def train_fn(dataset, config, rng=None):
        calls["n"] += 1
        if calls["n"] <= n_bad:
            hook = lambda e, b, losses: (math.inf,) + tuple(losses[1:])
            return gan.train_gan(dataset, config, rng=rng, loss_hook=hook)
        return gan.train_gan(dataset, config, rng=rng)

    return train_fn


def test_exp1_reseeds_diverged_runs_and_counts_discards(tmp_path):
    csv = write_toy_csv(tmp_path / "toy.csv")
    result = X.run_experiment1(_spec(csv, tmp_path / "o", architectures=["8"]),
                               train_fn=_diverge_first_attempts(2))
    assert result.discarded == {"8": 2}
    first = result.runs[0]
    assert first.seed == X.retry_seed(first.planned_seed, 2)
    assert all(r.report is not None for r in result.runs)
    assert "8=2" in result.files["report"].read_text()


def test_exp1_all_divergent_architecture_is_reported(tmp_path):
    csv = write_toy_csv(tmp_path / "toy.csv")
    result = X.run_experiment1(_spec(csv, tmp_path / "o", architectures=["8"], max_attempts=2),
                               train_fn=_diverge_first_attempts(10**6))
    header, rows = result.tables["metrics"]
    row = rows[1]
    assert row[:4] == ["8", 0, 4, 2]
    assert row[4:] == [None] * (len(header) - 4)
    assert "diverged" in result.files["metrics"].read_text()


def test_exp2_none_equals_plain_pipeline(tmp_path):
    csv = write_toy_csv(tmp_path / "toy.csv", n=80)
    result = X.run_experiment2(_spec(csv, tmp_path / "o"), methods=["none"])
    ds = D.minmax_scale(D.load_csv(csv, "cls", {"N": 0, "P": 1}, ("id",)))
    split = D.split_sequential(ds)
    tree = T.fit_tree(split.train)
    expected = E.classification_metrics(T.predict_many(tree, split.test.features), split.test.labels)
    (row,) = result.tables["imbalanced_test"][1]
    assert row[0] == "none"
    assert row[4] == expected.accuracy and row[6] == expected.precision and row[8] == expected.recall


def test_exp2_oversamples_to_parity(tmp_path, monkeypatch):
    csv = write_toy_csv(tmp_path / "toy.csv", n=80)
    seen = []
    orig = X.fit_and_score

    def spy(train, tests):
        seen.append(train.counts())
        return orig(train, tests)

    monkeypatch.setattr(X, "fit_and_score", spy)
    result = X.run_experiment2(_spec(csv, tmp_path / "o", architectures=["8"]))
    labels = [r[0] for r in result.tables["balanced_test"][1]]
    assert labels == ["none", "smote", "adasyn", "gan:8"]
    assert seen[0][0] != seen[0][1]
    assert all(neg == pos for neg, pos in seen[1:])
    tests = result.tables["balanced_test"][1]
    assert all(r[1] >= 1 for r in tests)


def test_exp2_rejects_bad_methods(tmp_path):
    csv = write_toy_csv(tmp_path / "toy.csv")
    with pytest.raises(ValueError):
        X.run_experiment2(_spec(csv, tmp_path / "o"), methods=["magic"])


def test_majority_cap_is_reported(tmp_path):
    csv = write_toy_csv(tmp_path / "toy.csv", n=100, minority=0.2)
    result = X.run_experiment2(_spec(csv, tmp_path / "o", majority_cap=30), methods=["none", "smote"])
    text = result.files["report"].read_text()
    assert "majority_cap=30" in text and "capped at 30" in text


def test_parallel_matches_serial(tmp_path):
    csv = write_toy_csv(tmp_path / "toy.csv")
    a = X.run_experiment1(_spec(csv, tmp_path / "a", architectures=["8"]), timestamp=False)
    b = X.run_experiment1(_spec(csv, tmp_path / "b", architectures=["8"], jobs=2), timestamp=False)
    assert a.files["metrics"].read_text() == b.files["metrics"].read_text()
