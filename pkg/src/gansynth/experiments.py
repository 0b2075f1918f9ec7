"""Experiment drivers: synthetic-data fidelity and oversampling comparisons.

Experiment 1 trains a GAN on the training subset, synthesizes a training-
sized dataset, fits a tree on it and scores the tree on the real test rows.
Experiment 2 grows the minority class of the training subset to parity
(GAN, SMOTE, ADASYN or nothing) and scores on an imbalanced and a balanced
test set.

Runs are seeded through :func:`seed_plan`; a run whose training diverges is
discarded and retried with a shifted seed, and the discards are reported.
"""

from __future__ import annotations

import datetime as _dt
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import data as D
from . import evaluation as E
from . import gan
from . import resampling as R
from . import tree as T

EXP1_ARCHITECTURES = ("256/512/1024", "256/512", "256", "128/256/512", "128/256", "128")
EXP2_ARCHITECTURES = ("128", "256", "128/256", "256/512")
EXP1_REPETITIONS = 20
EXP2_REPETITIONS = 5
METHODS = ("none", "smote", "adasyn", "gan")

SEED_STRIDE = 10_000  # repetitions per architecture slot
RESEED_STRIDE = 1_000_000  # shift per retry; above every first-attempt seed
MAX_ROW_SLOTS = RESEED_STRIDE // SEED_STRIDE


def seed_plan(base_seed, architecture_index, repetition_index):
    """Per-run seed ``base_seed + 10000 * architecture_index + repetition_index``.

    Injective while ``repetition_index < 10000``.
    """
    if not 0 <= repetition_index < SEED_STRIDE:
        raise ValueError(f"repetition index must lie in [0, {SEED_STRIDE})")
    if architecture_index < 0:
        raise ValueError("architecture index must be non-negative")
    return base_seed + SEED_STRIDE * architecture_index + repetition_index


def retry_seed(planned_seed, attempt):
    """Seed for retry ``attempt`` (0 is the planned seed itself)."""
    return planned_seed + RESEED_STRIDE * attempt


@dataclass
class ExperimentSpec:
    dataset_path: str
    label_column: str
    label_mapping: dict = field(default_factory=dict)
    architectures: list = field(default_factory=lambda: [gan.parse_architecture(a) for a in EXP1_ARCHITECTURES])
    repetitions: int = EXP1_REPETITIONS
    epochs: int = 1500
    base_seed: int = 0
    output_dir: str = "results"
    drop_columns: tuple = ()
    majority_cap: int | None = None
    train_fraction: float = 0.7
    max_attempts: int = 5
    jobs: int = 1
    gan_options: dict = field(default_factory=dict)  # extra GanConfig fields
    dataset_name: str | None = None

    def __post_init__(self):
        self.architectures = [
            gan.parse_architecture(a) if isinstance(a, str) else tuple(int(s) for s in a)
            for a in self.architectures
        ]
        if not self.architectures:
            raise ValueError("at least one architecture is required")
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        if self.repetitions > SEED_STRIDE:
            raise ValueError(f"at most {SEED_STRIDE} repetitions are supported")
        if len(self.architectures) + 2 > MAX_ROW_SLOTS:
            raise ValueError(f"at most {MAX_ROW_SLOTS - 2} architectures are supported")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be at least 1")
        if self.majority_cap is not None and self.majority_cap < 1:
            raise ValueError("majority cap must be positive")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")
        bad = set(self.gan_options) - set(gan.GanConfig.__dataclass_fields__)
        if bad or {"hidden_sizes", "epochs", "seed"} & set(self.gan_options):
            raise ValueError(f"gan_options may not set {sorted(bad | ({'hidden_sizes', 'epochs', 'seed'} & set(self.gan_options)))}")

    @property
    def name(self):
        return self.dataset_name or Path(self.dataset_path).stem

    def gan_config(self, hidden_sizes, seed):
        return gan.GanConfig(hidden_sizes=tuple(hidden_sizes), epochs=self.epochs, seed=seed,
                             **self.gan_options)


def load_dataset(spec):
    """Read, optionally cap the majority class, and min-max scale."""
    ds = D.load_csv(spec.dataset_path, spec.label_column, spec.label_mapping, spec.drop_columns)
    if spec.majority_cap is not None:
        ds = D.cap_majority(ds, spec.majority_cap, spec.base_seed)
    return D.minmax_scale(ds)


# -- single runs -------------------------------------------------------------

@dataclass
class GanRun:
    seed: int | None  # seed of the accepted attempt, None if every attempt diverged
    planned_seed: int
    discarded: int
    synthetic: D.Dataset | None
    log: gan.TrainingLog | None

    @property
    def failed(self):
        return self.synthetic is None


def train_and_synthesize(train, config_for_seed, planned_seed, n_rows, max_attempts,
                         train_fn=None):
    """Train with reseed-on-divergence, then synthesize ``n_rows`` rows."""
    train_fn = gan.train_gan if train_fn is None else train_fn
    discarded = 0
    log = None
    for attempt in range(max_attempts):
        seed = retry_seed(planned_seed, attempt)
        seq = np.random.SeedSequence(seed)
        train_seq, synth_seq = seq.spawn(2)
        config = config_for_seed(seed)
        model, log = train_fn(train, config, rng=np.random.default_rng(train_seq))
        if log.diverged:
            discarded += 1
            continue
        synthetic = gan.synthesize(model, n_rows, np.random.default_rng(synth_seq))
        return GanRun(seed, planned_seed, discarded, synthetic, log)
    return GanRun(None, planned_seed, discarded, None, log)


def fit_and_score(train, tests):
    model = T.fit_tree(train)
    return [E.classification_metrics(T.predict_many(model, t.features), t.labels) for t in tests]


@dataclass
class Exp1Task:
    arch_index: int
    rep: int
    hidden: tuple
    train: D.Dataset
    test: D.Dataset
    spec: ExperimentSpec
    train_fn: object = None


@dataclass
class Exp1Outcome:
    arch_index: int
    rep: int
    planned_seed: int
    seed: int | None
    discarded: int
    report: E.ClassificationReport | None = None
    label_proportion: tuple | None = None
    nn_mean: float | None = None
    nn_std: float | None = None
    nn_min: float | None = None  # zero means a training row was copied


def _run_exp1_task(task):
    spec = task.spec
    planned = seed_plan(spec.base_seed, task.arch_index, task.rep)
    run = train_and_synthesize(
        task.train, lambda s: spec.gan_config(task.hidden, s), planned,
        task.train.n_rows, spec.max_attempts, task.train_fn,
    )
    out = Exp1Outcome(task.arch_index, task.rep, planned, run.seed, run.discarded)
    if run.failed:
        return out
    (out.report,) = fit_and_score(run.synthetic, [task.test])
    out.label_proportion = E.label_proportion(run.synthetic)
    d = E.nn_distances(run.synthetic, task.train)
    out.nn_mean, out.nn_std, out.nn_min = float(d.mean()), float(d.std()), float(d.min())
    return out


def _map(fn, tasks, jobs):
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


# -- report writing ------------------------------------------------------------

def _fmt(value):
    if value is None:
        return "diverged"
    if isinstance(value, float):
        if not math.isfinite(value):
            return "nan"
        return f"{value:.6f}"
    return str(value)


def _write_table(path, header, rows, provenance):
    lines = [D.format_provenance(provenance), ",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _text_table(title, header, rows):
    cells = [[str(h) for h in header]] + [[_fmt(v) for v in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    fmt = lambda r: "  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip()
    return "\n".join([title, fmt(cells[0]), fmt(["-" * w for w in widths])] + [fmt(r) for r in cells[1:]])


def _provenance(spec, experiment, extra=None, timestamp=True):
    prov = {}
    if timestamp:
        prov["generated"] = _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    prov.update({
        "experiment": experiment,
        "dataset": spec.name,
        "repetitions": spec.repetitions,
        "epochs": spec.epochs,
        "base_seed": spec.base_seed,
    })
    if spec.majority_cap is not None:
        prov["majority_cap"] = spec.majority_cap
    prov.update(extra or {})
    return prov


def _arch_slug(hidden):
    return gan.architecture_name(hidden).replace("/", "-")


def _metric_cells(stats):
    if stats is None:
        return [None] * (2 * len(E.METRICS))
    cells = []
    for m in E.METRICS:
        cells += [stats.mean[m], stats.std[m]]
    return cells


METRIC_HEADER = [f"{m}_{s}" for m in E.METRICS for s in ("mean", "std")]


@dataclass
class ExperimentResult:
    files: dict  # table name -> path
    tables: dict  # table name -> (header, rows)
    runs: list
    discarded: dict  # row label -> discard count


# -- experiment 1 --------------------------------------------------------------

def run_experiment1(spec, train_fn=None, timestamp=True):
    """Train-on-synthetic, test-on-real comparison across architectures.

    Writes metrics, label-proportion, nearest-neighbour-distance and
    per-run tables (CSV) plus a combined text report to ``spec.output_dir``.
    """
    ds = load_dataset(spec)
    split = D.split_sequential(ds, spec.train_fraction)
    train, test = split.train, split.test

    (baseline,) = fit_and_score(train, [test])
    base_stats = E.aggregate([baseline])

    tasks = [
        Exp1Task(a, r, hidden, train, test, spec, train_fn)
        for a, hidden in enumerate(spec.architectures)
        for r in range(spec.repetitions)
    ]
    outcomes = sorted(_map(_run_exp1_task, tasks, spec.jobs), key=lambda o: (o.arch_index, o.rep))

    metric_rows = [["original", 1, 0, 0] + _metric_cells(base_stats)]
    prop_rows = [["original", 1] + [v for p in E.label_proportion(train) for v in (p, 0.0)]]
    nn_rows = []
    run_rows = []
    discarded = {}
    for a, hidden in enumerate(spec.architectures):
        name = gan.architecture_name(hidden)
        mine = [o for o in outcomes if o.arch_index == a]
        ok = [o for o in mine if o.report is not None]
        n_disc = sum(o.discarded for o in mine)
        n_fail = len(mine) - len(ok)
        discarded[name] = n_disc
        stats = E.aggregate([o.report for o in ok]) if ok else None
        metric_rows.append([name, len(ok), n_disc, n_fail] + _metric_cells(stats))
        if ok:
            p0 = E.aggregate_values([o.label_proportion[0] for o in ok])
            p1 = E.aggregate_values([o.label_proportion[1] for o in ok])
            nn_m = E.aggregate_values([o.nn_mean for o in ok])
            within = E.aggregate_values([o.nn_std for o in ok])[0]
            prop_rows.append([name, len(ok), p0[0], p0[1], p1[0], p1[1]])
            nn_rows.append([name, len(ok), nn_m[0], nn_m[1], within, min(o.nn_mean for o in ok)])
        else:
            prop_rows.append([name, 0, None, None, None, None])
            nn_rows.append([name, 0, None, None, None, None])
        for o in mine:
            r = o.report
            run_rows.append([
                name, o.rep, o.planned_seed, o.seed, o.discarded,
                r.accuracy if r else None, r.precision if r else None, r.recall if r else None,
                o.label_proportion[1] if r else None, o.nn_mean, o.nn_std, o.nn_min,
            ])

    tables = {
        "metrics": (["architecture", "runs", "discarded", "failed"] + METRIC_HEADER, metric_rows),
        "label_proportion": (["architecture", "runs", "label0_pct_mean", "label0_pct_std",
                              "label1_pct_mean", "label1_pct_std"], prop_rows),
        "nn_distance": (["architecture", "runs", "mean", "std_across_runs",
                         "mean_within_run_std", "min_run_mean"], nn_rows),
        "runs": (["architecture", "repetition", "planned_seed", "seed", "discarded", "accuracy",
                  "precision", "recall", "label1_pct", "nn_mean", "nn_std", "nn_min"], run_rows),
    }
    extra = {"train_rows": train.n_rows, "test_rows": test.n_rows}
    titles = {
        "metrics": "Tree trained on synthetic data, scored on the real test subset",
        "label_proportion": "Label proportions (%) of the synthetic datasets",
        "nn_distance": "Nearest-neighbour distance from synthetic rows to the training subset",
        "runs": "Individual runs",
    }
    return _emit(spec, "exp1", tables, titles, extra, outcomes, discarded, timestamp)


def _emit(spec, experiment, tables, titles, extra, runs, discarded, timestamp):
    out_dir = Path(spec.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    prov = _provenance(spec, experiment, extra, timestamp)
    files = {}
    for key, (header, rows) in tables.items():
        path = out_dir / f"{spec.name}_{experiment}_{key}.csv"
        files[key] = _write_table(path, header, rows, prov)
    # per-architecture run files
    if "runs" in tables:
        header, rows = tables["runs"]
        for hidden in spec.architectures:
            name = gan.architecture_name(hidden)
            mine = [r for r in rows if r[0] == name]
            if mine:
                key = f"runs_{_arch_slug(hidden)}"
                path = out_dir / f"{spec.name}_{experiment}_{_arch_slug(hidden)}_runs.csv"
                files[key] = _write_table(path, header, mine, prov)
    sections = [D.format_provenance(prov)]
    for key, (header, rows) in tables.items():
        if key == "runs":
            continue
        sections.append(_text_table(titles.get(key, key), header, rows))
    sections.append("Discarded (diverged) training runs: " + ", ".join(
        f"{k}={v}" for k, v in discarded.items()))
    report = out_dir / f"{spec.name}_{experiment}_report.txt"
    report.write_text("\n\n".join(sections) + "\n", encoding="utf-8")
    files["report"] = report
    return ExperimentResult(files, tables, runs, discarded)


# -- experiment 2 --------------------------------------------------------------

@dataclass
class Exp2Task:
    method: str
    row_index: int
    rep: int
    hidden: tuple | None
    train: D.Dataset
    tests: tuple
    minority: int
    spec: ExperimentSpec
    train_fn: object = None


@dataclass
class Exp2Outcome:
    label: str
    row_index: int
    rep: int
    planned_seed: int | None
    seed: int | None
    discarded: int
    reports: tuple | None  # (imbalanced, balanced)
    train_rows: int | None = None


def _oversample_gan(task, planned):
    train, spec = task.train, task.spec
    minority_rows = D.filter_by_label(train, task.minority)
    neg, pos = train.counts()
    needed = abs(neg - pos)
    run = train_and_synthesize(
        minority_rows, lambda s: spec.gan_config(task.hidden, s), planned,
        max(needed, 1), spec.max_attempts, task.train_fn,
    )
    if run.failed:
        return None, run
    if needed == 0:
        return train, run
    # trained on one class only, so the generated label column is forced
    synth = run.synthetic.replace(labels=np.full(needed, task.minority, dtype=np.int64))
    synth = D.Dataset(train.feature_names, synth.features, synth.labels, train.label_name,
                      train.scaling_params)
    return D.concat(train, synth), run


def _run_exp2_task(task):
    spec = task.spec
    if task.method == "none":
        reports = tuple(fit_and_score(task.train, task.tests))
        return Exp2Outcome("none", task.row_index, 0, None, None, 0, reports, task.train.n_rows)
    planned = seed_plan(spec.base_seed, task.row_index, task.rep)
    if task.method == "gan":
        grown, run = _oversample_gan(task, planned)
        label = f"gan:{gan.architecture_name(task.hidden)}"
        if grown is None:
            return Exp2Outcome(label, task.row_index, task.rep, planned, None, run.discarded, None)
        reports = tuple(fit_and_score(grown, task.tests))
        return Exp2Outcome(label, task.row_index, task.rep, planned, run.seed, run.discarded,
                           reports, grown.n_rows)
    neg, pos = task.train.counts()
    request = R.ResampleRequest(task.train, task.minority, max(neg, pos), seed=planned)
    grown = R.smote(request) if task.method == "smote" else R.adasyn(request)
    reports = tuple(fit_and_score(grown, task.tests))
    return Exp2Outcome(task.method, task.row_index, task.rep, planned, planned, 0, reports,
                       grown.n_rows)


def parse_methods(text):
    methods = [m.strip().lower() for m in str(text).split(",") if m.strip()]
    bad = [m for m in methods if m not in METHODS]
    if bad or not methods:
        raise ValueError(f"methods must be a subset of {','.join(METHODS)}, got {text!r}")
    return [m for m in METHODS if m in methods]


def run_experiment2(spec, methods=METHODS, train_fn=None, timestamp=True):
    """Oversampling comparison on an imbalanced and a balanced test set.

    Seed rows: GAN architecture ``i`` uses row ``i``; SMOTE and ADASYN use
    the two rows after the last architecture.
    """
    methods = parse_methods(",".join(methods)) if not isinstance(methods, str) else parse_methods(methods)
    ds = load_dataset(spec)
    split = D.split_sequential(ds, spec.train_fraction)
    train, test = split.train, split.test
    neg, pos = train.counts()
    if neg == 0 or pos == 0:
        raise D.DataError("the training subset holds a single class; nothing to balance")
    minority = 1 if pos <= neg else 0
    balanced = R.undersample_majority(test, spec.base_seed)
    tests = (test, balanced)

    n_arch = len(spec.architectures)
    tasks = []
    if "none" in methods:
        tasks.append(Exp2Task("none", 0, 0, None, train, tests, minority, spec, train_fn))
    for offset, m in enumerate(("smote", "adasyn")):
        if m in methods:
            tasks += [Exp2Task(m, n_arch + offset, r, None, train, tests, minority, spec, train_fn)
                      for r in range(spec.repetitions)]
    if "gan" in methods:
        tasks += [Exp2Task("gan", a, r, hidden, train, tests, minority, spec, train_fn)
                  for a, hidden in enumerate(spec.architectures) for r in range(spec.repetitions)]
    outcomes = _map(_run_exp2_task, tasks, spec.jobs)

    labels = []
    for o in outcomes:
        if o.label not in labels:
            labels.append(o.label)
    rows = {0: [], 1: []}
    run_rows = []
    discarded = {}
    for label in labels:
        mine = sorted((o for o in outcomes if o.label == label), key=lambda o: o.rep)
        ok = [o for o in mine if o.reports is not None]
        n_disc = sum(o.discarded for o in mine)
        discarded[label] = n_disc
        for t in (0, 1):
            stats = E.aggregate([o.reports[t] for o in ok]) if ok else None
            rows[t].append([label, len(ok), n_disc, len(mine) - len(ok)] + _metric_cells(stats))
        for o in mine:
            cells = [label, o.rep, o.planned_seed, o.seed, o.discarded, o.train_rows]
            for t in (0, 1):
                r = o.reports[t] if o.reports else None
                cells += [r.accuracy if r else None, r.precision if r else None, r.recall if r else None]
            run_rows.append(cells)

    header = ["method", "runs", "discarded", "failed"] + METRIC_HEADER
    tables = {
        "imbalanced_test": (header, rows[0]),
        "balanced_test": (header, rows[1]),
        "runs": (["method", "repetition", "planned_seed", "seed", "discarded", "train_rows"]
                 + [f"{t}_{m}" for t in ("imbalanced", "balanced") for m in E.METRICS], run_rows),
    }
    extra = {
        "rows": ds.n_rows, "train_rows": train.n_rows, "test_rows": test.n_rows,
        "balanced_test_rows": balanced.n_rows, "minority_label": minority,
        "methods": "/".join(methods),
    }
    titles = {
        "imbalanced_test": "Scores on the original (imbalanced) test subset",
        "balanced_test": "Scores on the undersampled balanced test subset",
    }
    if spec.majority_cap is not None:
        titles = {k: f"{v} (majority capped at {spec.majority_cap} rows)" for k, v in titles.items()}
    return _emit(spec, "exp2", tables, titles, extra, outcomes, discarded, timestamp)
