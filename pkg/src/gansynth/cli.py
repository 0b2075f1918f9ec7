"""Command-line entry point: ``gansynth {exp1,exp2,synth,metrics}``.

Settings come from built-in defaults, then an optional JSON ``--config``
file, then command-line flags (last wins).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import data as D
from . import evaluation as E
from . import experiments as X
from . import gan
from . import tree as T

log = logging.getLogger("gansynth")

# keys accepted in a --config file, beside any GanConfig field under "gan"
CONFIG_KEYS = {
    "data", "label_col", "label_map", "arch", "reps", "epochs", "seed", "out", "methods",
    "majority_cap", "drop_col", "jobs", "max_attempts", "train_fraction", "gan", "name",
    "rows", "test", "model", "no_scale",
}


def _add_common(p, experiment):
    p.add_argument("--config", help="JSON file of settings; flags override it")
    p.add_argument("--data", help="input CSV with a header row")
    p.add_argument("--label-col", dest="label_col", help="name of the binary label column")
    p.add_argument("--label-map", dest="label_map", help="textual label encoding, e.g. B=0,M=1")
    p.add_argument("--drop-col", dest="drop_col", action="append",
                   help="column to ignore (repeatable), e.g. an id column")
    p.add_argument("--seed", type=int, help="base seed (default 0)")
    p.add_argument("--epochs", type=int, help="GAN epochs (default 1500)")
    p.add_argument("--out", help="output directory (default results)")
    p.add_argument("--majority-cap", dest="majority_cap", type=int,
                   help="keep every minority row and this many random majority rows")
    p.add_argument("--name", help="dataset name used in output file names")
    if experiment:
        p.add_argument("--arch", action="append",
                       help="hidden sizes such as 256/512 or 256,512 (repeatable)")
        p.add_argument("--reps", type=int, help="repetitions per architecture or method")
        p.add_argument("--jobs", type=int, help="parallel worker processes (default 1)")
        p.add_argument("--max-attempts", dest="max_attempts", type=int,
                       help="training attempts per run before giving up (default 5)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gansynth",
        description="Synthesize tabular data with a small GAN and score it with a decision tree.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p1 = sub.add_parser("exp1", help="synthetic-data fidelity across GAN architectures")
    _add_common(p1, True)

    p2 = sub.add_parser("exp2", help="oversampling comparison on imbalanced data")
    _add_common(p2, True)
    p2.add_argument("--methods", help=f"comma list from {','.join(X.METHODS)} (default all)")

    p3 = sub.add_parser("synth", help="train a GAN on a dataset and write synthetic rows")
    _add_common(p3, False)
    p3.add_argument("--arch", help="hidden sizes (default 256/512)")
    p3.add_argument("--rows", type=int, help="rows to generate (default: dataset size)")
    p3.add_argument("--model", help="also save the trained model as JSON here")

    p4 = sub.add_parser("metrics", help="fit a tree on a synthetic CSV and score it on real data")
    p4.add_argument("--config", help="JSON file of settings; flags override it")
    p4.add_argument("--data", help="synthetic (training) CSV")
    p4.add_argument("--test", help="real CSV to score against")
    p4.add_argument("--label-col", dest="label_col")
    p4.add_argument("--label-map", dest="label_map")
    p4.add_argument("--drop-col", dest="drop_col", action="append")
    p4.add_argument("--out", help="also write the JSON report to this file")
    p4.add_argument("--no-scale", dest="no_scale", action="store_true", default=None,
                    help="the real file is already on the synthetic file's [0,1] scale")
    return parser


def load_config(path):
    with open(path, encoding="utf-8") as handle:
        cfg = json.load(handle)
    if not isinstance(cfg, dict):
        raise ValueError(f"{path}: configuration must be a JSON object")
    unknown = set(cfg) - CONFIG_KEYS
    if unknown:
        raise ValueError(f"{path}: unknown configuration keys {sorted(unknown)}")
    return cfg


def merged_settings(args):
    settings = load_config(args.config) if getattr(args, "config", None) else {}
    for key, value in vars(args).items():
        if key in ("config", "command", "verbose") or value is None:
            continue
        settings[key] = value
    return settings


def _require(settings, *keys):
    missing = [k for k in keys if settings.get(k) in (None, "")]
    if missing:
        raise ValueError("missing required setting(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


def _label_mapping(settings):
    value = settings.get("label_map")
    if isinstance(value, dict):
        return {str(k): int(v) for k, v in value.items()}
    return D.parse_label_mapping(value)


def _as_list(value):
    if value is None:
        return None
    return value if isinstance(value, list) else [value]


def spec_from_settings(settings, experiment):
    _require(settings, "data", "label_col")
    defaults = {
        "exp1": (X.EXP1_ARCHITECTURES, X.EXP1_REPETITIONS),
        "exp2": (X.EXP2_ARCHITECTURES, X.EXP2_REPETITIONS),
    }[experiment]
    return X.ExperimentSpec(
        dataset_path=settings["data"],
        label_column=settings["label_col"],
        label_mapping=_label_mapping(settings),
        architectures=list(_as_list(settings.get("arch")) or defaults[0]),
        repetitions=int(settings.get("reps", defaults[1])),
        epochs=int(settings.get("epochs", 1500)),
        base_seed=int(settings.get("seed", 0)),
        output_dir=settings.get("out", "results"),
        drop_columns=tuple(_as_list(settings.get("drop_col")) or ()),
        majority_cap=settings.get("majority_cap"),
        train_fraction=float(settings.get("train_fraction", 0.7)),
        max_attempts=int(settings.get("max_attempts", 5)),
        jobs=int(settings.get("jobs", 1)),
        gan_options=dict(settings.get("gan", {})),
        dataset_name=settings.get("name"),
    )


def cmd_experiment(settings, experiment):
    spec = spec_from_settings(settings, experiment)
    if experiment == "exp1":
        result = X.run_experiment1(spec)
    else:
        methods = settings.get("methods", X.METHODS)
        if isinstance(methods, str):
            methods = X.parse_methods(methods)
        result = X.run_experiment2(spec, methods)
    print(result.files["report"].read_text(encoding="utf-8"))
    for path in result.files.values():
        log.info("wrote %s", path)
    return 0


def cmd_synth(settings):
    _require(settings, "data", "label_col")
    ds = D.load_csv(settings["data"], settings["label_col"], _label_mapping(settings),
                    tuple(_as_list(settings.get("drop_col")) or ()))
    seed = int(settings.get("seed", 0))
    if settings.get("majority_cap") is not None:
        ds = D.cap_majority(ds, int(settings["majority_cap"]), seed)
    ds = D.minmax_scale(ds)
    hidden = gan.parse_architecture(settings.get("arch", "256/512"))
    config = gan.GanConfig(hidden_sizes=hidden, epochs=int(settings.get("epochs", 1500)),
                           seed=seed, **settings.get("gan", {}))
    train_seq, synth_seq = np.random.SeedSequence(seed).spawn(2)
    model, training = gan.train_gan(ds, config, rng=np.random.default_rng(train_seq))
    if training.diverged:
        raise RuntimeError(f"training diverged at epoch/batch {training.diverged_at}; try another --seed")
    rows = int(settings.get("rows", ds.n_rows))
    synthetic = gan.synthesize(model, rows, np.random.default_rng(synth_seq))
    out_dir = Path(settings.get("out", "results"))
    name = settings.get("name") or Path(settings["data"]).stem
    path = out_dir / f"{name}_synth_{gan.architecture_name(hidden).replace('/', '-')}.csv"
    D.write_csv(synthetic, path, {
        "source": name, "architecture": gan.architecture_name(hidden), "epochs": config.epochs,
        "seed": seed, "rows": rows, "scale": "min-max [0,1]",
    })
    print(path)
    if settings.get("model"):
        gan.save_model(model, settings["model"])
        print(settings["model"])
    return 0


def cmd_metrics(settings):
    _require(settings, "data", "test", "label_col")
    mapping = _label_mapping(settings)
    drop = tuple(_as_list(settings.get("drop_col")) or ())
    synthetic = D.load_csv(settings["data"], settings["label_col"], mapping, drop,
                           ignore_missing_drops=True)
    real = D.load_csv(settings["test"], settings["label_col"], mapping, drop)
    if not settings.get("no_scale"):
        # synthetic rows live on the min-max scale of the data they were trained on
        real = D.minmax_scale(real)
    if synthetic.feature_names != real.feature_names:
        raise D.DataError("synthetic and real files have different feature columns")
    model = T.fit_tree(synthetic)
    report = E.classification_metrics(T.predict_many(model, real.features), real.labels)
    result = report.as_dict()
    result["label_proportion_synthetic"] = list(E.label_proportion(synthetic))
    result["nn_distance_mean"], result["nn_distance_std"] = E.mean_nn_distance(synthetic, real)
    text = json.dumps(result, indent=2)
    if settings.get("out"):
        Path(settings["out"]).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        settings = merged_settings(args)
        if args.command in ("exp1", "exp2"):
            return cmd_experiment(settings, args.command)
        if args.command == "synth":
            return cmd_synth(settings)
        return cmd_metrics(settings)
    except (ValueError, OSError, RuntimeError, KeyError, TypeError) as exc:
        print(f"gansynth: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
