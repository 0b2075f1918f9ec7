import json

import pytest

from gansynth import cli, gan


def _common(toy_csv, out):
    return ["--data", str(toy_csv), "--label-col", "cls", "--label-map", "N=0,P=1",
            "--drop-col", "id", "--out", str(out)]


def test_exp1_cli_writes_reports(toy_csv, tmp_path, capsys):
    rc = cli.main(["exp1", *_common(toy_csv, tmp_path / "o"), "--arch", "8", "--arch", "8/16",
                   "--reps", "1", "--epochs", "2", "--seed", "5"])
    assert rc == 0
    assert "original" in capsys.readouterr().out
    assert (tmp_path / "o" / "toy_exp1_metrics.csv").exists()
    assert (tmp_path / "o" / "toy_exp1_8-16_runs.csv").exists()


def test_exp2_cli_methods(toy_csv, tmp_path):
    rc = cli.main(["exp2", *_common(toy_csv, tmp_path / "o"), "--methods", "none,smote",
                   "--reps", "1", "--epochs", "1"])
    assert rc == 0
    text = (tmp_path / "o" / "toy_exp2_balanced_test.csv").read_text()
    assert "smote" in text and "gan" not in text


def test_config_file_overridden_by_flags(toy_csv, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({
        "data": str(toy_csv), "label_col": "cls", "label_map": {"N": 0, "P": 1},
        "drop_col": ["id"], "arch": ["8"], "reps": 3, "epochs": 1, "out": str(tmp_path / "cfg"),
        "gan": {"latent_dim": 3},
    }))
    settings = cli.merged_settings(cli.build_parser().parse_args(["exp1", "--config", str(cfg), "--reps", "1"]))
    spec = cli.spec_from_settings(settings, "exp1")
    assert spec.repetitions == 1 and spec.epochs == 1 and spec.gan_options == {"latent_dim": 3}
    assert cli.main(["exp1", "--config", str(cfg), "--reps", "1"]) == 0


def test_defaults_follow_experiment(toy_csv):
    s = {"data": str(toy_csv), "label_col": "cls"}
    one = cli.spec_from_settings(s, "exp1")
    two = cli.spec_from_settings(s, "exp2")
    assert one.repetitions == 20 and len(one.architectures) == 6 and one.epochs == 1500
    assert two.repetitions == 5
    assert sorted(two.architectures) == sorted([(128,), (256,), (128, 256), (256, 512)])


def test_synth_and_metrics_cli(toy_csv, tmp_path, capsys):
    out = tmp_path / "s"
    model_path = tmp_path / "m.json"
    rc = cli.main(["synth", *_common(toy_csv, out), "--arch", "8", "--epochs", "2", "--rows", "30",
                   "--model", str(model_path)])
    assert rc == 0
    synth_csv = out / "toy_synth_8.csv"
    assert synth_csv.read_text().startswith("# ")
    assert gan.load_model(model_path).config.hidden_sizes == (8,)
    capsys.readouterr()
    rc = cli.main(["metrics", "--data", str(synth_csv), "--test", str(toy_csv), "--label-col", "cls",
                   "--label-map", "N=0,P=1", "--drop-col", "id"])
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    assert report["tp"] + report["fp"] + report["tn"] + report["fn"] == 60


@pytest.mark.parametrize("argv", [
    ["exp1", "--data", "missing.csv", "--label-col", "x"],
    ["exp1", "--label-col", "x"],
    ["exp2", "--data", "missing.csv", "--label-col", "x", "--methods", "bogus"],
])
def test_errors_exit_nonzero_with_diagnostic(argv, capsys):
    assert cli.main(argv) != 0
    assert "gansynth: error:" in capsys.readouterr().err


def test_bad_label_column_is_diagnosed(toy_csv, capsys):
    assert cli.main(["exp1", "--data", str(toy_csv), "--label-col", "nope", "--reps", "1"]) == 2
    assert "not in header" in capsys.readouterr().err


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"colour": 1}')
    assert cli.main(["exp1", "--config", str(cfg)]) == 2
    assert "unknown configuration keys" in capsys.readouterr().err
