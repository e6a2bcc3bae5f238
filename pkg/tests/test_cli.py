import csv
import io
import json

import pytest

from rtclass.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main


@pytest.fixture(scope="module")
def uwb_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("uwb")
    assert main(["simulate", "--classes", "idle,bicycle", "--per-class", "12", "--tech", "uwb",
                 "--seed", "7", "--out", str(out)]) == EXIT_OK
    return out


@pytest.fixture(scope="module")
def csi_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("csi")
    assert main(["simulate", "--per-class", "6", "--tech", "csi", "--seed", "3",
                 "--duration", "2", "--out", str(out)]) == EXIT_OK
    return out


def test_simulate_writes_files(uwb_dir):
    assert len(list((uwb_dir / "traces").glob("*.jsonl"))) == 24
    text = (uwb_dir / "manifest.csv").read_text()
    assert text.startswith("# seed=7\n")


def test_simulate_needs_seed(tmp_path, monkeypatch, capsys):
    monkeypatch.delenv("RTCLASS_SEED", raising=False)
    assert main(["simulate", "--out", str(tmp_path)]) == EXIT_USAGE
    assert "--seed" in capsys.readouterr().err
    monkeypatch.setenv("RTCLASS_SEED", "5")
    assert main(["simulate", "--per-class", "1", "--out", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "manifest.csv").read_text().startswith("# seed=5")


@pytest.mark.parametrize("argv", [
    ["simulate", "--per-class", "0", "--seed", "1"],
    ["simulate", "--classes", "truck", "--seed", "1"],
    ["simulate", "--tech", "lora", "--seed", "1"],
    ["frobnicate"],
    [],
])
def test_usage_errors(argv, tmp_path):
    assert main(argv + ["--out", str(tmp_path)] if argv and argv[0] == "simulate" else argv) == EXIT_USAGE


def test_evaluate_report(uwb_dir, tmp_path):
    out = tmp_path / "rep"
    rc = main(["evaluate", "--manifest", str(uwb_dir / "manifest.csv"), "--model", "rf",
               "--task", "binary", "--parameter", "FC", "--filter", "f1", "--k", "10",
               "--trees", "10", "--out", str(out)])
    assert rc == EXIT_OK
    table = (out / "report.txt").read_text().splitlines()
    rows = [ln for ln in table if "FC (f1)" in ln]
    assert len(rows) == 4
    assert rows[0].startswith("RF     Accuracy")
    assert "±" in rows[0]
    doc = json.loads((out / "report.json").read_text())
    assert doc["seed"] == 7 and doc["k"] == 10          # manifest seed used
    assert doc["reports"][0]["filter"] == "f1"


def test_evaluate_seed_precedence(uwb_dir, tmp_path, monkeypatch):
    monkeypatch.setenv("RTCLASS_SEED", "99")
    base = ["evaluate", "--manifest", str(uwb_dir / "manifest.csv"), "--model", "svm",
            "--parameter", "FC", "--filter", "f0", "--k", "3"]
    assert main(base + ["--out", str(tmp_path / "a")]) == EXIT_OK
    assert json.loads((tmp_path / "a/report.json").read_text())["seed"] == 99
    assert main(base + ["--seed", "4", "--out", str(tmp_path / "b")]) == EXIT_OK
    assert json.loads((tmp_path / "b/report.json").read_text())["seed"] == 4


def test_evaluate_errors(uwb_dir, tmp_path, capsys):
    m = str(uwb_dir / "manifest.csv")
    assert main(["evaluate", "--manifest", m, "--k", "1"]) == EXIT_USAGE
    assert main(["evaluate", "--manifest", m, "--filter", "f7"]) == EXIT_USAGE
    assert main(["evaluate", "--manifest", m, "--model", "knn"]) == EXIT_USAGE
    assert main(["evaluate", "--manifest", str(tmp_path / "none.csv")]) == EXIT_DATA
    capsys.readouterr()
    assert main(["evaluate", "--manifest", m, "--parameter", "RSSI", "--model", "rf"]) == EXIT_DATA
    err = capsys.readouterr().err
    assert "uwb-idle-0000" in err and "RSSI" in err
    assert main(["evaluate", "--manifest", m, "--task", "multi"]) == EXIT_DATA


def test_save_and_export(uwb_dir, tmp_path, capsys):
    model = tmp_path / "m.bin"
    base = ["evaluate", "--manifest", str(uwb_dir / "manifest.csv"), "--parameter", "FC",
            "--filter", "f0", "--k", "3", "--trees", "5"]
    assert main(base + ["--save-model", str(model)]) == EXIT_USAGE      # three models
    assert main(base + ["--model", "rf", "--save-model", str(model)]) == EXIT_OK
    assert (tmp_path / "m.bin.sha256").exists()
    src = tmp_path / "m.c"
    assert main(["export", "--model-file", str(model), "--dialect", "c99", "--out", str(src),
                 "--verify", "--fuzz", "500"]) == EXIT_OK
    assert "int predict(const float features[24])" in src.read_text()
    assert (tmp_path / "m.c.sha256").read_text().split()[1] == "m.c"
    assert "100.00% agreement" in capsys.readouterr().out


def test_export_errors(uwb_dir, tmp_path, capsys):
    assert main(["export", "--model-file", str(tmp_path / "x.bin")]) == EXIT_DATA
    model = tmp_path / "m.bin"
    main(["evaluate", "--manifest", str(uwb_dir / "manifest.csv"), "--parameter", "FC",
          "--filter", "f0", "--k", "3", "--model", "svm", "--save-model", str(model)])
    assert main(["export", "--model-file", str(model)]) == EXIT_USAGE     # no SVM exporter
    assert main(["export", "--model-file", str(model), "--dialect", "rust"]) == EXIT_USAGE
    assert "c99" in capsys.readouterr().err
    main(["evaluate", "--manifest", str(uwb_dir / "manifest.csv"), "--parameter", "FC",
          "--filter", "f0", "--k", "3", "--model", "rf", "--trees", "3", "--save-model", str(model)])
    model.write_bytes(model.read_bytes().replace(b'"seed"', b'"seeds"'))
    assert main(["export", "--model-file", str(model)]) == EXIT_DATA
    assert "digest mismatch" in capsys.readouterr().err


def _csv(path):
    return list(csv.reader(io.StringIO(path.read_text())))


def test_importance_features(uwb_dir, tmp_path):
    out = tmp_path / "imp.csv"
    assert main(["importance", "--manifest", str(uwb_dir / "manifest.csv"), "--mode", "features",
                 "--parameter", "FC", "--trees", "20", "--out", str(out)]) == EXIT_OK
    rows = _csv(out)
    assert rows[0] == ["name", "value", "model"] and len(rows) == 25
    assert sum(float(r[1]) for r in rows[1:]) == pytest.approx(1.0, abs=1e-9)


def test_importance_parameters_matches_direct_evaluate(uwb_dir, tmp_path):
    out = tmp_path / "par.csv"
    m = str(uwb_dir / "manifest.csv")
    assert main(["importance", "--manifest", m, "--mode", "parameters", "--parameter", "FC,RXP",
                 "--filter", "f0,f1", "--k", "3", "--trees", "5", "--out", str(out)]) == EXIT_OK
    rows = _csv(out)[1:]
    assert [r[2] for r in rows] == ["rf", "rf"]
    for name, value, _, filt in rows:
        rep = tmp_path / f"{name}"
        main(["evaluate", "--manifest", m, "--model", "rf", "--parameter", name, "--filter", filt,
              "--k", "3", "--trees", "5", "--out", str(rep)])
        direct = json.loads((rep / "report.json").read_text())["reports"][0]["mean"]["accuracy"]
        assert float(value) == direct


def test_importance_subcarrier_groups(csi_dir, uwb_dir, tmp_path):
    out = tmp_path / "g.csv"
    assert main(["importance", "--manifest", str(csi_dir / "manifest.csv"), "--mode",
                 "subcarrier-groups", "--task", "multi", "--k", "3", "--trees", "5",
                 "--mlp-epochs", "20", "--out", str(out)]) == EXIT_OK
    rows = _csv(out)[1:]
    assert len(rows) == 8 * 3
    assert {r[0] for r in rows} == {f"G{g}" for g in range(1, 9)}
    assert main(["importance", "--manifest", str(uwb_dir / "manifest.csv"),
                 "--mode", "subcarrier-groups"]) == EXIT_DATA


def test_config_file(tmp_path, monkeypatch):
    monkeypatch.delenv("RTCLASS_SEED", raising=False)
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\nper_class = 2\ntech=csi\nseed=11\nduration=1\n")
    out = tmp_path / "o"
    assert main(["--config", str(cfg), "simulate", "--out", str(out)]) == EXIT_OK
    assert len(list((out / "traces").glob("wlan_csi-*.jsonl"))) == 6
    # command-line flags beat the file
    assert main(["--config", str(cfg), "simulate", "--per-class", "1", "--out", str(tmp_path / "p")]) == EXIT_OK
    assert len(list((tmp_path / "p/traces").glob("*.jsonl"))) == 3
    cfg.write_text("per_clas=2\n")
    assert main(["--config", str(cfg), "simulate"]) == EXIT_USAGE
    assert main(["--config", str(tmp_path / "missing.cfg"), "simulate"]) == EXIT_USAGE


def test_reruns_are_byte_identical(uwb_dir, tmp_path):
    outs = []
    for run in ("a", "b"):
        o = tmp_path / run
        main(["evaluate", "--manifest", str(uwb_dir / "manifest.csv"), "--model", "rf,svm",
              "--parameter", "FC", "--filter", "f0", "--k", "3", "--trees", "5", "--out", str(o)])
        main(["importance", "--manifest", str(uwb_dir / "manifest.csv"), "--mode", "features",
              "--trees", "5", "--out", str(o / "imp.csv")])
        outs.append([(o / n).read_bytes() for n in ("report.json", "report.txt", "imp.csv")])
    assert outs[0] == outs[1]
