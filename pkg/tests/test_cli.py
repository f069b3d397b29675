import json
import subprocess
import sys

import pytest

from pitchcast.cli import main

from support import F1_CSV


def run_cli(*argv):
    return main(list(argv))


def test_version_runs():
    proc = subprocess.run([sys.executable, "-m", "pitchcast.cli", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip()


def test_usage_error_exit_code():
    proc = subprocess.run([sys.executable, "-m", "pitchcast.cli", "frobnicate"],
                          capture_output=True, text=True)
    assert proc.returncode == 1


def test_missing_input_is_input_error(tmp_path):
    code = run_cli("ingest", "--input", str(tmp_path / "nope.csv"),
                   "--out", str(tmp_path / "out.csv"))
    assert code == 2


def test_json_errors_format(tmp_path, capsys):
    code = run_cli("--json-errors", "ingest",
                   "--input", str(tmp_path / "nope.csv"),
                   "--out", str(tmp_path / "out.csv"))
    assert code == 2
    err = capsys.readouterr().err.strip().splitlines()[-1]
    payload = json.loads(err)
    assert payload["error"] == "input"
    assert payload["type"] == "FileNotFoundError"


def test_ingest_then_ratings(tmp_path, f1_csv):
    store = tmp_path / "store.csv"
    ratings = tmp_path / "ratings.csv"
    assert run_cli("ingest", "--input", str(f1_csv), "--out", str(store)) == 0
    assert run_cli("ratings", "--store", str(store), "--out", str(ratings)) == 0
    lines = ratings.read_text().splitlines()
    assert lines[0].startswith("league,team,elo")
    assert len(lines) == 4


def test_features_select_round_trip(tmp_path, f1_csv):
    store = tmp_path / "store.csv"
    feats = tmp_path / "feats.csv"
    run_cli("ingest", "--input", str(f1_csv), "--out", str(store))
    assert run_cli("features", "--store", str(store),
                   "--spec", "GS_avg_HT,GS_avg_AT,elo_HT",
                   "--matches", "all", "--with-targets",
                   "--out", str(feats)) == 0
    header = feats.read_text().splitlines()[0]
    assert header == "match_id,GS_avg_HT,GS_avg_AT,elo_HT,home_goals,away_goals,outcome"


def test_feature_spec_file(tmp_path, f1_csv):
    store = tmp_path / "store.csv"
    spec = tmp_path / "spec.txt"
    feats = tmp_path / "feats.csv"
    spec.write_text("elo_HT\nelo_AT\n")
    run_cli("ingest", "--input", str(f1_csv), "--out", str(store))
    assert run_cli("features", "--store", str(store), "--spec", f"@{spec}",
                   "--matches", "1-2", "--out", str(feats)) == 0
    lines = feats.read_text().splitlines()
    assert lines[0] == "match_id,elo_HT,elo_AT"
    assert len(lines) == 3


def test_unknown_feature_is_input_error(tmp_path, f1_csv):
    store = tmp_path / "store.csv"
    run_cli("ingest", "--input", str(f1_csv), "--out", str(store))
    assert run_cli("features", "--store", str(store), "--spec", "bogus",
                   "--matches", "all", "--out", str(tmp_path / "f.csv")) == 2


def test_train_predict_evaluate_round_trip(tmp_path, syn_store, monkeypatch):
    store = tmp_path / "store.csv"
    syn_store.serialize(store)
    feats = tmp_path / "feats.csv"
    model = tmp_path / "model.json"
    preds = tmp_path / "preds.csv"
    cfg = tmp_path / "cfg.toml"
    cfg.write_text("[gbt]\niterations = 20\nmax_depth = 2\n")
    assert run_cli("features", "--store", str(store), "--spec", "wdl",
                   "--matches", "1500-1799", "--with-targets",
                   "--out", str(feats)) == 0
    assert run_cli("--config", str(cfg), "train", "--task", "wdl",
                   "--features", str(feats), "--model-out", str(model)) == 0
    assert run_cli("predict", "--model", str(model),
                   "--features", str(feats), "--out", str(preds)) == 0
    lines = preds.read_text().splitlines()
    assert lines[0] == "match_id,p_win,p_draw,p_loss"
    assert len(lines) == 301
    p = [float(v) for v in lines[1].split(",")[1:]]
    assert sum(p) == pytest.approx(1.0, abs=1e-6)
    report = tmp_path / "report.json"
    assert run_cli("evaluate", "--store", str(store),
                   "--models", f"file:{preds}", "--task", "wdl",
                   "--splits", "none", "--report", "json",
                   "--out", str(report)) == 0
    data = json.loads(report.read_text())
    assert data["metric"] == "RPS"
    assert 0.0 <= data["models"][0]["avg_loss"] <= 1.0


def test_score_task_round_trip(tmp_path, syn_store):
    store = tmp_path / "store.csv"
    syn_store.serialize(store)
    feats = tmp_path / "feats.csv"
    model = tmp_path / "model.json"
    preds = tmp_path / "preds.csv"
    cfg = tmp_path / "cfg.toml"
    cfg.write_text('[gbt]\niterations = 20\nmax_depth = 2\n')
    run_cli("features", "--store", str(store), "--spec", "all",
            "--matches", "1500-1699", "--with-targets", "--out", str(feats))
    assert run_cli("--config", str(cfg), "train", "--task", "score",
                   "--features", str(feats), "--model-out", str(model)) == 0
    assert run_cli("predict", "--model", str(model),
                   "--features", str(feats), "--out", str(preds)) == 0
    assert preds.read_text().splitlines()[0] == \
        "match_id,pred_home_goals,pred_away_goals"


def test_tensors_command(tmp_path, f1_csv):
    store = tmp_path / "store.csv"
    run_cli("ingest", "--input", str(f1_csv), "--out", str(store))
    assert run_cli("tensors", "--store", str(store), "--matches", "2",
                   "--window", "3", "--out", str(tmp_path / "t")) == 0
    meta = json.loads((tmp_path / "t.meta.json").read_text())
    assert meta["shape"] == [1, 8, 3]


def test_select_command(tmp_path, syn_store):
    store = tmp_path / "store.csv"
    syn_store.serialize(store)
    feats = tmp_path / "feats.csv"
    out = tmp_path / "sel.json"
    run_cli("features", "--store", str(store), "--spec",
            "EG_HT,EG_AT,GS_avg_HT,win_pct_AT", "--matches", "1900-2100",
            "--with-targets", "--out", str(feats))
    assert run_cli("select", "--features", str(feats), "--target", "outcome",
                   "--stage", "all", "--out", str(out)) == 0
    data = json.loads(out.read_text())
    assert set(data) >= {"filter_top", "relieff_top", "candidates", "selected"}
    assert data["selected"]


def test_append_flag(tmp_path, f1_csv):
    extra = tmp_path / "extra.csv"
    extra.write_text(
        "Sea,Lge,Date,HT,AT,HS,AS,GD,WDL\n"
        "20-21,ENG,2020-10-03,Alpha,Gamma,1,0,1,W\n")
    out = tmp_path / "store.csv"
    assert run_cli("ingest", "--input", str(f1_csv),
                   "--append", str(extra), "--out", str(out)) == 0
    assert len(out.read_text().splitlines()) == 5


def test_splits_command(tmp_path, syn_store):
    store = tmp_path / "store.csv"
    syn_store.serialize(store)
    out = tmp_path / "splits.json"
    assert run_cli("splits", "--store", str(store), "--out", str(out)) == 0
    data = json.loads(out.read_text())
    assert [s["anchor_season"] for s in data] == ["18-19", "19-20", "20-21"]
    for split in data:
        assert len(split["train_ids"]) == 1128
        assert len(split["validation_ids"]) == 16
        assert all(isinstance(i, int) for i in split["validation_ids"])
