import json
import subprocess
import sys

import numpy as np
import pytest
import torch

from pitchcast_dl.cli import load_model, main, save_model
from pitchcast_dl.config import optimal_config
from pitchcast_dl.model import build_model
from pitchcast_dl.predict import predict_proba

from helpers import make_tensor_set, write_tensor_files


def run_cli(*argv):
    return main(list(argv))


@pytest.fixture()
def tensor_files(tmp_path):
    rng = np.random.default_rng(4)
    train = write_tensor_files(tmp_path / "train", make_tensor_set(rng, n=48))
    valid = write_tensor_files(tmp_path / "valid", make_tensor_set(rng, n=16))
    return train, valid


def test_version_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "pitchcast_dl.cli", "--version"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip()


def test_usage_error_exit_code():
    assert run_cli("frobnicate") == 1


def test_missing_tensors_is_input_error(tmp_path):
    assert run_cli("train", "--tensors", str(tmp_path / "nope"),
                   "--model-out", str(tmp_path / "m.pt")) == 2


def test_train_predict_round_trip(tmp_path, tensor_files):
    train, valid = tensor_files
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"epochs": 2}))
    model_path = tmp_path / "model.pt"
    preds = tmp_path / "preds.csv"
    assert run_cli("train", "--tensors", train, "--valid-tensors", valid,
                   "--config", str(cfg_path),
                   "--model-out", str(model_path)) == 0
    assert run_cli("predict", "--model", str(model_path),
                   "--tensors", valid, "--out", str(preds)) == 0
    lines = preds.read_text().splitlines()
    assert lines[0] == "match_id,p_win,p_draw,p_loss"
    assert len(lines) == 17
    for line in lines[1:]:
        probs = [float(v) for v in line.split(",")[1:]]
        assert sum(probs) == pytest.approx(1.0, abs=1e-6)


def test_model_save_load_round_trip(tmp_path):
    rng = np.random.default_rng(5)
    cfg = optimal_config()
    model = build_model(cfg, vocab_size=16)
    path = tmp_path / "m.pt"
    save_model(path, model, cfg)
    loaded = load_model(path)
    ts = make_tensor_set(rng, n=6)
    np.testing.assert_allclose(predict_proba(loaded, ts),
                               predict_proba(model, ts), atol=1e-7)
    for pa, pb in zip(loaded.parameters(), model.parameters()):
        assert torch.equal(pa, pb)


def test_grid_smoke(tmp_path, tensor_files, capsys):
    train, valid = tensor_files
    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps(
        [{"name": "a", "train": train, "valid": valid}]))
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"epochs": 1}))
    grid_path = tmp_path / "grid.json"
    grid_path.write_text(json.dumps({"mlp_num_layer": [1, 2]}))
    report = tmp_path / "report.md"
    assert run_cli("grid", "--manifest", str(manifest),
                   "--config", str(cfg_path), "--grid", str(grid_path),
                   "--report", str(report)) == 0
    best = json.loads(capsys.readouterr().out.strip())
    assert best["mlp_num_layer"] in (1, 2)
    lines = report.read_text().splitlines()
    assert lines[0] == "| Model | Avg Loss | Sigma |"
    assert len(lines) == 4
