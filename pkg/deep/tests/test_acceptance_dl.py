"""Acceptance gate for the deep outcome model.

Each test covers one criterion; the harness prints one PASS/FAIL line per
test in the terminal summary.
"""

import numpy as np
import pytest
import torch

from pitchcast_dl.config import optimal_config
from pitchcast_dl.data import load_tensors
from pitchcast_dl.model import InceptionBlock, build_model
from pitchcast_dl.predict import prediction_rows, write_prediction_csv
from pitchcast_dl.train import evaluate_rps, train

from helpers import make_tensor_set, run_pitchcast


def test_output_simplex():
    """Probability outputs form a simplex to 1e-6 on arbitrary inputs."""
    rng = np.random.default_rng(10)
    model = build_model(optimal_config(), vocab_size=16)
    for scale in (1e-3, 1.0, 10.0, 1e3):
        numeric = torch.from_numpy(
            (scale * rng.normal(size=(64, 8, 5))).astype(np.float32))
        ids = torch.from_numpy(rng.integers(0, 16, size=(64, 2, 5)))
        probs = model.predict_proba(numeric, ids)
        assert torch.all(probs >= 0)
        assert torch.allclose(probs.sum(dim=1), torch.ones(64), atol=1e-6)


def test_inception_shape_preservation():
    """The inception block preserves the (channel, time) shape."""
    rng = np.random.default_rng(11)
    for channels, steps in [(8, 5), (10, 5), (12, 3), (9, 8)]:
        block = InceptionBlock(channels)
        x = torch.from_numpy(
            rng.normal(size=(6, channels, steps)).astype(np.float32))
        assert block(x).shape == x.shape


def test_gradient_check():
    """Backprop matches central finite differences within 1e-3 relative."""
    rng = np.random.default_rng(12)
    model = build_model(optimal_config(), vocab_size=16).double().eval()
    numeric = torch.from_numpy(rng.normal(size=(8, 8, 5)))
    ids = torch.from_numpy(rng.integers(0, 16, size=(8, 2, 5)))
    labels = torch.from_numpy(rng.integers(0, 3, size=8))
    loss_fn = torch.nn.CrossEntropyLoss()

    loss = loss_fn(model(numeric, ids), labels)
    model.zero_grad()
    loss.backward()

    params = [p for p in model.parameters() if p.requires_grad]
    checked = 0
    while checked < 10:
        p = params[rng.integers(len(params))]
        flat = p.detach().view(-1)
        j = int(rng.integers(flat.numel()))
        grad = float(p.grad.view(-1)[j])
        eps = 1e-6
        orig = float(flat[j])
        with torch.no_grad():
            flat[j] = orig + eps
            hi = float(loss_fn(model(numeric, ids), labels))
            flat[j] = orig - eps
            lo = float(loss_fn(model(numeric, ids), labels))
            flat[j] = orig
        fd = (hi - lo) / (2 * eps)
        if abs(fd) < 1e-8 and abs(grad) < 1e-8:
            continue
        assert abs(fd - grad) / max(abs(fd), abs(grad)) < 1e-3
        checked += 1


def test_overfit_64_samples():
    """A 64-sample batch is memorized to RPS < 0.05 within 500 steps."""
    rng = np.random.default_rng(0)
    ts = make_tensor_set(rng, n=64)
    cfg = optimal_config(epochs=50, seed=0)
    model = None
    steps = 0
    score = float("inf")
    while steps < 500:
        result = train(ts, None, cfg, model=model)
        model = result.model
        steps += cfg.epochs
        score = evaluate_rps(model, ts)
        if score < 0.05:
            break
    assert score < 0.05, f"train RPS {score:.4f} after {steps} steps"
    assert steps <= 500


def test_fixture_ordering_and_evaluate_round_trip(tmp_path, syn_split_tensors):
    """Trained deep model beats the W/D/L frequency baseline on the public
    fixture, and its prediction CSV scores through the upstream evaluator."""
    store, splits = syn_split_tensors
    cfg = optimal_config(epochs=30, seed=0)
    rows = []
    split_rps = []
    for _, train_prefix, valid_prefix in splits:
        train_set = load_tensors(train_prefix)
        valid_set = load_tensors(valid_prefix)
        result = train(train_set, valid_set, cfg)
        split_rps.append(result.best_valid_rps)
        rows.extend(prediction_rows(result.model, valid_set))
    deep_mean = sum(split_rps) / len(split_rps)

    proc = run_pitchcast("evaluate", "--store", store,
                         "--models", "wdl_percentage", "--task", "wdl",
                         "--report", "csv")
    assert proc.returncode == 0, proc.stderr
    baseline = float(proc.stdout.splitlines()[1].split(",")[1])
    assert deep_mean <= baseline, (deep_mean, baseline)

    preds = tmp_path / "deep_preds.csv"
    write_prediction_csv(preds, rows)
    proc = run_pitchcast("evaluate", "--store", store,
                         "--models", f"file:{preds}", "--task", "wdl",
                         "--splits", "none", "--report", "csv")
    assert proc.returncode == 0, proc.stderr
    scored = float(proc.stdout.splitlines()[1].split(",")[1])
    assert scored == pytest.approx(deep_mean, abs=1e-4)
