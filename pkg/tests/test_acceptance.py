"""End-to-end acceptance checks: metric exactness, rating and selection
oracles, boosted-tree properties, banded desk-scale results on the bundled
public-league fixture, and byte-identical CLI determinism.

Each test covers one acceptance criterion; the terminal summary prints one
PASS/FAIL line per criterion (see conftest.pytest_terminal_summary).
"""

import filecmp
import itertools
import math
import time

import numpy as np
import pandas as pd
import pytest

from pitchcast import cli, eval as evalmod, features, gbt, selection
from pitchcast.cli import main as cli_main
from pitchcast.eval import (baseline_home_win, baseline_wdl_percentage,
                            berrar_eg_predictions, make_splits, mean_rps,
                            rmse, rps)
from pitchcast.ratings import RatingConfig, TeamRating, pagerank_scores, \
    pi_expected_margin, pi_update, replay
from pitchcast.ingest import MatchRecord

from support import F1_CSV, random_frame
from test_ratings import dense_pagerank_oracle, match
from test_selection import exhaustive_cfs, relieff_oracle


def test_metric_exactness():
    assert abs(rps((0.5, 0.3, 0.2), "W") - 0.145) < 1e-12
    assert abs(rmse([(2.0, 1.0)], [(2, 2)]) - math.sqrt(0.5)) < 1e-12
    rng = np.random.default_rng(0)
    outcomes = np.array(["W", "D", "L"])
    for _ in range(10_000):
        p = rng.dirichlet([1.0, 1.0, 1.0])
        v = rps(tuple(p), outcomes[rng.integers(0, 3)])
        assert 0.0 <= v <= 1.0


def test_rating_invariants(syn_store):
    # Elo sum conservation over a 1,000-match replay
    states = replay(syn_store, up_to=1000)
    assert abs(sum(s.elo for s in states.values()) - 1500.0 * len(states)) \
        < 1e-9
    # pi-rating zero update when the margin matches expectation
    cfg = RatingConfig()
    home = TeamRating(pi_home=3.0 * math.log10(3.0))
    h2, a2 = pi_update((home, TeamRating()), match(3, 1), cfg)
    assert abs(h2.pi_home - home.pi_home) < 1e-12
    # pi-rating antisymmetry from the fresh state
    h, a = pi_update((TeamRating(), TeamRating()), match(2, 0), cfg)
    assert abs(h.pi_home + a.pi_away) < 1e-12
    assert abs(h.pi_away + a.pi_home) < 1e-12
    # PageRank: simplex sum and dense-oracle agreement on <= 20-team windows
    from datetime import date
    scores = pagerank_scores(syn_store, "SYN", date(2021, 6, 1))
    assert abs(sum(scores.values()) - 1.0) < 1e-9
    rng = np.random.default_rng(1)
    from pitchcast.ratings import pagerank_fixed_point
    for _ in range(5):
        n = int(rng.integers(4, 21))
        teams = [f"T{i}" for i in range(n)]
        edges = {}
        for _ in range(3 * n):
            i, j = rng.integers(0, n, size=2)
            if i != j:
                edges[(teams[i], teams[j])] = float(rng.integers(1, 5))
        got = pagerank_fixed_point(teams, edges, 0.85)
        want = dense_pagerank_oracle(teams, edges, 0.85)
        for t in teams:
            assert abs(got[t] - want[t]) < 1e-8


def test_selection_oracles():
    rng = np.random.default_rng(2)
    # cfs_select equals exhaustive enumeration on <= 12 candidates
    for n_feat in (5, 8, 12):
        y = rng.integers(0, 3, size=160)
        frame = random_frame(rng, 160, n_feat)
        frame["f0"] += y
        frame["f1"] -= 0.5 * y
        got = selection.cfs_select(frame, y)
        want_sel, want_merit = exhaustive_cfs(frame, y)
        assert abs(got.merit - want_merit) < 1e-12
        assert sorted(got.selected) == want_sel
    # relieff equals the O(n^2) brute-force oracle on <= 200 instances
    for n in (60, 200):
        y = rng.integers(0, 3, size=n)
        frame = random_frame(rng, n, 5)
        frame["f0"] += y
        scores, _ = selection.relieff(frame, y, k_neighbors=10)
        want = relieff_oracle(frame.to_numpy(), y, 10)
        np.testing.assert_allclose(scores.to_numpy(), want, atol=1e-12)


def test_gbt_properties():
    rng = np.random.default_rng(3)
    # training-loss monotonicity with lr <= 0.3
    for lr in (0.05, 0.3):
        frame = random_frame(rng, 120, 3)
        y = rng.choice(["W", "D", "L"], size=120)
        model = gbt.fit(frame, y, gbt.GbtConfig(iterations=25,
                                                learning_rate=lr,
                                                max_depth=3))
        curve = model.train_curve
        assert all(curve[i + 1] <= curve[i] + 1e-12
                   for i in range(len(curve) - 1))
    # softmax gradient vs central finite differences within 1e-6
    scores = rng.normal(size=(5, 3))
    y = rng.integers(0, 3, size=5)
    p = gbt.softmax(scores)
    onehot = np.zeros_like(p)
    onehot[np.arange(5), y] = 1.0
    grad = (p - onehot) / 5.0
    eps = 1e-6
    for i in range(5):
        for c in range(3):
            hi, lo = scores.copy(), scores.copy()
            hi[i, c] += eps
            lo[i, c] -= eps
            num = (gbt.log_loss(gbt.softmax(hi), y)
                   - gbt.log_loss(gbt.softmax(lo), y)) / (2 * eps)
            assert abs(num - grad[i, c]) < 1e-6
    # ordered-encoding no-leakage on 100 fuzzed columns
    for _ in range(100):
        n = int(rng.integers(5, 40))
        values = [f"c{v}" for v in rng.integers(0, 4, size=n)]
        target = rng.random(n)
        order = rng.permutation(n)
        base = gbt.ordered_encode(values, target, 1.0, 0.5, order)
        cut = int(rng.integers(1, n))
        mutated = target.copy()
        mutated[order[cut:]] = rng.random(n - cut)
        changed = gbt.ordered_encode(values, mutated, 1.0, 0.5, order)
        np.testing.assert_array_equal(changed[order[:cut]], base[order[:cut]])
    # XOR fixture reaches near-zero training loss
    a = rng.integers(0, 2, size=200)
    b = rng.integers(0, 2, size=200)
    frame = pd.DataFrame({"a": a.astype(float), "b": b.astype(float)})
    model = gbt.fit(frame, (a ^ b).astype(float),
                    gbt.GbtConfig(iterations=50, learning_rate=0.3,
                                  max_depth=2, objective="squared_error",
                                  l2_leaf_reg=0.0))
    pred = model.predict(frame)
    assert float(np.mean((pred - (a ^ b)) ** 2)) < 1e-6


#: Boosted-tree settings used for the desk-scale fixture runs.
DESK_GBT = {"iterations": 400, "learning_rate": 0.03, "max_depth": 2,
            "l2_leaf_reg": 3.0}


def test_desk_scale_wdl_ordering(syn_store):
    start = time.perf_counter()
    splits = make_splits(syn_store)
    assert len(splits) == 3
    builder = features.FeatureBuilder(syn_store)
    model_losses, wdl_losses, home_losses = [], [], []
    for split in splits:
        outcomes = [syn_store.record(m).outcome for m in split.validation_ids]
        preds = cli._train_gbt_on_split(syn_store, builder, split, "wdl",
                                        {"gbt": DESK_GBT}, seed=0)
        model_losses.append(mean_rps(preds, outcomes))
        wdl_losses.append(mean_rps(
            baseline_wdl_percentage(syn_store, split.validation_ids), outcomes))
        home_losses.append(mean_rps(
            baseline_home_win(syn_store, split.validation_ids), outcomes))
    model_rps = sum(model_losses) / 3
    wdl_rps = sum(wdl_losses) / 3
    home_rps = sum(home_losses) / 3
    assert model_rps < wdl_rps < home_rps
    assert 0.35 <= home_rps <= 0.55
    assert 0.18 <= model_rps <= 0.24
    assert time.perf_counter() - start < 300.0


def test_task1_berrar_vs_league_average(syn_store):
    splits = make_splits(syn_store)
    berrar_losses, league_losses = [], []
    for split in splits:
        actual = [(syn_store.record(m).home_goals,
                   syn_store.record(m).away_goals)
                  for m in split.validation_ids]
        eg = berrar_eg_predictions(syn_store, split.validation_ids)
        berrar_losses.append(rmse([eg[m] for m in split.validation_ids],
                                  actual))
        league_losses.append(rmse(
            evalmod.baseline_league_average(syn_store, split.validation_ids),
            actual))
    berrar_rmse = sum(berrar_losses) / 3
    league_rmse = sum(league_losses) / 3
    assert berrar_rmse <= league_rmse
    assert 0.9 <= berrar_rmse <= 1.4


def test_cli_determinism_on_f1(tmp_path):
    """The full command pipeline, run twice with the same seed, produces
    byte-identical artifacts and reports."""
    def pipeline(root):
        root.mkdir()
        raw = root / "f1.csv"
        raw.write_text(F1_CSV)
        arts = {name: root / name for name in
                ("store.csv", "ratings.csv", "features.csv", "model.json",
                 "preds.csv", "report.md")}
        assert cli_main(["--seed", "0", "ingest", "--input", str(raw),
                         "--out", str(arts["store.csv"])]) == 0
        assert cli_main(["--seed", "0", "ratings",
                         "--store", str(arts["store.csv"]),
                         "--out", str(arts["ratings.csv"])]) == 0
        assert cli_main(["--seed", "0", "features",
                         "--store", str(arts["store.csv"]),
                         "--spec", "all", "--matches", "all",
                         "--with-targets",
                         "--out", str(arts["features.csv"])]) == 0
        assert cli_main(["--seed", "0", "train", "--task", "wdl",
                         "--features", str(arts["features.csv"]),
                         "--model-out", str(arts["model.json"])]) == 0
        assert cli_main(["--seed", "0", "predict",
                         "--model", str(arts["model.json"]),
                         "--features", str(arts["features.csv"]),
                         "--out", str(arts["preds.csv"])]) == 0
        assert cli_main(["--seed", "0", "evaluate",
                         "--store", str(arts["store.csv"]),
                         "--models", f"file:{arts['preds.csv']}",
                         "--task", "wdl", "--splits", "none",
                         "--report", "md",
                         "--out", str(arts["report.md"])]) == 0
        return arts

    first = pipeline(tmp_path / "run1")
    second = pipeline(tmp_path / "run2")
    for name in first:
        assert filecmp.cmp(first[name], second[name], shallow=False), name
