"""pitchcast command line: ingest -> ratings -> features -> select -> train
-> predict -> evaluate, as composable subcommands sharing one config file.

Artifacts are written atomically (temp file + rename). Exit codes: 1 usage,
2 input error, 3 internal error; with --json-errors a machine-readable error
object is printed to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
import time
from datetime import date as Date
from datetime import timedelta
from pathlib import Path

import numpy as np
import pandas as pd

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - 3.10 fallback
    import tomli as tomllib

from . import __version__, eval as evalmod, features, gbt, ingest, selection
from .errors import PitchcastError
from .ratings import BerrarParams, RatingConfig, pagerank_scores, replay

log = logging.getLogger("pitchcast")

EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_INTERNAL = 3


def atomic_write(path, text: str | bytes) -> None:
    path = Path(path)
    mode = "wb" if isinstance(text, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=path.name + ".")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_config(path) -> dict:
    if path is None:
        return {}
    path = Path(path)
    if path.suffix == ".toml":
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    with open(path) as fh:
        return json.load(fh)


def rating_config_from(cfg: dict) -> RatingConfig:
    section = dict(cfg.get("ratings", {}))
    berrar = BerrarParams(**section.pop("berrar", {}))
    return RatingConfig(berrar=berrar, **section)


def gbt_config_from(cfg: dict, task: str, seed: int) -> gbt.GbtConfig:
    section = dict(cfg.get("gbt", {}))
    section.setdefault("objective",
                       "multiclass_softmax" if task == "wdl" else "squared_error")
    section.setdefault("permutation_seed", seed)
    return gbt.GbtConfig(**section)


def parse_matches(store: ingest.MatchStore, spec: str) -> list[int]:
    if spec == "all":
        return [r.match_id for r in store]
    if spec == "played":
        return [r.match_id for r in store if r.played]
    if spec == "unplayed":
        return [r.match_id for r in store if not r.played]
    if spec.startswith("season:"):
        label = spec.split(":", 1)[1]
        return [r.match_id for r in store if r.season == label]
    ids: list[int] = []
    for part in spec.split(","):
        if "-" in part:
            lo, hi = part.split("-", 1)
            ids.extend(range(int(lo), int(hi) + 1))
        else:
            ids.append(int(part))
    return ids


def parse_feature_spec(spec: str):
    if spec == "all":
        return "all"
    if spec.startswith("@"):
        with open(spec[1:]) as fh:
            return [line.strip() for line in fh if line.strip()]
    if spec in selection.PRESETS:
        return list(selection.PRESETS[spec])
    return [name.strip() for name in spec.split(",") if name.strip()]


# ---------------------------------------------------------------------- #
# subcommands

def cmd_ingest(args, cfg) -> int:
    result = ingest.parse_csv(args.input)
    store = result.store
    for err in result.errors:
        log.warning("skipped row: %s", err)
    for extra_path in args.append or []:
        extra = ingest.parse_csv(extra_path).store
        appended = ingest.append_matches(store, extra)
        store = appended.store
        if appended.duplicates:
            log.warning("dropped %d duplicate matches from %s",
                        appended.duplicates, extra_path)
    tmp = args.out + ".part"
    store.serialize(tmp)
    os.replace(tmp, args.out)
    log.info("wrote %d matches to %s", len(store), args.out)
    return 0


def cmd_ratings(args, cfg) -> int:
    store = ingest.load_store(args.store)
    rating_cfg = rating_config_from(cfg)
    as_of = Date.fromisoformat(args.as_of) if args.as_of else max(r.date for r in store)
    up_to = len(store)
    for rec in store:
        if rec.date > as_of:
            up_to = rec.match_id
            break
    states = replay(store, rating_cfg, up_to)
    pagerank: dict[tuple[str, str], float] = {}
    for league in store.leagues():
        try:
            scores = pagerank_scores(store, league, as_of + timedelta(days=1),
                                     rating_cfg)
        except PitchcastError:
            continue
        for team, score in scores.items():
            pagerank[(league, team)] = score
    lines = ["league,team,elo,pi_home,pi_away,att_home,att_away,"
             "def_home,def_away,pagerank"]
    for (league, team) in sorted(states):
        s = states[(league, team)]
        pr = pagerank.get((league, team), float("nan"))
        lines.append(f"{league},{team},{s.elo:.6f},{s.pi_home:.6f},"
                     f"{s.pi_away:.6f},{s.b_att_home:.6f},{s.b_att_away:.6f},"
                     f"{s.b_def_home:.6f},{s.b_def_away:.6f},{pr:.8f}")
    atomic_write(args.out, "\n".join(lines) + "\n")
    log.info("wrote ratings for %d teams to %s", len(states), args.out)
    return 0


def cmd_features(args, cfg) -> int:
    store = ingest.load_store(args.store)
    spec = parse_feature_spec(args.spec)
    match_ids = parse_matches(store, args.matches)
    builder = features.FeatureBuilder(store, rating_config_from(cfg))
    frame = builder.matrix(match_ids, spec, with_targets=args.with_targets)
    log.info("catalog holds %d features; built %d columns x %d rows",
             len(features.catalog()), frame.shape[1], frame.shape[0])
    atomic_write(args.out, frame.to_csv())
    return 0


def cmd_tensors(args, cfg) -> int:
    store = ingest.load_store(args.store)
    match_ids = parse_matches(store, args.matches)
    features.export_tensors(store, match_ids, args.out, n=args.window)
    log.info("exported %d tensors to %s.bin", len(match_ids), args.out)
    return 0


def cmd_splits(args, cfg) -> int:
    store = ingest.load_store(args.store)
    spec_cfg = cfg.get("splits", {})
    spec = evalmod.SplitSpec(
        anchor_seasons=tuple(spec_cfg.get("anchor_seasons",
                                          evalmod.DEFAULT_ANCHORS)),
        train_years=spec_cfg.get("train_years", 5),
        round_x=spec_cfg.get("round_x"),
    )
    splits = evalmod.make_splits(store, spec)
    payload = [{"anchor_season": s.anchor_season,
                "train_ids": s.train_ids,
                "validation_ids": s.validation_ids} for s in splits]
    atomic_write(args.out, json.dumps(payload) + "\n")
    log.info("wrote %d splits to %s", len(splits), args.out)
    return 0


def cmd_select(args, cfg) -> int:
    frame = pd.read_csv(args.features, index_col="match_id")
    target = frame.pop(args.target)
    drop = [c for c in ("home_goals", "away_goals", "outcome") if c in frame.columns]
    frame = frame.drop(columns=drop)
    if target.dtype.kind in "if":
        target = selection.bin_goals(target)
    out: dict = {"target": args.target}
    if args.stage in ("all", "filter"):
        ranked = selection.filter_rank(frame, target)
        out["filter_top"] = ranked.top_k(20)
    if args.stage in ("all", "relieff"):
        _, top = selection.relieff(frame, target)
        out["relieff_top"] = top
    if args.stage == "cfs":
        result = selection.cfs_select(frame, target)
        out["selected"] = result.selected
        out["merit"] = result.merit
    if args.stage == "all":
        result = selection.run_pipeline(frame, target)
        out["candidates"] = result.candidates
        out["selected"] = result.subset.selected
        out["merit"] = result.subset.merit
    atomic_write(args.out, json.dumps(out, indent=1) + "\n")
    return 0


def _load_feature_file(path):
    frame = pd.read_csv(path, index_col="match_id")
    targets = {c: frame.pop(c) for c in ("home_goals", "away_goals", "outcome")
               if c in frame.columns}
    return frame, targets


def cmd_train(args, cfg, seed: int) -> int:
    frame, targets = _load_feature_file(args.features)
    names = parse_feature_spec(args.preset) if args.preset != "table8" else None
    if not targets:
        raise PitchcastError(
            "feature file has no target columns; rebuild with --with-targets")
    if args.task == "wdl":
        if names is None:
            names = selection.PRESETS["wdl"]
        y = targets["outcome"]
        keep = y.notna()
        model = gbt.fit(frame.loc[keep, names], y[keep],
                        gbt_config_from(cfg, args.task, seed))
        payload = {"task": "wdl", "model": json.loads(model.to_json())}
    else:
        models = {}
        for side, preset_key in (("home", "home_goals"), ("away", "away_goals")):
            side_names = names if names is not None else selection.PRESETS[preset_key]
            y = targets[f"{side}_goals"]
            keep = y.notna()
            model = gbt.fit(frame.loc[keep, side_names], y[keep],
                            gbt_config_from(cfg, args.task, seed))
            models[side] = json.loads(model.to_json())
        payload = {"task": "score", "model": models}
    atomic_write(args.model_out, json.dumps(payload))
    log.info("wrote model to %s", args.model_out)
    return 0


def cmd_predict(args, cfg) -> int:
    with open(args.model) as fh:
        payload = json.load(fh)
    frame, _ = _load_feature_file(args.features)
    if payload["task"] == "wdl":
        model = gbt.GbtModel.from_json(json.dumps(payload["model"]))
        probs = model.predict(frame)
        lines = ["match_id,p_win,p_draw,p_loss"]
        for mid, row in zip(frame.index, probs):
            lines.append(f"{mid},{row[0]:.8f},{row[1]:.8f},{row[2]:.8f}")
    else:
        home = gbt.GbtModel.from_json(json.dumps(payload["model"]["home"]))
        away = gbt.GbtModel.from_json(json.dumps(payload["model"]["away"]))
        ph, pa = home.predict(frame), away.predict(frame)
        lines = ["match_id,pred_home_goals,pred_away_goals"]
        for mid, h, a in zip(frame.index, ph, pa):
            lines.append(f"{mid},{h:.6f},{a:.6f}")
    atomic_write(args.out, "\n".join(lines) + "\n")
    return 0


def _train_gbt_on_split(store, builder, split, task, cfg, seed):
    """Fit the Table 8 preset model on a split; return validation predictions."""
    if task == "wdl":
        names = selection.PRESETS["wdl"]
        frame = builder.matrix(split.train_ids + split.validation_ids, names)
        train = frame.loc[split.train_ids]
        val = frame.loc[split.validation_ids]
        y = [store.record(m).outcome for m in split.train_ids]
        model = gbt.fit(train, y, gbt_config_from(cfg, task, seed))
        return [tuple(p) for p in model.predict(val)]
    preds = {}
    for side, key in (("home", "home_goals"), ("away", "away_goals")):
        names = selection.PRESETS[key]
        frame = builder.matrix(split.train_ids + split.validation_ids, names)
        y = [getattr(store.record(m), f"{side}_goals") for m in split.train_ids]
        model = gbt.fit(frame.loc[split.train_ids], y,
                        gbt_config_from(cfg, task, seed))
        preds[side] = model.predict(frame.loc[split.validation_ids])
    return list(zip(preds["home"], preds["away"]))


def cmd_evaluate(args, cfg, seed: int) -> int:
    store = ingest.load_store(args.store)
    models = [m.strip() for m in args.models.split(",") if m.strip()]
    rating_cfg = rating_config_from(cfg)
    report = evalmod.EvaluationReport("RPS" if args.task == "wdl" else "RMSE")

    if args.splits == "none":
        # score prediction files over all their rows, no split protocol
        for name in models:
            if not name.startswith("file:"):
                raise PitchcastError("--splits none supports only file: models")
            losses = {"all": _score_prediction_file(store, name[5:], args.task)}
            label = "file:" + Path(name[5:]).name
            report.results.append(evalmod.ModelResult(label, losses))
    else:
        spec_cfg = cfg.get("splits", {})
        spec = evalmod.SplitSpec(
            anchor_seasons=tuple(spec_cfg.get("anchor_seasons",
                                              evalmod.DEFAULT_ANCHORS)),
            train_years=spec_cfg.get("train_years", 5),
            round_x=spec_cfg.get("round_x"),
        )
        splits = evalmod.make_splits(store, spec)
        builder = features.FeatureBuilder(store, rating_cfg)
        for name in models:
            losses = {}
            for split in splits:
                losses[split.anchor_season] = _model_split_loss(
                    store, builder, name, split, args.task, cfg, seed)
            label = ("file:" + Path(name[5:]).name
                     if name.startswith("file:") else name)
            report.results.append(evalmod.ModelResult(label, losses))

    if args.report == "md":
        text = report.to_markdown()
    elif args.report == "csv":
        text = report.to_csv()
    else:
        text = json.dumps(report.to_json(), indent=1) + "\n"
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def _score_prediction_file(store, path, task) -> float:
    frame = pd.read_csv(path)
    if task == "wdl":
        preds = [(r.p_win, r.p_draw, r.p_loss) for r in frame.itertuples()]
        outcomes = [store.record(int(r.match_id)).outcome for r in frame.itertuples()]
        return evalmod.mean_rps(preds, outcomes)
    preds = [(r.pred_home_goals, r.pred_away_goals) for r in frame.itertuples()]
    actuals = [(store.record(int(r.match_id)).home_goals,
                store.record(int(r.match_id)).away_goals)
               for r in frame.itertuples()]
    return evalmod.rmse(preds, actuals)


def _model_split_loss(store, builder, name, split, task, cfg, seed) -> float:
    val = split.validation_ids
    outcomes = [store.record(m).outcome for m in val]
    actual_goals = [(store.record(m).home_goals, store.record(m).away_goals)
                    for m in val]
    if name.startswith("file:"):
        frame = pd.read_csv(name[5:], index_col="match_id")
        rows = frame.loc[[m for m in val if m in frame.index]]
        if task == "wdl":
            preds = list(zip(rows.p_win, rows.p_draw, rows.p_loss))
            outs = [store.record(m).outcome for m in rows.index]
            return evalmod.mean_rps(preds, outs)
        preds = list(zip(rows.pred_home_goals, rows.pred_away_goals))
        acts = [(store.record(m).home_goals, store.record(m).away_goals)
                for m in rows.index]
        return evalmod.rmse(preds, acts)
    if name in evalmod.BASELINES:
        preds = evalmod.BASELINES[name](store, val)
        if task == "wdl":
            return evalmod.mean_rps(preds, outcomes)
        return evalmod.rmse(preds, actual_goals)
    if name == "berrar":
        eg = evalmod.berrar_eg_predictions(store, val, builder.cfg)
        return evalmod.rmse([eg[m] for m in val], actual_goals)
    if name == "gbt_table8":
        preds = _train_gbt_on_split(store, builder, split, task, cfg, seed)
        if task == "wdl":
            return evalmod.mean_rps(preds, outcomes)
        return evalmod.rmse(preds, actual_goals)
    raise PitchcastError(f"unknown model {name!r}")


# ---------------------------------------------------------------------- #
# parser / dispatch

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pitchcast")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", help="TOML or JSON config file")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=os.cpu_count(),
                        help="upper bound on internal parallelism")
    parser.add_argument("--json-errors", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse results CSV into a match store")
    p.add_argument("--input", required=True)
    p.add_argument("--append", action="append")
    p.add_argument("--out", required=True)

    p = sub.add_parser("ratings", help="replay ratings up to a date")
    p.add_argument("--store", required=True)
    p.add_argument("--as-of")
    p.add_argument("--out", required=True)

    p = sub.add_parser("features", help="build a feature matrix CSV")
    p.add_argument("--store", required=True)
    p.add_argument("--spec", default="all")
    p.add_argument("--matches", default="all")
    p.add_argument("--with-targets", action="store_true")
    p.add_argument("--out", required=True)

    p = sub.add_parser("tensors", help="export recency tensors for the deep model")
    p.add_argument("--store", required=True)
    p.add_argument("--matches", default="all")
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--out", required=True, help="output file prefix")

    p = sub.add_parser("splits", help="export the rolling-split match ids")
    p.add_argument("--store", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("select", help="run the feature selection pipeline")
    p.add_argument("--features", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--stage", choices=["all", "filter", "relieff", "cfs"],
                   default="all")
    p.add_argument("--out", required=True)

    p = sub.add_parser("train", help="train a boosted-tree model")
    p.add_argument("--task", choices=["score", "wdl"], required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--preset", default="table8")
    p.add_argument("--model-out", required=True)

    p = sub.add_parser("predict", help="predict with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("evaluate", help="rolling-split model comparison")
    p.add_argument("--store", required=True)
    p.add_argument("--models", required=True)
    p.add_argument("--task", choices=["wdl", "score"], default="wdl")
    p.add_argument("--splits", default="default", choices=["default", "none"])
    p.add_argument("--report", choices=["md", "csv", "json"], default="md")
    p.add_argument("--out")
    return parser


COMMANDS = {
    "ingest": lambda a, c, s: cmd_ingest(a, c),
    "ratings": lambda a, c, s: cmd_ratings(a, c),
    "features": lambda a, c, s: cmd_features(a, c),
    "tensors": lambda a, c, s: cmd_tensors(a, c),
    "splits": lambda a, c, s: cmd_splits(a, c),
    "select": lambda a, c, s: cmd_select(a, c),
    "train": lambda a, c, s: cmd_train(a, c, s),
    "predict": lambda a, c, s: cmd_predict(a, c),
    "evaluate": lambda a, c, s: cmd_evaluate(a, c, s),
}


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else EXIT_USAGE

    try:
        cfg = load_config(args.config)
        np.random.seed(args.seed)
        start = time.perf_counter()
        code = COMMANDS[args.command](args, cfg, args.seed)
        log.info("%s finished in %.2fs", args.command, time.perf_counter() - start)
        return code
    except (FileNotFoundError, PitchcastError) as err:
        _report_error(args, "input", err)
        return EXIT_INPUT
    except Exception as err:  # noqa: BLE001 - top-level guard
        _report_error(args, "internal", err)
        return EXIT_INTERNAL


def _report_error(args, kind: str, err: Exception) -> None:
    if getattr(args, "json_errors", False):
        sys.stderr.write(json.dumps(
            {"error": kind, "type": type(err).__name__, "message": str(err)}) + "\n")
    else:
        log.error("%s error: %s", kind, err)


if __name__ == "__main__":
    sys.exit(main())
