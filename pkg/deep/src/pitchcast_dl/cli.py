"""pitchcast-dl command line: train, grid, predict over exported tensors."""

import argparse
import json
import logging
import sys

import torch

from . import __version__, config
from .data import load_tensors
from .errors import DeepModelError
from .model import build_model
from .predict import prediction_rows, write_prediction_csv
from .train import grid_report_markdown, grid_search_dl, train

log = logging.getLogger("pitchcast-dl")

EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_INTERNAL = 3


def load_config(path, overrides=None) -> config.DeepConfig:
    data = {}
    if path:
        with open(path) as fh:
            data = json.load(fh)
    data.update(overrides or {})
    return config.from_dict(data)


def save_model(path, model, cfg) -> None:
    torch.save({
        "config": cfg.__dict__,
        "vocab_size": model.embedding.num_embeddings,
        "n_steps": model.n_steps,
        "state_dict": model.state_dict(),
    }, path)


def load_model(path):
    payload = torch.load(path, weights_only=True)
    cfg = config.from_dict(payload["config"])
    model = build_model(cfg, payload["vocab_size"], payload["n_steps"])
    model.load_state_dict(payload["state_dict"])
    return model


def cmd_train(args) -> int:
    cfg = load_config(args.config)
    train_set = load_tensors(args.tensors)
    valid_set = load_tensors(args.valid_tensors) if args.valid_tensors else None
    result = train(train_set, valid_set, cfg)
    save_model(args.model_out, result.model, cfg)
    if result.valid_rps:
        log.info("best valid RPS %.4f", result.best_valid_rps)
    log.info("wrote model to %s", args.model_out)
    return 0


def cmd_grid(args) -> int:
    with open(args.manifest) as fh:
        manifest = json.load(fh)
    splits = [(entry["name"], load_tensors(entry["train"]),
               load_tensors(entry["valid"])) for entry in manifest]
    base = load_config(args.config)
    grid = None
    if args.grid:
        with open(args.grid) as fh:
            grid = json.load(fh)
    best, rows = grid_search_dl(splits, grid, base)
    with open(args.report, "w") as fh:
        fh.write(grid_report_markdown(rows))
    log.info("best config: %s", best)
    print(json.dumps(best))
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    ts = load_tensors(args.tensors)
    write_prediction_csv(args.out, prediction_rows(model, ts))
    log.info("wrote %d predictions to %s", len(ts), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pitchcast-dl")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train on an exported tensor set")
    p.add_argument("--tensors", required=True, help="tensor file prefix")
    p.add_argument("--valid-tensors")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--model-out", required=True)

    p = sub.add_parser("grid", help="grid search over train/valid splits")
    p.add_argument("--manifest", required=True,
                   help="JSON list of {name, train, valid} tensor prefixes")
    p.add_argument("--config", help="JSON base config")
    p.add_argument("--grid", help="JSON lattice override (defaults to full)")
    p.add_argument("--report", required=True)

    p = sub.add_parser("predict", help="write the prediction CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--tensors", required=True)
    p.add_argument("--out", required=True)
    return parser


COMMANDS = {"train": cmd_train, "grid": cmd_grid, "predict": cmd_predict}


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except (FileNotFoundError, DeepModelError) as err:
        log.error("input error: %s", err)
        return EXIT_INPUT
    except Exception as err:  # noqa: BLE001 - top-level guard
        log.error("internal error: %s", err)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
