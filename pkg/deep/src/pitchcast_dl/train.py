"""Seeded training loop with cross-entropy loss and RPS model selection,
plus the grid search over the hyperparameter lattice."""

import copy
import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np
import torch

from .config import GRID, DeepConfig
from .data import TensorSet
from .errors import NonFiniteLoss
from .model import DeepModel, build_model


def rps_from_probs(probs: np.ndarray, labels: np.ndarray) -> float:
    """Mean ranked probability score; class order win, draw, loss."""
    cum_p = np.cumsum(probs[:, :2], axis=1)
    onehot = np.zeros_like(probs)
    onehot[np.arange(len(labels)), labels] = 1.0
    cum_a = np.cumsum(onehot[:, :2], axis=1)
    return float(((cum_p - cum_a) ** 2).sum(axis=1).mean() / 2.0)


def _to_torch(ts: TensorSet):
    return (torch.from_numpy(ts.numeric.astype(np.float32)),
            torch.from_numpy(ts.ids.astype(np.int64)))


@dataclass
class TrainResult:
    model: DeepModel
    train_losses: list[float] = field(default_factory=list)
    valid_rps: list[float] = field(default_factory=list)

    @property
    def best_valid_rps(self) -> float:
        return min(self.valid_rps) if self.valid_rps else math.nan


def evaluate_rps(model: DeepModel, ts: TensorSet) -> float:
    numeric, ids = _to_torch(ts)
    probs = model.predict_proba(numeric, ids).numpy()
    return rps_from_probs(probs, ts.labels)


def train(train_set: TensorSet, valid_set: TensorSet | None,
          cfg: DeepConfig | None = None,
          model: DeepModel | None = None) -> TrainResult:
    """Train with cross-entropy; keep the best-valid-RPS weights."""
    cfg = cfg or DeepConfig()
    if len(train_set) == 0:
        raise ValueError("empty training set")
    torch.manual_seed(cfg.seed)
    vocab = int(max(train_set.ids.max(),
                    valid_set.ids.max() if valid_set is not None else 0)) + 1
    if model is None:
        model = build_model(cfg, vocab, train_set.n_steps)
    result = TrainResult(model)
    if cfg.epochs == 0:
        return result

    numeric, ids = _to_torch(train_set)
    labels = torch.from_numpy(train_set.labels)
    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.learning_rate)
    loss_fn = torch.nn.CrossEntropyLoss()
    generator = torch.Generator().manual_seed(cfg.seed)
    best_state, best_rps = None, math.inf

    for _ in range(cfg.epochs):
        model.train()
        order = torch.randperm(len(train_set), generator=generator)
        epoch_loss, batches = 0.0, 0
        for start in range(0, len(order), cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            optimizer.zero_grad()
            logits = model(numeric[idx], ids[idx])
            loss = loss_fn(logits, labels[idx])
            if not torch.isfinite(loss):
                raise NonFiniteLoss(
                    f"loss {loss.item()} at epoch {len(result.train_losses)}")
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss.detach())
            batches += 1
        result.train_losses.append(epoch_loss / batches)
        if valid_set is not None:
            score = evaluate_rps(model, valid_set)
            result.valid_rps.append(score)
            if score < best_rps:
                best_rps = score
                best_state = copy.deepcopy(model.state_dict())
    if best_state is not None:
        model.load_state_dict(best_state)
    return result


def expand_grid(grid: dict[str, list] | None = None) -> list[dict]:
    grid = grid or GRID
    keys = sorted(grid)
    return [dict(zip(keys, combo))
            for combo in itertools.product(*(grid[k] for k in keys))]


@dataclass
class GridRow:
    params: dict
    split_rps: dict[str, float]

    @property
    def avg_rps(self) -> float:
        vals = list(self.split_rps.values())
        return sum(vals) / len(vals)

    @property
    def sigma(self) -> float:
        vals = list(self.split_rps.values())
        mu = self.avg_rps
        return math.sqrt(sum((v - mu) ** 2 for v in vals) / len(vals))

    @property
    def label(self) -> str:
        return repr(sorted(self.params.items()))


def grid_report_markdown(rows: list[GridRow]) -> str:
    lines = ["| Model | Avg Loss | Sigma |", "|---|---|---|"]
    for row in sorted(rows, key=lambda r: (r.avg_rps, r.sigma, r.label)):
        lines.append(f"| {row.label} | {row.avg_rps:.4f} | {row.sigma:.4f} |")
    return "\n".join(lines) + "\n"


def grid_search_dl(splits: list[tuple[str, TensorSet, TensorSet]],
                   grid: dict[str, list] | None = None,
                   base: DeepConfig | None = None) -> tuple[dict, list[GridRow]]:
    """Train every lattice point on every (name, train, valid) split.

    Selection matches the upstream evaluator: minimal average valid RPS,
    ties broken by smaller sigma, then lexicographic parameters.
    """
    if not splits:
        raise ValueError("need at least one split")
    base = base or DeepConfig()
    rows = []
    best = None
    for params in expand_grid(grid):
        cfg = replace(base, **params)
        losses = {}
        for name, train_set, valid_set in splits:
            result = train(train_set, valid_set, cfg)
            losses[name] = result.best_valid_rps
        row = GridRow(params, losses)
        rows.append(row)
        key = (row.avg_rps, row.sigma, row.label)
        if best is None or key < best[0]:
            best = (key, params)
    return best[1], rows
