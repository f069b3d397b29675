"""Gradient-boosted decision trees with ordered target encoding.

Exact greedy splits over sorted unique values, Newton leaf values with L2
regularization, learned default direction for missing values. Multiclass
softmax (one tree per class per iteration) and squared-error regression.
Categorical columns are encoded with prefix-only ordered target statistics
along a single seeded permutation, so no row's encoding ever sees its own
or any later target value.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import DegenerateTarget, NonFiniteFeature, SchemaMismatch

CLASSES = ("W", "D", "L")


@dataclass(frozen=True)
class GbtConfig:
    iterations: int = 500
    learning_rate: float = 0.1
    max_depth: int = 6
    min_child_weight: float = 1.0
    l2_leaf_reg: float = 3.0
    objective: str = "multiclass_softmax"   # or "squared_error"
    ordered_encoding_prior: float = 1.0
    permutation_seed: int = 0
    early_stopping_rounds: int | None = None

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0 < self.learning_rate <= 1:
            raise ValueError("learning_rate must be in (0, 1]")
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if self.objective not in ("multiclass_softmax", "squared_error"):
            raise ValueError(f"unknown objective {self.objective!r}")


def ordered_encode(column, target, prior: float, global_prior: float,
                   order: np.ndarray | None = None) -> np.ndarray:
    """Prefix-only target statistics along a fixed permutation.

    encoded(i) = (sum of targets of *prior* rows with the same category
    + a*P) / (count of prior rows with the same category + a).
    """
    column = np.asarray(column)
    target = np.asarray(target, dtype=float)
    n = len(column)
    if order is None:
        order = np.arange(n)
    encoded = np.empty(n)
    sums: dict = {}
    counts: dict = {}
    for i in order:
        cat = column[i]
        s = sums.get(cat, 0.0)
        c = counts.get(cat, 0)
        encoded[i] = (s + prior * global_prior) / (c + prior)
        sums[cat] = s + target[i]
        counts[cat] = c + 1
    return encoded


def softmax(scores: np.ndarray) -> np.ndarray:
    z = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def log_loss(probs: np.ndarray, y_index: np.ndarray) -> float:
    p = np.clip(probs[np.arange(len(y_index)), y_index], 1e-15, 1.0)
    return float(-np.log(p).mean())


# ---------------------------------------------------------------------- #
# regression tree on (gradient, hessian)

class _Node:
    __slots__ = ("feature", "threshold", "missing_left", "left", "right", "value")

    def __init__(self):
        self.feature = -1
        self.threshold = 0.0
        self.missing_left = True
        self.left = None
        self.right = None
        self.value = 0.0

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"value": self.value}
        return {"feature": self.feature, "threshold": self.threshold,
                "missing_left": self.missing_left,
                "left": self.left.to_dict(), "right": self.right.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "_Node":
        node = cls()
        if "value" in d:
            node.value = d["value"]
            return node
        node.feature = d["feature"]
        node.threshold = d["threshold"]
        node.missing_left = d["missing_left"]
        node.left = cls.from_dict(d["left"])
        node.right = cls.from_dict(d["right"])
        return node


def _leaf_value(g_sum: float, h_sum: float, reg: float) -> float:
    return -g_sum / (h_sum + reg)


def _best_split(x: np.ndarray, g: np.ndarray, h: np.ndarray, reg: float,
                min_child: float) -> tuple[float, float, bool] | None:
    """Best (gain, threshold, missing_left) for one feature column."""
    miss = np.isnan(x)
    xs = x[~miss]
    if len(xs) < 2:
        return None
    gs, hs = g[~miss], h[~miss]
    order = np.argsort(xs, kind="stable")
    xs, gs, hs = xs[order], gs[order], hs[order]
    g_miss, h_miss = g[miss].sum(), h[miss].sum()
    g_total, h_total = g.sum(), h.sum()
    parent = g_total * g_total / (h_total + reg)

    cg = np.cumsum(gs)
    ch = np.cumsum(hs)
    cut = np.flatnonzero(xs[:-1] < xs[1:])   # split between distinct values
    if len(cut) == 0:
        return None
    best = None
    for routes_left in (True, False):
        gl = cg[cut] + (g_miss if routes_left else 0.0)
        hl = ch[cut] + (h_miss if routes_left else 0.0)
        gr = (g_total - gl)
        hr = (h_total - hl)
        ok = (hl >= min_child) & (hr >= min_child)
        if not ok.any():
            continue
        gain = gl * gl / (hl + reg) + gr * gr / (hr + reg) - parent
        gain[~ok] = -np.inf
        idx = int(np.argmax(gain))
        if best is None or gain[idx] > best[0] + 1e-12:
            thr = 0.5 * (xs[cut[idx]] + xs[cut[idx] + 1])
            best = (float(gain[idx]), thr, routes_left)
    return best


def _grow(x: np.ndarray, g: np.ndarray, h: np.ndarray, cfg: GbtConfig,
          depth: int) -> _Node:
    node = _Node()
    if depth >= cfg.max_depth or len(g) < 2:
        node.value = _leaf_value(g.sum(), h.sum(), cfg.l2_leaf_reg)
        return node
    best = None
    for f in range(x.shape[1]):
        cand = _best_split(x[:, f], g, h, cfg.l2_leaf_reg, cfg.min_child_weight)
        if cand is not None and cand[0] > 1e-12 and (best is None or cand[0] > best[0][0]):
            best = (cand, f)
    if best is None:
        node.value = _leaf_value(g.sum(), h.sum(), cfg.l2_leaf_reg)
        return node
    (gain, thr, missing_left), f = best
    col = x[:, f]
    miss = np.isnan(col)
    left = (col <= thr) | (miss & missing_left)
    node.feature = f
    node.threshold = thr
    node.missing_left = missing_left
    node.left = _grow(x[left], g[left], h[left], cfg, depth + 1)
    node.right = _grow(x[~left], g[~left], h[~left], cfg, depth + 1)
    return node


def _tree_predict(node: _Node, x: np.ndarray) -> np.ndarray:
    out = np.empty(len(x))
    stack = [(node, np.arange(len(x)))]
    while stack:
        nd, idx = stack.pop()
        if nd.is_leaf:
            out[idx] = nd.value
            continue
        col = x[idx, nd.feature]
        miss = np.isnan(col)
        left = (col <= nd.threshold) | (miss & nd.missing_left)
        stack.append((nd.left, idx[left]))
        stack.append((nd.right, idx[~left]))
    return out


# ---------------------------------------------------------------------- #
# model

@dataclass
class EncodingTable:
    """Frozen category -> (target sum, count) statistics for inference."""

    prior: float
    global_prior: float
    stats: dict = field(default_factory=dict)

    def encode(self, values) -> np.ndarray:
        out = np.empty(len(values))
        for i, v in enumerate(values):
            s, c = self.stats.get(v, (0.0, 0))
            out[i] = (s + self.prior * self.global_prior) / (c + self.prior)
        return out


@dataclass
class GbtModel:
    cfg: GbtConfig
    feature_names: list[str]
    base_score: list[float]          # length 1 (regression) or n_classes
    trees: list[list[_Node]]         # per iteration, one tree per output
    encodings: dict[str, EncodingTable]
    train_curve: list[float]
    valid_curve: list[float] = field(default_factory=list)
    best_iteration: int | None = None

    @property
    def is_multiclass(self) -> bool:
        return self.cfg.objective == "multiclass_softmax"

    def _design(self, rows: pd.DataFrame) -> np.ndarray:
        missing = [f for f in self.feature_names if f not in rows.columns]
        if missing:
            raise SchemaMismatch(f"rows lack features: {missing}")
        cols = []
        for name in self.feature_names:
            col = rows[name]
            if name in self.encodings:
                cols.append(self.encodings[name].encode(col.tolist()))
            else:
                cols.append(col.to_numpy(dtype=float))
        return np.column_stack(cols) if cols else np.empty((len(rows), 0))

    def raw_scores(self, rows: pd.DataFrame) -> np.ndarray:
        x = self._design(rows)
        n_out = len(self.base_score)
        scores = np.tile(np.asarray(self.base_score), (len(rows), 1))
        upto = self.best_iteration if self.best_iteration is not None else len(self.trees)
        for it in self.trees[:upto]:
            for c in range(n_out):
                scores[:, c] += self.cfg.learning_rate * _tree_predict(it[c], x)
        return scores

    def predict(self, rows: pd.DataFrame):
        """Simplex triples (multiclass, class order W/D/L) or real values."""
        scores = self.raw_scores(rows)
        if self.is_multiclass:
            return softmax(scores)
        return scores[:, 0]

    # -- serialization ------------------------------------------------- #

    def to_json(self) -> str:
        return json.dumps({
            "format_version": 1,
            "config": self.cfg.__dict__,
            "feature_names": self.feature_names,
            "base_score": self.base_score,
            "best_iteration": self.best_iteration,
            "encodings": {
                name: {"prior": t.prior, "global_prior": t.global_prior,
                       "stats": {str(k): list(v) for k, v in t.stats.items()}}
                for name, t in self.encodings.items()},
            "trees": [[t.to_dict() for t in it] for it in self.trees],
            "train_curve": self.train_curve,
            "valid_curve": self.valid_curve,
        })

    @classmethod
    def from_json(cls, text: str) -> "GbtModel":
        d = json.loads(text)
        cfg = GbtConfig(**d["config"])
        encodings = {
            name: EncodingTable(e["prior"], e["global_prior"],
                                {k: tuple(v) for k, v in e["stats"].items()})
            for name, e in d["encodings"].items()}
        trees = [[_Node.from_dict(t) for t in it] for it in d["trees"]]
        return cls(cfg, d["feature_names"], d["base_score"], trees,
                   encodings, d["train_curve"], d["valid_curve"],
                   d["best_iteration"])


def _encode_target(y, multiclass: bool):
    if multiclass:
        values = np.asarray(y)
        index = {c: i for i, c in enumerate(CLASSES)}
        if not all(v in index for v in values):
            classes = sorted(set(values))
            index = {c: i for i, c in enumerate(classes)}
        if len(set(values)) < 2:
            raise DegenerateTarget("single-class target")
        return np.array([index[v] for v in values]), list(index)
    values = np.asarray(y, dtype=float)
    if np.all(values == values[0]):
        raise DegenerateTarget("constant regression target")
    return values, None


def fit(train: pd.DataFrame, y, cfg: GbtConfig | None = None,
        valid: tuple[pd.DataFrame, object] | None = None,
        feature_names: list[str] | None = None) -> GbtModel:
    """Train a boosted ensemble. ``train`` holds feature columns only."""
    cfg = cfg or GbtConfig()
    if len(train) < 2:
        raise DegenerateTarget("need at least 2 rows")
    feature_names = feature_names or list(train.columns)
    multiclass = cfg.objective == "multiclass_softmax"
    y_enc, classes = _encode_target(y, multiclass)

    # ordered target encoding for non-numeric columns
    rng = np.random.default_rng(cfg.permutation_seed)
    order = rng.permutation(len(train))
    scalar_target = (y_enc.astype(float) / max(1, (len(classes) - 1))
                     if multiclass else y_enc)
    encodings: dict[str, EncodingTable] = {}
    cols = []
    for name in feature_names:
        col = train[name]
        if col.dtype.kind in "ifb":
            arr = col.to_numpy(dtype=float)
            if np.isinf(arr).any():
                raise NonFiniteFeature(name)
            cols.append(arr)
        else:
            values = col.tolist()
            table = EncodingTable(cfg.ordered_encoding_prior,
                                  float(scalar_target.mean()))
            for v, t in zip(values, scalar_target):
                s, c = table.stats.get(v, (0.0, 0))
                table.stats[v] = (s + float(t), c + 1)
            encodings[name] = table
            cols.append(ordered_encode(values, scalar_target,
                                       cfg.ordered_encoding_prior,
                                       float(scalar_target.mean()), order))
    x = np.column_stack(cols) if cols else np.empty((len(train), 0))

    if multiclass:
        n_class = len(classes)
        counts = np.bincount(y_enc, minlength=n_class).astype(float)
        priors = np.clip(counts / counts.sum(), 1e-12, None)
        base = np.log(priors)
        scores = np.tile(base, (len(train), 1))
        y_onehot = np.zeros((len(train), n_class))
        y_onehot[np.arange(len(train)), y_enc] = 1.0
    else:
        base = np.array([y_enc.mean()])
        scores = np.tile(base, (len(train), 1))

    model = GbtModel(cfg, feature_names, base.tolist(), [], encodings, [])

    if valid is not None:
        xv_frame, yv = valid
        yv_enc, _ = _encode_target(yv, multiclass)
        xv = model._design(xv_frame)
        scores_v = np.tile(base, (len(xv_frame), 1))

    best_valid = math.inf
    best_iter = None
    for it in range(cfg.iterations):
        if multiclass:
            p = softmax(scores)
            model.train_curve.append(log_loss(p, y_enc))
            grads = p - y_onehot
            hess = np.clip(p * (1.0 - p), 1e-9, None)
        else:
            resid = scores[:, 0] - y_enc
            model.train_curve.append(float((resid ** 2).mean()))
            grads = resid[:, None]
            hess = np.ones_like(grads)
        iteration_trees = []
        for c in range(grads.shape[1]):
            tree = _grow(x, grads[:, c], hess[:, c], cfg, 0)
            iteration_trees.append(tree)
            scores[:, c] += cfg.learning_rate * _tree_predict(tree, x)
        model.trees.append(iteration_trees)

        if valid is not None:
            for c, tree in enumerate(iteration_trees):
                scores_v[:, c] += cfg.learning_rate * _tree_predict(tree, xv)
            if multiclass:
                vloss = log_loss(softmax(scores_v), yv_enc)
            else:
                vloss = float(((scores_v[:, 0] - yv_enc) ** 2).mean())
            model.valid_curve.append(vloss)
            if vloss < best_valid - 1e-12:
                best_valid, best_iter = vloss, it + 1
            elif (cfg.early_stopping_rounds is not None and best_iter is not None
                  and it + 1 - best_iter >= cfg.early_stopping_rounds):
                model.best_iteration = best_iter
                break
    if valid is not None and cfg.early_stopping_rounds is not None:
        model.best_iteration = best_iter
    return model
