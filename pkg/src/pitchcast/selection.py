"""Three-stage feature selection: filter rankers -> ReliefF -> CFS.

Stage 1 scores every feature with four filter methods (chi-square,
symmetrical uncertainty, Pearson correlation, information gain) and keeps
the 20 best by median rank. Stage 2 keeps ReliefF's top 20. The union
(<= 40 names) feeds a CFS best-first subset search.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import DegenerateTarget, TooFewInstances

DEFAULT_BINS = 10

#: Selected feature sets shipped as presets, so the model stages can run
#: without re-running selection.
PRESETS = {
    "home_goals": ["EG_HT", "GS_avg_HT"],
    "away_goals": ["Home_venue_GS_avg_AT", "GC_avg_HT", "pi_rating_AT",
                   "GC_AVG_HT", "previous_GD_AT"],
    "wdl": ["EG_HT", "EG_AT", "point_per_match_HT", "win_pct_AT",
            "pi_rating_HT", "pi_rating_AT"],
}

#: Class order for binned regression targets.
GOAL_BINS = ("0", "1", "2", "3+")


def bin_goals(goals) -> np.ndarray:
    """Discretize a goal-count target into {0,1,2,3+} classes."""
    out = np.asarray(goals, dtype=float)
    labels = np.where(out >= 3, 3, out).astype(int)
    return np.array([GOAL_BINS[v] for v in labels])


def impute_median(matrix: pd.DataFrame) -> pd.DataFrame:
    filled = matrix.copy()
    for col in filled.columns:
        med = 0.0 if filled[col].isna().all() else filled[col].median()
        filled[col] = filled[col].fillna(0.0 if math.isnan(med) else med)
    return filled


def equal_frequency_bins(values: np.ndarray, bins: int = DEFAULT_BINS) -> np.ndarray:
    """Integer bin codes by rank; equal-frequency up to ties."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty_like(order)
    ranks[order] = np.arange(len(values))
    codes = (ranks * bins) // len(values)
    # equal values must land in the same bin
    out = np.empty(len(values), dtype=int)
    seen: dict[float, int] = {}
    for i in np.argsort(values, kind="stable"):
        v = float(values[i])
        if v not in seen:
            seen[v] = int(codes[i])
        out[i] = seen[v]
    return out


def _entropy(codes: np.ndarray) -> float:
    _, counts = np.unique(codes, return_counts=True)
    p = counts / counts.sum()
    return float(-(p * np.log2(p)).sum())


def _mutual_info(x: np.ndarray, y: np.ndarray) -> float:
    joint: dict[tuple, int] = {}
    for pair in zip(x, y):
        joint[pair] = joint.get(pair, 0) + 1
    n = len(x)
    hx, hy = _entropy(x), _entropy(np.asarray(y))
    hxy = 0.0
    for cnt in joint.values():
        p = cnt / n
        hxy -= p * math.log2(p)
    return max(0.0, hx + hy - hxy)


def symmetrical_uncertainty(x: np.ndarray, y: np.ndarray) -> float:
    hx, hy = _entropy(x), _entropy(y)
    if hx + hy == 0:
        return 0.0
    return 2.0 * _mutual_info(x, y) / (hx + hy)


def chi_square(x: np.ndarray, y: np.ndarray) -> float:
    """Pearson chi-square statistic of the (feature-bin x class) table."""
    xs, x_inv = np.unique(x, return_inverse=True)
    ys, y_inv = np.unique(y, return_inverse=True)
    table = np.zeros((len(xs), len(ys)))
    np.add.at(table, (x_inv, y_inv), 1)
    n = table.sum()
    expected = table.sum(axis=1, keepdims=True) * table.sum(axis=0, keepdims=True) / n
    mask = expected > 0
    return float((((table - expected) ** 2)[mask] / expected[mask]).sum())


def _class_codes(target) -> np.ndarray:
    values = np.asarray(target)
    classes, codes = np.unique(values, return_inverse=True)
    if len(classes) < 2:
        raise DegenerateTarget("target has a single class")
    return codes


def _ordinal_target(target) -> np.ndarray:
    """Numeric encoding for Pearson correlation against an ordered target."""
    values = np.asarray(target)
    order = {"L": 0.0, "D": 1.0, "W": 2.0}
    if all(v in order for v in values):
        return np.array([order[v] for v in values])
    if values.dtype.kind in "if":
        return values.astype(float)
    classes = sorted(set(values))
    index = {c: float(i) for i, c in enumerate(classes)}
    return np.array([index[v] for v in values])


@dataclass
class RankedFeatures:
    scores: pd.DataFrame   # per-feature scores, ranks, and median_rank

    def top_k(self, k: int = 20) -> list[str]:
        ordered = self.scores.sort_values(
            ["median_rank"], kind="stable").index.tolist()
        return ordered[:k]


def _ranks(scores: pd.Series) -> pd.Series:
    # descending score, ties broken by ascending feature name
    order = sorted(scores.index, key=lambda name: (-scores[name], name))
    return pd.Series({name: i + 1 for i, name in enumerate(order)})


def filter_rank(matrix: pd.DataFrame, target, bins: int = DEFAULT_BINS) -> RankedFeatures:
    """Score every feature with the four filter methods and rank them."""
    if len(matrix) < 2:
        raise DegenerateTarget("need at least 2 rows")
    y_codes = _class_codes(target)
    y_num = _ordinal_target(target)
    filled = impute_median(matrix)
    rows = {}
    for col in filled.columns:
        x = filled[col].to_numpy(dtype=float)
        codes = equal_frequency_bins(x, bins)
        ig = _mutual_info(codes, y_codes)
        su = symmetrical_uncertainty(codes, y_codes)
        chi = chi_square(codes, y_codes)
        sx = x.std()
        corr = (abs(float(np.corrcoef(x, y_num)[0, 1]))
                if sx > 0 and y_num.std() > 0 else 0.0)
        rows[col] = {"chi_square": chi, "info_gain": ig,
                     "sym_uncertainty": su, "correlation": corr}
    scores = pd.DataFrame.from_dict(rows, orient="index")
    for method in scores.columns.tolist():
        scores[f"rank_{method}"] = _ranks(scores[method])
    rank_cols = [c for c in scores.columns if c.startswith("rank_")]
    scores["median_rank"] = scores[rank_cols].median(axis=1)
    scores = scores.sort_values("median_rank", kind="stable")
    scores = scores.loc[sorted(scores.index, key=lambda n: (scores.at[n, "median_rank"], n))]
    return RankedFeatures(scores)


def top_k_by_median(ranked: RankedFeatures, k: int = 20) -> list[str]:
    return ranked.top_k(k)


def relieff(matrix: pd.DataFrame, target, k_neighbors: int = 10,
            sample_count: int | None = None) -> tuple[pd.Series, list[str]]:
    """ReliefF weights (Kononenko multi-class form) and the 20 best features.

    Features are min-max normalized internally; distances are Manhattan.
    Neighbor ties break on (distance, row index).
    """
    y = np.asarray(target)
    classes, counts = np.unique(y, return_counts=True)
    if len(classes) < 2:
        raise DegenerateTarget("target has a single class")
    if counts.min() < k_neighbors + 1:
        raise TooFewInstances(
            f"need at least {k_neighbors + 1} instances per class")
    filled = impute_median(matrix)
    x = filled.to_numpy(dtype=float)
    span = x.max(axis=0) - x.min(axis=0)
    span[span == 0] = 1.0
    x = (x - x.min(axis=0)) / span

    n, n_feat = x.shape
    priors = {c: cnt / n for c, cnt in zip(classes, counts)}
    by_class = {c: np.flatnonzero(y == c) for c in classes}
    sample = range(n) if sample_count is None else range(min(sample_count, n))
    weights = np.zeros(n_feat)
    for i in sample:
        dists = np.abs(x - x[i]).sum(axis=1)
        own = y[i]
        for c in classes:
            members = by_class[c]
            members = members[members != i] if c == own else members
            order = sorted(members, key=lambda j: (dists[j], j))[:k_neighbors]
            diffs = np.abs(x[order] - x[i]).sum(axis=0)
            if c == own:
                weights -= diffs
            else:
                weights += priors[c] / (1.0 - priors[own]) * diffs
    m = len(range(n) if sample_count is None else sample)
    weights /= m * k_neighbors
    scores = pd.Series(weights, index=filled.columns)
    top = sorted(scores.index, key=lambda name: (-scores[name], name))[:20]
    return scores, top


@dataclass
class SubsetResult:
    selected: list[str]
    merit: float
    trace: list[tuple[float, tuple[str, ...]]] = field(default_factory=list)


def _su_tables(matrix: pd.DataFrame, target, bins: int):
    filled = impute_median(matrix)
    y_codes = _class_codes(target)
    codes = {col: equal_frequency_bins(filled[col].to_numpy(dtype=float), bins)
             for col in filled.columns}
    r_cf = {col: symmetrical_uncertainty(codes[col], y_codes) for col in codes}
    cache: dict[tuple[str, str], float] = {}

    def r_ff(a: str, b: str) -> float:
        key = (a, b) if a < b else (b, a)
        if key not in cache:
            cache[key] = symmetrical_uncertainty(codes[key[0]], codes[key[1]])
        return cache[key]

    return r_cf, r_ff


def cfs_merit(subset, r_cf, r_ff) -> float:
    k = len(subset)
    if k == 0:
        return 0.0
    mean_cf = sum(r_cf[f] for f in subset) / k
    if k == 1:
        return mean_cf
    pairs = [(a, b) for i, a in enumerate(subset) for b in subset[i + 1:]]
    mean_ff = sum(r_ff(a, b) for a, b in pairs) / len(pairs)
    return k * mean_cf / math.sqrt(k + k * (k - 1) * mean_ff)


def cfs_select(matrix: pd.DataFrame, target, bins: int = DEFAULT_BINS,
               stall_limit: int = 5, greedy: bool = False) -> SubsetResult:
    """Best-first forward search over feature subsets by CFS merit."""
    names = sorted(matrix.columns)
    r_cf, r_ff = _su_tables(matrix[names], target, bins)
    best_set: tuple[str, ...] = ()
    best_merit = -math.inf
    trace: list[tuple[float, tuple[str, ...]]] = []
    if greedy:
        current: list[str] = []
        while True:
            candidates = [tuple(sorted(current + [f])) for f in names if f not in current]
            if not candidates:
                break
            merits = [(cfs_merit(list(s), r_cf, r_ff), s) for s in candidates]
            merit, subset = max(merits, key=lambda ms: (ms[0], tuple(reversed(ms[1]))))
            trace.append((merit, subset))
            if merit <= best_merit:
                break
            best_merit, best_set = merit, subset
            current = list(subset)
    else:
        heap: list[tuple[float, tuple[str, ...]]] = [(0.0, ())]
        visited = {()}
        stall = 0
        while heap and stall < stall_limit:
            neg_merit, subset = heapq.heappop(heap)
            improved = False
            for f in names:
                if f in subset:
                    continue
                child = tuple(sorted(subset + (f,)))
                if child in visited:
                    continue
                visited.add(child)
                merit = cfs_merit(list(child), r_cf, r_ff)
                trace.append((merit, child))
                heapq.heappush(heap, (-merit, child))
                if merit > best_merit + 1e-12:
                    best_merit, best_set = merit, child
                    improved = True
            stall = 0 if improved else stall + 1
    if not best_set and names:
        best_set = (names[0],)
        best_merit = cfs_merit([names[0]], r_cf, r_ff)
    return SubsetResult(list(best_set), best_merit, trace)


@dataclass
class PipelineResult:
    filter_top: list[str]
    relieff_top: list[str]
    candidates: list[str]
    subset: SubsetResult


def run_pipeline(matrix: pd.DataFrame, target, k: int = 20,
                 k_neighbors: int = 10, bins: int = DEFAULT_BINS) -> PipelineResult:
    """filter rankers -> median top-k; ReliefF top-k; union; CFS search."""
    ranked = filter_rank(matrix, target, bins)
    filter_top = ranked.top_k(k)
    _, relieff_top = relieff(matrix, target, k_neighbors)
    relieff_top = relieff_top[:k]
    candidates = list(dict.fromkeys(filter_top + relieff_top))
    subset = cfs_select(matrix[candidates], target, bins)
    return PipelineResult(filter_top, relieff_top, candidates, subset)
