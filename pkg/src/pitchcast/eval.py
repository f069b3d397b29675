"""Metrics, baselines, the rolling three-split protocol, and reporting.

RMSE pools home and away goal errors into a single score (N counts goal
values). RPS is the mean squared cumulative-probability error over the
ordered outcomes win > draw > loss, normalized to [0, 1].
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (DegenerateTarget, EmptyInput, InsufficientHistory,
                     InvalidSimplex)
from .ingest import MatchStore
from .ratings import RatingConfig, RatingReplayer

OUTCOME_INDEX = {"W": 0, "D": 1, "L": 2}
DEFAULT_ANCHORS = ("18-19", "19-20", "20-21")


def rmse(predictions, actuals) -> float:
    """Root mean squared error over all 2N goal values (home, away pooled)."""
    predictions = list(predictions)
    actuals = list(actuals)
    if not predictions or len(predictions) != len(actuals):
        raise EmptyInput("need equal, nonempty prediction/actual lists")
    total = 0.0
    count = 0
    for (ph, pa), (ah, aa) in zip(predictions, actuals):
        total += (ph - ah) ** 2 + (pa - aa) ** 2
        count += 2
    return math.sqrt(total / count)


def one_hot(outcome: str) -> tuple[float, float, float]:
    onehot = [0.0, 0.0, 0.0]
    onehot[OUTCOME_INDEX[outcome]] = 1.0
    return tuple(onehot)


def rps(prediction, outcome) -> float:
    """Ranked probability score of one (p_win, p_draw, p_loss) triple."""
    p = tuple(float(v) for v in prediction)
    if len(p) != 3 or any(v < -1e-9 or v > 1 + 1e-9 for v in p) \
            or abs(sum(p) - 1.0) > 1e-6:
        raise InvalidSimplex(f"not a probability triple: {prediction}")
    a = one_hot(outcome) if isinstance(outcome, str) else tuple(outcome)
    total = 0.0
    cp = ca = 0.0
    for i in range(2):
        cp += p[i]
        ca += a[i]
        total += (cp - ca) ** 2
    return total / 2.0


def mean_rps(predictions, outcomes) -> float:
    pairs = list(zip(predictions, outcomes))
    if not pairs:
        raise EmptyInput("no predictions")
    return sum(rps(p, o) for p, o in pairs) / len(pairs)


# ---------------------------------------------------------------------- #
# rolling splits

@dataclass(frozen=True)
class SplitSpec:
    anchor_seasons: tuple[str, ...] = DEFAULT_ANCHORS
    train_years: int = 5
    validation_round_count: int = 2
    round_x: dict | None = None        # per-league override
    round_percentile: float = 0.75


@dataclass
class Split:
    anchor_season: str
    train_ids: list[int]
    validation_ids: list[int]


def resolve_round_x(store: MatchStore, league: str, season: str,
                    spec: SplitSpec) -> int:
    if spec.round_x and league in spec.round_x:
        return int(spec.round_x[league])
    rounds = store.rounds()
    season_rounds = [rounds[mid] for mid in store.league_matches(league)
                     if store.record(mid).season == season]
    if not season_rounds:
        raise InsufficientHistory(f"{league} has no {season} season")
    top = max(season_rounds)
    return max(1, int(round(spec.round_percentile * top)))


def make_splits(store: MatchStore, spec: SplitSpec | None = None) -> list[Split]:
    """One train/validation split per anchor season.

    Validation: rounds x and x+1 of the anchor season, per league. Train:
    the anchor season plus the previous (train_years - 1) seasons, restricted
    to matches dated strictly before the league's first validation match.
    """
    spec = spec or SplitSpec()
    rounds = store.rounds()
    splits = []
    for anchor in spec.anchor_seasons:
        train_ids: list[int] = []
        valid_ids: list[int] = []
        for league in store.leagues():
            seasons = store.seasons(league)
            if anchor not in seasons:
                continue
            x = resolve_round_x(store, league, anchor, spec)
            val_rounds = set(range(x, x + spec.validation_round_count))
            league_valid = [mid for mid in store.league_matches(league)
                            if store.record(mid).season == anchor
                            and rounds[mid] in val_rounds
                            and store.record(mid).played]
            has_last = any(rounds[mid] == x + spec.validation_round_count - 1
                           for mid in league_valid)
            if not league_valid or not has_last:
                continue
            first_val_date = min(store.record(mid).date for mid in league_valid)
            pos = seasons.index(anchor)
            window = set(seasons[max(0, pos - spec.train_years + 1): pos + 1])
            league_train = [mid for mid in store.league_matches(league)
                            if store.record(mid).season in window
                            and store.record(mid).played
                            and store.record(mid).date < first_val_date]
            train_ids.extend(league_train)
            valid_ids.extend(league_valid)
        if not valid_ids:
            raise InsufficientHistory(f"no validation matches for season {anchor}")
        splits.append(Split(anchor, sorted(train_ids), sorted(valid_ids)))
    return splits


# ---------------------------------------------------------------------- #
# baselines

def _prior_matches(store: MatchStore, league: str, before: int):
    return [store.record(m) for m in store.league_matches(league)
            if m < before and store.record(m).played]


def baseline_home_win(store: MatchStore, match_ids) -> list[tuple]:
    return [(1.0, 0.0, 0.0) for _ in match_ids]


def baseline_wdl_percentage(store: MatchStore, match_ids) -> list[tuple]:
    """Laplace-smoothed blend of the home team's home W/D/L counts and the
    away team's away counts (mirrored to the home perspective)."""
    out = []
    for mid in match_ids:
        rec = store.record(mid)
        counts = [1.0, 1.0, 1.0]
        for prior in _prior_matches(store, rec.league, mid):
            if prior.home_team == rec.home_team:
                counts[OUTCOME_INDEX[prior.outcome]] += 1
            if prior.away_team == rec.away_team:
                # away team's away counts enter in (L, D, W) order: its away
                # losses support a home win today, its away wins a home loss —
                # and the prior match's home-perspective outcome encodes
                # exactly that, so no mirroring is needed.
                counts[OUTCOME_INDEX[prior.outcome]] += 1
        total = sum(counts)
        out.append(tuple(c / total for c in counts))
    return out


def baseline_team_average(store: MatchStore, match_ids) -> list[tuple]:
    """Home goals = mean(home team's scored, away team's conceded); away
    analogous. Cold teams fall back to league means."""
    out = []
    for mid in match_ids:
        rec = store.record(mid)
        prior = _prior_matches(store, rec.league, mid)
        league_home = [p.home_goals for p in prior]
        league_away = [p.away_goals for p in prior]
        home_scored, away_conceded, away_scored, home_conceded = [], [], [], []
        for p in prior:
            if p.home_team == rec.home_team:
                home_scored.append(p.home_goals); home_conceded.append(p.away_goals)
            if p.away_team == rec.home_team:
                home_scored.append(p.away_goals); home_conceded.append(p.home_goals)
            if p.home_team == rec.away_team:
                away_scored.append(p.home_goals); away_conceded.append(p.away_goals)
            if p.away_team == rec.away_team:
                away_scored.append(p.away_goals); away_conceded.append(p.home_goals)

        def mean(xs, fallback):
            pool = xs if xs else fallback
            return sum(pool) / len(pool) if pool else 1.0

        home = (mean(home_scored, league_home) + mean(away_conceded, league_away)) / 2
        away = (mean(away_scored, league_away) + mean(home_conceded, league_home)) / 2
        out.append((home, away))
    return out


def baseline_league_average(store: MatchStore, match_ids) -> list[tuple]:
    out = []
    for mid in match_ids:
        rec = store.record(mid)
        prior = _prior_matches(store, rec.league, mid)
        if prior:
            home = sum(p.home_goals for p in prior) / len(prior)
            away = sum(p.away_goals for p in prior) / len(prior)
        else:
            home = away = 1.0
        out.append((home, away))
    return out


def berrar_eg_predictions(store: MatchStore, match_ids,
                          cfg: RatingConfig | None = None) -> dict[int, tuple]:
    """Pre-match Berrar expected goals via one chronological replay."""
    wanted = set(match_ids)
    rep = RatingReplayer(cfg)
    out: dict[int, tuple] = {}
    for rec in store:
        if rec.match_id in wanted:
            out[rec.match_id] = rep.expected_goals(rec)
        rep.apply(rec)
    return out


BASELINES = {
    "home_win": baseline_home_win,
    "wdl_percentage": baseline_wdl_percentage,
    "team_average": baseline_team_average,
    "league_average": baseline_league_average,
}


def baselines(store: MatchStore, match_ids, names=None) -> dict[str, list]:
    names = names or list(BASELINES)
    return {name: BASELINES[name](store, match_ids) for name in names}


# ---------------------------------------------------------------------- #
# reporting

@dataclass
class ModelResult:
    model: str
    split_losses: dict[str, float]

    @property
    def avg_loss(self) -> float:
        losses = list(self.split_losses.values())
        return sum(losses) / len(losses)

    @property
    def sigma(self) -> float:
        losses = list(self.split_losses.values())
        mu = self.avg_loss
        return math.sqrt(sum((x - mu) ** 2 for x in losses) / len(losses))


@dataclass
class EvaluationReport:
    metric: str
    results: list[ModelResult] = field(default_factory=list)

    def sorted_results(self) -> list[ModelResult]:
        return sorted(self.results, key=lambda r: (r.avg_loss, r.sigma, r.model))

    def to_markdown(self) -> str:
        lines = [f"| Model | Avg Loss | Sigma |", "|---|---|---|"]
        for r in self.sorted_results():
            lines.append(f"| {r.model} | {r.avg_loss:.4f} | {r.sigma:.4f} |")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        lines = ["Model,Avg Loss,Sigma"]
        for r in self.sorted_results():
            lines.append(f"{r.model},{r.avg_loss:.6f},{r.sigma:.6f}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {"metric": self.metric, "models": [
            {"model": r.model, "split_losses": r.split_losses,
             "avg_loss": r.avg_loss, "sigma": r.sigma}
            for r in self.sorted_results()]}


# ---------------------------------------------------------------------- #
# grid search

def expand_grid(grid: dict[str, list]) -> list[dict]:
    if not grid:
        raise ValueError("empty grid")
    keys = sorted(grid)
    return [dict(zip(keys, combo))
            for combo in itertools.product(*(grid[k] for k in keys))]


def grid_search(train_eval, grid: dict[str, list], splits: list[Split],
                metric: str = "loss") -> tuple[dict, EvaluationReport]:
    """Evaluate every lattice point on every split; pick minimal avg loss.

    ``train_eval(params, split) -> loss``. Ties break on smaller sigma,
    then lexicographic config repr.
    """
    if not splits:
        raise ValueError("need at least one split")
    points = expand_grid(grid)
    report = EvaluationReport(metric)
    best = None
    for params in points:
        losses = {}
        for split in splits:
            try:
                losses[split.anchor_season] = train_eval(params, split)
            except Exception as err:
                raise type(err)(f"{err} (config {params})") from err
        result = ModelResult(repr(sorted(params.items())), losses)
        report.results.append(result)
        key = (result.avg_loss, result.sigma, result.model)
        if best is None or key < best[0]:
            best = (key, params)
    return best[1], report
