"""Team rating systems replayed chronologically over match results.

Four systems feed the feature catalog: Elo (logistic-400, additive home
advantage), pi-ratings (dual home/away rating updated on goal-margin
prediction error), Berrar-style offensive/defensive ratings with a logistic
expected-goals output, and PageRank over a loser->winner result graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from datetime import date as Date

import numpy as np

from .errors import EmptyWindow, UnplayedMatch
from .ingest import MatchRecord, MatchStore


@dataclass(frozen=True)
class BerrarParams:
    """Logistic expected-goals parameters, per venue."""

    alpha_h: float = 4.0
    alpha_a: float = 4.0
    beta_h: float = 1.0
    beta_a: float = 1.0
    gamma_h: float = -0.511
    gamma_a: float = -0.969
    omega_att_h: float = 0.1
    omega_att_a: float = 0.1
    omega_def_h: float = 0.1
    omega_def_a: float = 0.1


@dataclass(frozen=True)
class RatingConfig:
    elo_k: float = 20.0
    elo_home_adv: float = 60.0
    pi_lambda: float = 0.035
    pi_gamma: float = 0.7
    pi_c: float = 3.0
    pi_b: float = 10.0
    berrar: BerrarParams = field(default_factory=BerrarParams)
    pagerank_damping: float = 0.85
    # Window sizes include the current season ("current and previous k-1").
    pagerank_window_seasons: int = 3
    pi_window_seasons: int = 5

    def __post_init__(self):
        if self.elo_k <= 0:
            raise ValueError("elo_k must be positive")
        if self.pi_c <= 0:
            raise ValueError("pi_c must be positive")
        if self.pi_b <= 1:
            raise ValueError("pi_b must exceed 1")
        if not 0 < self.pagerank_damping < 1:
            raise ValueError("pagerank_damping must be in (0,1)")


@dataclass
class TeamRating:
    """Evolving rating vector for one team."""

    elo: float = 1500.0
    pi_home: float = 0.0
    pi_away: float = 0.0
    b_att_home: float = 0.0
    b_att_away: float = 0.0
    b_def_home: float = 0.0
    b_def_away: float = 0.0
    last_updated: int = -1


def _require_played(result: MatchRecord) -> None:
    if not result.played:
        raise UnplayedMatch(f"match {result.match_id} has no goals")


def elo_update(pair: tuple[TeamRating, TeamRating], result: MatchRecord,
               cfg: RatingConfig) -> tuple[TeamRating, TeamRating]:
    _require_played(result)
    home, away = pair
    expected = 1.0 / (1.0 + 10.0 ** (-(home.elo + cfg.elo_home_adv - away.elo) / 400.0))
    actual = {"W": 1.0, "D": 0.5, "L": 0.0}[result.outcome]
    delta = cfg.elo_k * (actual - expected)
    return (replace(home, elo=home.elo + delta, last_updated=result.match_id),
            replace(away, elo=away.elo - delta, last_updated=result.match_id))


def _pi_expected_goals(rating: float, cfg: RatingConfig) -> float:
    """Rating -> expected goal superiority on the rated venue."""
    return math.copysign(cfg.pi_b ** (abs(rating) / cfg.pi_c) - 1.0, rating)


def pi_expected_margin(home: TeamRating, away: TeamRating, cfg: RatingConfig) -> float:
    return _pi_expected_goals(home.pi_home, cfg) - _pi_expected_goals(away.pi_away, cfg)


def pi_update(pair: tuple[TeamRating, TeamRating], result: MatchRecord,
              cfg: RatingConfig) -> tuple[TeamRating, TeamRating]:
    _require_played(result)
    home, away = pair
    error = result.goal_diff - pi_expected_margin(home, away, cfg)
    psi = cfg.pi_c * math.log(1.0 + abs(error), cfg.pi_b)
    step = psi * cfg.pi_lambda * (0.0 if error == 0 else math.copysign(1.0, error))
    home = replace(
        home,
        pi_home=home.pi_home + step,
        pi_away=home.pi_away + cfg.pi_gamma * step,
        last_updated=result.match_id,
    )
    away = replace(
        away,
        pi_away=away.pi_away - step,
        pi_home=away.pi_home - cfg.pi_gamma * step,
        last_updated=result.match_id,
    )
    return home, away


def berrar_expected_goals(home: TeamRating, away: TeamRating,
                          params: BerrarParams) -> tuple[float, float]:
    """Pre-match expected goals; no ratings are touched (usable for fixtures)."""
    eg_home = params.alpha_h / (
        1.0 + math.exp(-params.beta_h * (home.b_att_home + away.b_def_away)
                       - params.gamma_h))
    eg_away = params.alpha_a / (
        1.0 + math.exp(-params.beta_a * (away.b_att_away + home.b_def_home)
                       - params.gamma_a))
    return eg_home, eg_away


def berrar_update(pair: tuple[TeamRating, TeamRating], result: MatchRecord,
                  cfg: RatingConfig) -> tuple[tuple[TeamRating, TeamRating],
                                              tuple[float, float]]:
    _require_played(result)
    home, away = pair
    p = cfg.berrar
    eg_home, eg_away = berrar_expected_goals(home, away, p)
    home_res = result.home_goals - eg_home
    away_res = result.away_goals - eg_away
    home = replace(
        home,
        b_att_home=home.b_att_home + p.omega_att_h * home_res,
        b_def_home=home.b_def_home + p.omega_def_h * away_res,
        last_updated=result.match_id,
    )
    away = replace(
        away,
        b_att_away=away.b_att_away + p.omega_att_a * away_res,
        b_def_away=away.b_def_away + p.omega_def_a * home_res,
        last_updated=result.match_id,
    )
    return (home, away), (eg_home, eg_away)


def pagerank_fixed_point(teams: list[str], edges: dict[tuple[str, str], float],
                         damping: float = 0.85, tol: float = 1e-10,
                         max_iter: int = 10_000) -> dict[str, float]:
    """Damped PageRank by power iteration on an explicit weighted digraph.

    Rows are normalized by out-weight; dangling mass is spread uniformly.
    """
    n = len(teams)
    index = {t: i for i, t in enumerate(teams)}
    out_weight = np.zeros(n)
    matrix = np.zeros((n, n))
    for (src, dst), w in edges.items():
        matrix[index[src], index[dst]] += w
        out_weight[index[src]] += w
    dangling = out_weight == 0
    with np.errstate(invalid="ignore", divide="ignore"):
        matrix = np.where(out_weight[:, None] > 0, matrix / out_weight[:, None], 0.0)
    scores = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        nxt = damping * (scores @ matrix)
        nxt += damping * scores[dangling].sum() / n
        nxt += (1.0 - damping) / n
        if np.abs(nxt - scores).sum() < tol:
            scores = nxt
            break
        scores = nxt
    scores = scores / scores.sum()
    return {t: float(scores[index[t]]) for t in teams}


def result_graph(records) -> tuple[list[str], dict[tuple[str, str], float]]:
    """Loser->winner edges weighted 1+|goal diff|; draws add 0.5 both ways."""
    teams: set[str] = set()
    edges: dict[tuple[str, str], float] = {}

    def add(src: str, dst: str, w: float) -> None:
        edges[(src, dst)] = edges.get((src, dst), 0.0) + w

    for rec in records:
        teams.add(rec.home_team)
        teams.add(rec.away_team)
        gd = rec.goal_diff
        if gd > 0:
            add(rec.away_team, rec.home_team, 1.0 + gd)
        elif gd < 0:
            add(rec.home_team, rec.away_team, 1.0 - gd)
        else:
            add(rec.home_team, rec.away_team, 0.5)
            add(rec.away_team, rec.home_team, 0.5)
    return sorted(teams), edges


def _window_seasons(store: MatchStore, league: str, season: str, k: int) -> set[str]:
    order = store.seasons(league)
    if season not in order:
        return {season}
    pos = order.index(season)
    return set(order[max(0, pos - k + 1): pos + 1])


def pagerank_scores(store: MatchStore, league: str, as_of: Date,
                    cfg: RatingConfig | None = None,
                    before_match_id: int | None = None) -> dict[str, float]:
    """PageRank over the league's current + previous (window-1) seasons,
    using decided matches strictly before ``as_of`` (and before_match_id)."""
    cfg = cfg or RatingConfig()
    candidates = [store.record(mid) for mid in store.league_matches(league)]
    prior = [r for r in candidates if r.played and r.date < as_of
             and (before_match_id is None or r.match_id < before_match_id)]
    if not prior:
        raise EmptyWindow(f"no decided {league} matches before {as_of}")
    current_season = prior[-1].season
    window = _window_seasons(store, league, current_season, cfg.pagerank_window_seasons)
    window_recs = [r for r in prior if r.season in window]
    if not window_recs:
        raise EmptyWindow(f"no decided {league} matches in window before {as_of}")
    teams, edges = result_graph(window_recs)
    return pagerank_fixed_point(teams, edges, cfg.pagerank_damping)


class RatingReplayer:
    """Incremental chronological replay of Elo + pi + Berrar updates.

    Keyed by (league, team); cross-league ratings never interact.
    """

    def __init__(self, cfg: RatingConfig | None = None):
        self.cfg = cfg or RatingConfig()
        self.states: dict[tuple[str, str], TeamRating] = {}
        self.next_match_id = 0

    def state(self, league: str, team: str) -> TeamRating:
        return self.states.setdefault((league, team), TeamRating())

    def expected_goals(self, rec: MatchRecord) -> tuple[float, float]:
        return berrar_expected_goals(
            self.state(rec.league, rec.home_team),
            self.state(rec.league, rec.away_team),
            self.cfg.berrar,
        )

    def apply(self, rec: MatchRecord) -> None:
        if not rec.played:
            return
        hk = (rec.league, rec.home_team)
        ak = (rec.league, rec.away_team)
        pair = (self.state(*hk), self.state(*ak))
        pair = elo_update(pair, rec, self.cfg)
        pair = pi_update(pair, rec, self.cfg)
        pair, _ = berrar_update(pair, rec, self.cfg)
        self.states[hk], self.states[ak] = pair
        self.next_match_id = rec.match_id + 1


def replay(store: MatchStore, cfg: RatingConfig | None = None,
           up_to: int | None = None) -> dict[tuple[str, str], TeamRating]:
    """Apply all rating updates to decided matches with match_id < up_to."""
    cfg = cfg or RatingConfig()
    if up_to is None:
        up_to = len(store)
    rep = RatingReplayer(cfg)
    for rec in store:
        if rec.match_id >= up_to:
            break
        rep.apply(rec)
    return rep.states
