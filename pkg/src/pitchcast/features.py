"""Engineered per-match features and recency tensors.

Everything is computed strictly from matches with a smaller match_id than the
row being built (anti-leakage). The builder makes one chronological pass over
the store, maintaining per-team histories and league-season tables; rating
features come from dedicated replay passes (pi-ratings and PageRank honor
their season windows by restarting the replay at the window start).
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import ColdStart, UnknownFeature
from .ingest import MatchRecord, MatchStore
from .ratings import (RatingConfig, RatingReplayer, TeamRating,
                      pagerank_fixed_point, result_graph)

MISSING = float("nan")
POINTS = {"W": 3, "D": 1, "L": 0}

RECENCY_DEPTH = 9
STREAK_N = 6
LAST_N = 5

#: Per-team features; each appears with _HT and _AT suffixes.
TEAM_FEATURES = (
    ["GD", "GS", "GC", "point_tally", "point_per_match", "Form2",
     "days_since_previous", "newly_promoted", "newly_demoted",
     "previous_point_tally", "previous_GS", "previous_GC", "previous_GD",
     "Streak", "Weighted_Streak", "Form"]
    + [f"{base}_{i}" for base in ("attacking_strength", "defensive_strength",
                                  "strength_opposition", "home_advantage")
       for i in range(1, RECENCY_DEPTH + 1)]
    + ["elo", "H_Off_Rating", "H_Def_Rating", "A_Off_Rating", "A_Def_Rating",
       "EG", "pi_rating", "PageRank"]
    + [f"L_up_{i}" for i in range(1, 6)] + [f"L_down_{i}" for i in range(1, 6)]
    + ["Home_venue_win_pct", "Away_venue_win_pct", "win_pct",
       "Home_venue_draw_pct", "Away_venue_draw_pct", "draw_pct",
       "Home_venue_GS_avg", "Away_venue_GS_avg", "GS_avg",
       "Home_venue_GC_avg", "Away_venue_GC_avg", "GC_avg",
       "home_venue_goal_difference_avg", "away_venue_goal_difference_avg",
       "goal_difference_avg",
       "Home_venue_GS_std", "Away_venue_GS_std", "GS_std",
       "Home_venue_GC_std", "Away_venue_GC_std", "GC_std",
       "home_venue_goal_difference_std", "away_venue_goal_difference_std",
       "goal_difference_std"]
    + ["win_pct_last5", "draw_pct_last5", "GS_AVG", "GC_AVG", "GS_STD", "GC_STD"]
)

#: Match-level features, computed once per match.
MATCH_FEATURES = [
    "days_since_first_match", "quarter", "Round",
    "home_venue_goal_scores_avg", "away_venue_goal_scores_avg",
    "home_venue_goal_scores_std", "away_venue_goal_scores_std",
    "home_venue_win_pct", "home_venue_draw_pct",
    "team_cnt", "gd_std", "rnd_cnt",
]

RATING_FEATURES = {"elo", "H_Off_Rating", "H_Def_Rating", "A_Off_Rating",
                   "A_Def_Rating", "EG"}


def catalog() -> list[str]:
    """Every feature column name, in canonical order."""
    names = [f"{f}_HT" for f in TEAM_FEATURES]
    names += [f"{f}_AT" for f in TEAM_FEATURES]
    names += MATCH_FEATURES
    return names


def _mean(xs) -> float:
    xs = list(xs)
    return sum(xs) / len(xs) if xs else MISSING

def _std(xs) -> float:
    """Population standard deviation; missing on an empty window."""
    xs = list(xs)
    if not xs:
        return MISSING
    mu = sum(xs) / len(xs)
    return math.sqrt(sum((x - mu) ** 2 for x in xs) / len(xs))

def _pct(hits: int, total: int) -> float:
    return hits / total if total else MISSING


@dataclass(frozen=True)
class TeamMatchView:
    """One past match from a single team's perspective."""

    match_id: int
    date: object
    season: str
    venue: str           # 'H' or 'A'
    gf: int
    ga: int
    opponent: str
    opp_prior_gds: tuple # opponent's goal diffs in its prior matches (latest last)

    @property
    def gd(self) -> int:
        return self.gf - self.ga

    @property
    def result(self) -> str:
        return "W" if self.gd > 0 else ("L" if self.gd < 0 else "D")

    @property
    def points(self) -> int:
        return POINTS[self.result]


class FeatureBuilder:
    """Computes feature rows for a store; reusable across match sets."""

    def __init__(self, store: MatchStore, rating_cfg: RatingConfig | None = None,
                 form_kappa: float = 0.33,
                 league_levels: dict[str, int] | None = None):
        self.store = store
        self.cfg = rating_cfg or RatingConfig()
        self.form_kappa = form_kappa
        self.league_levels = league_levels or {}
        self._elo_berrar: dict[int, dict] | None = None
        self._pi: dict[int, tuple[float, float]] | None = None

    # ------------------------------------------------------------------ #
    # rating passes

    def _elo_berrar_values(self) -> dict[int, dict]:
        if self._elo_berrar is None:
            rep = RatingReplayer(self.cfg)
            out: dict[int, dict] = {}
            for rec in self.store:
                home = rep.state(rec.league, rec.home_team)
                away = rep.state(rec.league, rec.away_team)
                eg_h, eg_a = rep.expected_goals(rec)
                out[rec.match_id] = {
                    "elo_HT": home.elo, "elo_AT": away.elo,
                    "H_Off_Rating_HT": home.b_att_home, "H_Def_Rating_HT": home.b_def_home,
                    "A_Off_Rating_HT": home.b_att_away, "A_Def_Rating_HT": home.b_def_away,
                    "H_Off_Rating_AT": away.b_att_home, "H_Def_Rating_AT": away.b_def_home,
                    "A_Off_Rating_AT": away.b_att_away, "A_Def_Rating_AT": away.b_def_away,
                    "EG_HT": eg_h, "EG_AT": eg_a,
                }
                rep.apply(rec)
            self._elo_berrar = out
        return self._elo_berrar

    def _pi_values(self) -> dict[int, tuple[float, float]]:
        """Venue-appropriate pi-ratings, replayed per season window."""
        if self._pi is None:
            out: dict[int, tuple[float, float]] = {}
            for league in self.store.leagues():
                mids = self.store.league_matches(league)
                seasons = self.store.seasons(league)
                by_season: dict[str, list[int]] = {}
                for mid in mids:
                    by_season.setdefault(self.store.record(mid).season, []).append(mid)
                for pos, season in enumerate(seasons):
                    start = max(0, pos - self.cfg.pi_window_seasons + 1)
                    window = set(seasons[start:pos + 1])
                    rep = RatingReplayer(self.cfg)
                    targets = set(by_season[season])
                    for mid in mids:
                        rec = self.store.record(mid)
                        if rec.season not in window:
                            continue
                        if mid in targets:
                            home = rep.state(league, rec.home_team)
                            away = rep.state(league, rec.away_team)
                            out[mid] = (home.pi_home, away.pi_away)
                        rep.apply(rec)
            self._pi = out
        return self._pi

    def _pagerank_values(self, wanted: set[int]) -> dict[int, tuple[float, float]]:
        out: dict[int, tuple[float, float]] = {}
        by_league: dict[str, list[int]] = {}
        for mid in sorted(wanted):
            by_league.setdefault(self.store.record(mid).league, []).append(mid)
        for league, mids in by_league.items():
            all_mids = self.store.league_matches(league)
            for mid in mids:
                rec = self.store.record(mid)
                window = self._league_window_seasons(league, rec.season,
                                                     self.cfg.pagerank_window_seasons)
                prior = [self.store.record(m) for m in all_mids
                         if m < mid and self.store.record(m).played
                         and self.store.record(m).season in window]
                if not prior:
                    out[mid] = (MISSING, MISSING)
                    continue
                teams, edges = result_graph(prior)
                scores = pagerank_fixed_point(teams, edges, self.cfg.pagerank_damping)
                out[mid] = (scores.get(rec.home_team, MISSING),
                            scores.get(rec.away_team, MISSING))
        return out

    def _league_window_seasons(self, league: str, season: str, k: int) -> set[str]:
        order = self.store.seasons(league)
        if season not in order:
            return {season}
        pos = order.index(season)
        return set(order[max(0, pos - k + 1): pos + 1])

    # ------------------------------------------------------------------ #
    # main pass

    def matrix(self, match_ids, features, with_targets: bool = False) -> pd.DataFrame:
        """One row per match_id, columns per the feature list (or 'all')."""
        if isinstance(features, str):
            if features != "all":
                raise UnknownFeature(features)
            features = catalog()
        features = list(features)
        known = set(catalog())
        for name in features:
            if name not in known:
                raise UnknownFeature(name)
        match_ids = list(match_ids)
        wanted = set(match_ids)

        need = set(features)
        ratings = (self._elo_berrar_values()
                   if any(n.rsplit("_", 1)[0] in RATING_FEATURES for n in need)
                   else {})
        pi = self._pi_values() if ("pi_rating_HT" in need or "pi_rating_AT" in need) else {}
        pagerank = (self._pagerank_values(wanted)
                    if ("PageRank_HT" in need or "PageRank_AT" in need) else {})
        rounds = self.store.rounds() if "Round" in need else {}

        histories: dict[tuple[str, str], list[TeamMatchView]] = {}
        form: dict[tuple[str, str], float] = {}
        season_points: dict[tuple[str, str], dict[str, int]] = {}
        season_teams: dict[tuple[str, str], set[str]] = {}
        season_first: dict[tuple[str, str], object] = {}
        season_max_round: dict[tuple[str, str], int] = {}
        home_count: dict[tuple[str, str, str], int] = {}
        league_history: dict[str, list[tuple[str, int, int]]] = {}

        rows: dict[int, dict] = {}
        for rec in self.store:
            if rec.match_id in wanted:
                row = self._row(rec, features, histories, form, season_points,
                                season_teams, season_first, season_max_round,
                                league_history, ratings, pi, pagerank, rounds)
                if with_targets:
                    row["home_goals"] = rec.home_goals if rec.played else MISSING
                    row["away_goals"] = rec.away_goals if rec.played else MISSING
                    row["outcome"] = rec.outcome
                rows[rec.match_id] = row
            self._advance(rec, histories, form, season_points, season_teams,
                          season_first, season_max_round, home_count, league_history)

        columns = features + (["home_goals", "away_goals", "outcome"] if with_targets else [])
        frame = pd.DataFrame([rows[mid] for mid in match_ids],
                             index=pd.Index(match_ids, name="match_id"),
                             columns=columns)
        return frame

    def _advance(self, rec: MatchRecord, histories, form, season_points,
                 season_teams, season_first, season_max_round, home_count,
                 league_history) -> None:
        lg, sea = rec.league, rec.season
        skey = (lg, sea)
        season_first.setdefault(skey, rec.date)
        season_teams.setdefault(skey, set()).update((rec.home_team, rec.away_team))
        home_count[(lg, sea, rec.home_team)] = home_count.get((lg, sea, rec.home_team), 0) + 1
        home_count[(lg, sea, rec.away_team)] = home_count.get((lg, sea, rec.away_team), 0) + 1
        rnd = home_count[(lg, sea, rec.home_team)]
        season_max_round[skey] = max(season_max_round.get(skey, 0), rnd)
        if not rec.played:
            return

        hk, ak = (lg, rec.home_team), (lg, rec.away_team)
        home_hist = histories.setdefault(hk, [])
        away_hist = histories.setdefault(ak, [])
        home_prior = tuple(v.gd for v in home_hist[-RECENCY_DEPTH:])
        away_prior = tuple(v.gd for v in away_hist[-RECENCY_DEPTH:])
        home_hist.append(TeamMatchView(rec.match_id, rec.date, sea, "H",
                                       rec.home_goals, rec.away_goals,
                                       rec.away_team, away_prior))
        away_hist.append(TeamMatchView(rec.match_id, rec.date, sea, "A",
                                       rec.away_goals, rec.home_goals,
                                       rec.home_team, home_prior))

        pts = season_points.setdefault(skey, {})
        pts[rec.home_team] = pts.get(rec.home_team, 0) + POINTS[rec.outcome]
        pts[rec.away_team] = pts.get(rec.away_team, 0) + POINTS[
            {"W": "L", "D": "D", "L": "W"}[rec.outcome]]

        xi_h = form.setdefault(hk, 1.0)
        xi_a = form.setdefault(ak, 1.0)
        kappa = self.form_kappa
        if rec.outcome == "W":
            form[hk] = xi_h + kappa * xi_a
            form[ak] = xi_a - kappa * xi_a
        elif rec.outcome == "L":
            form[ak] = xi_a + kappa * xi_h
            form[hk] = xi_h - kappa * xi_h
        else:
            gap = kappa * abs(xi_h - xi_a)
            if xi_h > xi_a:
                form[hk], form[ak] = xi_h - gap, xi_a + gap
            else:
                form[hk], form[ak] = xi_h + gap, xi_a - gap

        league_history.setdefault(lg, []).append((sea, rec.home_goals, rec.away_goals))

    # ------------------------------------------------------------------ #
    # per-row computation

    def _row(self, rec: MatchRecord, features, histories, form, season_points,
             season_teams, season_first, season_max_round, league_history,
             ratings, pi, pagerank, rounds) -> dict:
        lg = rec.league
        seasons = self.store.seasons(lg)
        pos = seasons.index(rec.season)
        prev_season = seasons[pos - 1] if pos > 0 else None
        window3 = set(seasons[max(0, pos - 2): pos + 1])

        row: dict[str, float] = {}
        side_ctx = {}
        for suffix, team in (("_HT", rec.home_team), ("_AT", rec.away_team)):
            side_ctx[suffix] = self._team_values(
                rec, team, suffix, features, histories, form, season_points,
                season_teams, prev_season, window3)

        for name in features:
            if name.endswith("_HT") or name.endswith("_AT"):
                suffix = name[-3:]
                base = name[:-3]
                if base in RATING_FEATURES:
                    row[name] = ratings.get(rec.match_id, {}).get(name, MISSING)
                elif base == "pi_rating":
                    pair = pi.get(rec.match_id)
                    row[name] = MISSING if pair is None else pair[0 if suffix == "_HT" else 1]
                elif base == "PageRank":
                    pair = pagerank.get(rec.match_id, (MISSING, MISSING))
                    row[name] = pair[0 if suffix == "_HT" else 1]
                else:
                    row[name] = side_ctx[suffix][base]
            else:
                row[name] = self._match_value(rec, name, season_first,
                                              season_teams, season_max_round,
                                              league_history, rounds,
                                              window3, prev_season)
        return row

    def _team_values(self, rec, team, suffix, features, histories, form,
                     season_points, season_teams, prev_season, window3) -> dict:
        lg = rec.league
        hist = histories.get((lg, team), [])
        season_hist = [v for v in hist if v.season == rec.season]
        values: dict[str, float] = {}
        need = {f[:-3] for f in features if f.endswith(suffix)}

        if need & {"GD", "GS", "GC", "point_tally", "point_per_match"}:
            gs = sum(v.gf for v in season_hist)
            gc = sum(v.ga for v in season_hist)
            tally = sum(v.points for v in season_hist)
            values["GS"], values["GC"], values["GD"] = gs, gc, gs - gc
            values["point_tally"] = tally
            values["point_per_match"] = tally / len(season_hist) if season_hist else MISSING
        if "Form2" in need:
            values["Form2"] = (sum(v.points for v in hist[-3:]) / 9.0
                               if len(hist) >= 3 else MISSING)
        if "days_since_previous" in need:
            values["days_since_previous"] = ((rec.date - hist[-1].date).days
                                             if hist else MISSING)
        if need & {"newly_promoted", "newly_demoted"}:
            values.update(self._promotion_flags(rec, team, prev_season, season_teams))
        if need & {"previous_point_tally", "previous_GS", "previous_GC", "previous_GD"}:
            prev = [v for v in hist if v.season == prev_season] if prev_season else []
            if prev:
                pgs = sum(v.gf for v in prev)
                pgc = sum(v.ga for v in prev)
                values["previous_GS"], values["previous_GC"] = pgs, pgc
                values["previous_GD"] = pgs - pgc
                values["previous_point_tally"] = sum(v.points for v in prev)
            else:
                values.update(previous_GS=MISSING, previous_GC=MISSING,
                              previous_GD=MISSING, previous_point_tally=MISSING)
        if need & {"Streak", "Weighted_Streak"}:
            n = STREAK_N
            if len(hist) >= n:
                res = [v.points for v in hist[-n:]]  # oldest -> newest
                values["Streak"] = sum(res) / (3 * n)
                values["Weighted_Streak"] = sum(
                    2 * (k + 1) * r for k, r in enumerate(res)) / (3 * n * (n + 1))
            else:
                values["Streak"] = values["Weighted_Streak"] = MISSING
        if "Form" in need:
            values["Form"] = form.get((lg, team), 1.0)
        if any(f.startswith(("attacking_strength", "defensive_strength",
                             "strength_opposition", "home_advantage")) for f in need):
            for i in range(1, RECENCY_DEPTH + 1):
                if i <= len(hist):
                    v = hist[-i]
                    values[f"attacking_strength_{i}"] = v.gf
                    values[f"defensive_strength_{i}"] = v.ga
                    values[f"strength_opposition_{i}"] = (
                        _mean(v.opp_prior_gds) if v.opp_prior_gds else 0.0)
                    values[f"home_advantage_{i}"] = 1.0 if v.venue == "H" else -1.0
                else:
                    for base in ("attacking_strength", "defensive_strength",
                                 "strength_opposition", "home_advantage"):
                        values[f"{base}_{i}"] = MISSING
        if any(f.startswith(("L_up_", "L_down_")) for f in need):
            values.update(self._table_position(rec, team, season_points))
        if need & {"Home_venue_win_pct", "Away_venue_win_pct", "win_pct",
                   "Home_venue_draw_pct", "Away_venue_draw_pct", "draw_pct",
                   "Home_venue_GS_avg", "Away_venue_GS_avg", "GS_avg",
                   "Home_venue_GC_avg", "Away_venue_GC_avg", "GC_avg",
                   "home_venue_goal_difference_avg", "away_venue_goal_difference_avg",
                   "goal_difference_avg", "Home_venue_GS_std", "Away_venue_GS_std",
                   "GS_std", "Home_venue_GC_std", "Away_venue_GC_std", "GC_std",
                   "home_venue_goal_difference_std", "away_venue_goal_difference_std",
                   "goal_difference_std"}:
            values.update(self._window_stats(hist, window3))
        if need & {"win_pct_last5", "draw_pct_last5", "GS_AVG", "GC_AVG",
                   "GS_STD", "GC_STD"}:
            last = hist[-LAST_N:]
            if last:
                values["win_pct_last5"] = sum(v.result == "W" for v in last) / len(last)
                values["draw_pct_last5"] = sum(v.result == "D" for v in last) / len(last)
                values["GS_AVG"] = _mean(v.gf for v in last)
                values["GC_AVG"] = _mean(v.ga for v in last)
                values["GS_STD"] = _std(v.gf for v in last)
                values["GC_STD"] = _std(v.ga for v in last)
            else:
                values.update(win_pct_last5=MISSING, draw_pct_last5=MISSING,
                              GS_AVG=MISSING, GC_AVG=MISSING,
                              GS_STD=MISSING, GC_STD=MISSING)
        return values

    def _promotion_flags(self, rec, team, prev_season, season_teams) -> dict:
        if prev_season is None:
            return {"newly_promoted": 0.0, "newly_demoted": 0.0}
        members = season_teams.get((rec.league, prev_season), set())
        if team in members:
            return {"newly_promoted": 0.0, "newly_demoted": 0.0}
        # New to the league. Without a division hierarchy we can only tell
        # promoted from demoted when league levels are configured.
        prev_league = None
        levels = self.league_levels
        if levels:
            for other in self.store.leagues():
                if other == rec.league:
                    continue
                order = self.store.seasons(other)
                if prev_season in order and team in self.store.season_teams(other, prev_season):
                    prev_league = other
                    break
            if prev_league and prev_league in levels and rec.league in levels:
                came_up = levels[prev_league] > levels[rec.league]
                return {"newly_promoted": 1.0 if came_up else 0.0,
                        "newly_demoted": 0.0 if came_up else 1.0}
        return {"newly_promoted": 1.0, "newly_demoted": 0.0}

    def _table_position(self, rec, team, season_points) -> dict:
        pts = season_points.get((rec.league, rec.season), {})
        table = sorted(pts.items(), key=lambda kv: (-kv[1], kv[0]))
        mine = pts.get(team, 0)
        out: dict[str, float] = {}
        n = len(table)
        for i in range(1, 6):
            out[f"L_up_{i}"] = table[i - 1][1] - mine if i <= n else MISSING
            out[f"L_down_{i}"] = mine - table[n - i][1] if i <= n else MISSING
        return out

    def _window_stats(self, hist, window3) -> dict:
        win = [v for v in hist if v.season in window3]
        home = [v for v in win if v.venue == "H"]
        away = [v for v in win if v.venue == "A"]
        return {
            "Home_venue_win_pct": _pct(sum(v.result == "W" for v in home), len(home)),
            "Away_venue_win_pct": _pct(sum(v.result == "W" for v in away), len(away)),
            "win_pct": _pct(sum(v.result == "W" for v in win), len(win)),
            "Home_venue_draw_pct": _pct(sum(v.result == "D" for v in home), len(home)),
            "Away_venue_draw_pct": _pct(sum(v.result == "D" for v in away), len(away)),
            "draw_pct": _pct(sum(v.result == "D" for v in win), len(win)),
            "Home_venue_GS_avg": _mean(v.gf for v in home),
            "Away_venue_GS_avg": _mean(v.gf for v in away),
            "GS_avg": _mean(v.gf for v in win),
            "Home_venue_GC_avg": _mean(v.ga for v in home),
            "Away_venue_GC_avg": _mean(v.ga for v in away),
            "GC_avg": _mean(v.ga for v in win),
            "home_venue_goal_difference_avg": _mean(v.gd for v in home),
            "away_venue_goal_difference_avg": _mean(v.gd for v in away),
            "goal_difference_avg": _mean(v.gd for v in win),
            "Home_venue_GS_std": _std(v.gf for v in home),
            "Away_venue_GS_std": _std(v.gf for v in away),
            "GS_std": _std(v.gf for v in win),
            "Home_venue_GC_std": _std(v.ga for v in home),
            "Away_venue_GC_std": _std(v.ga for v in away),
            "GC_std": _std(v.ga for v in win),
            "home_venue_goal_difference_std": _std(v.gd for v in home),
            "away_venue_goal_difference_std": _std(v.gd for v in away),
            "goal_difference_std": _std(v.gd for v in win),
        }

    def _match_value(self, rec, name, season_first, season_teams,
                     season_max_round, league_history, rounds,
                     window3, prev_season) -> float:
        lg = rec.league
        if name == "quarter":
            return (rec.date.month - 1) // 3 + 1
        if name == "Round":
            return rounds[rec.match_id]
        if name == "days_since_first_match":
            first = season_first.get((lg, rec.season))
            return (rec.date - first).days if first is not None else 0.0
        if name == "team_cnt":
            if prev_season is None:
                return MISSING
            members = season_teams.get((lg, prev_season))
            return len(members) if members else MISSING
        if name == "rnd_cnt":
            if prev_season is None:
                return MISSING
            return season_max_round.get((lg, prev_season), MISSING)
        window_matches = [(hg, ag) for (sea, hg, ag) in league_history.get(lg, [])
                          if sea in window3]
        if name == "home_venue_goal_scores_avg":
            return _mean(hg for hg, _ in window_matches)
        if name == "away_venue_goal_scores_avg":
            return _mean(ag for _, ag in window_matches)
        if name == "home_venue_goal_scores_std":
            return _std(hg for hg, _ in window_matches)
        if name == "away_venue_goal_scores_std":
            return _std(ag for _, ag in window_matches)
        if name == "home_venue_win_pct":
            return _pct(sum(hg > ag for hg, ag in window_matches), len(window_matches))
        if name == "home_venue_draw_pct":
            return _pct(sum(hg == ag for hg, ag in window_matches), len(window_matches))
        if name == "gd_std":
            return _std(hg - ag for hg, ag in window_matches)
        raise UnknownFeature(name)


def build_matrix(store: MatchStore, match_ids, features,
                 rating_cfg: RatingConfig | None = None,
                 with_targets: bool = False) -> pd.DataFrame:
    """Convenience wrapper over FeatureBuilder for one-shot builds."""
    return FeatureBuilder(store, rating_cfg).matrix(match_ids, features, with_targets)


# ---------------------------------------------------------------------- #
# recency tensors (deep-model export)

TENSOR_CHANNELS = [
    "home_attacking_strength", "home_defensive_strength",
    "home_strength_opposition", "home_home_advantage",
    "away_attacking_strength", "away_defensive_strength",
    "away_strength_opposition", "away_home_advantage",
]


def _team_recency(store: MatchStore, league: str, team: str, match_id: int,
                  n: int, pad: bool) -> tuple[np.ndarray, bool]:
    """(4, n) block for one team, slot 0 = most recent prior match."""
    mids = [m for m in store.team_matches(league, team)
            if m < match_id and store.record(m).played]
    if not mids and not pad:
        raise ColdStart(f"{team} has no prior matches before {match_id}")
    block = np.zeros((4, n), dtype=np.float32)
    league_goals = [g for m in store.league_matches(league) if m < match_id
                    and store.record(m).played
                    for g in (store.record(m).home_goals, store.record(m).away_goals)]
    pad_goals = float(round(_mean(league_goals))) if league_goals else 0.0
    for i in range(1, n + 1):
        if i <= len(mids):
            mid = mids[-i]
            rec = store.record(mid)
            at_home = rec.home_team == team
            gf = rec.home_goals if at_home else rec.away_goals
            ga = rec.away_goals if at_home else rec.home_goals
            opp = rec.away_team if at_home else rec.home_team
            opp_prior = [m for m in store.team_matches(league, opp)
                         if m < mid and store.record(m).played][-n:]
            if opp_prior:
                gds = []
                for m in opp_prior:
                    r = store.record(m)
                    gd = r.goal_diff if r.home_team == opp else -r.goal_diff
                    gds.append(gd)
                opp_strength = sum(gds) / len(gds)
            else:
                opp_strength = 0.0
            block[:, i - 1] = (gf, ga, opp_strength, 1.0 if at_home else -1.0)
        else:
            block[:, i - 1] = (pad_goals, pad_goals, 0.0, 1.0 if i % 2 else -1.0)
    return block, len(mids) >= n


def recency_tensor(store: MatchStore, match_id: int, n: int = 5,
                   pad: bool = True) -> dict:
    """Numeric (8, n) block plus (2, n) team-id block for one match."""
    rec = store.record(match_id)
    home_block, _ = _team_recency(store, rec.league, rec.home_team, match_id, n, pad)
    away_block, _ = _team_recency(store, rec.league, rec.away_team, match_id, n, pad)
    ids = team_index(store)
    id_block = np.zeros((2, n), dtype=np.int32)
    id_block[0, :] = ids[(rec.league, rec.home_team)]
    id_block[1, :] = ids[(rec.league, rec.away_team)]
    return {"match_id": match_id,
            "numeric": np.vstack([home_block, away_block]),
            "ids": id_block}


def team_index(store: MatchStore) -> dict[tuple[str, str], int]:
    """Stable dense team ids; 0 is reserved for unseen teams."""
    keys = sorted({(r.league, t) for r in store for t in (r.home_team, r.away_team)})
    return {k: i + 1 for i, k in enumerate(keys)}


def export_tensors(store: MatchStore, match_ids, prefix, n: int = 5) -> None:
    """Write the binary tensor files consumed by the deep model.

    <prefix>.bin: float32 little-endian, row-major, shape (N, 8, n).
    <prefix>.ids.bin: int32 little-endian, shape (N, 2, n).
    <prefix>.meta.json: shape, channel names, match ids, outcome labels.
    """
    match_ids = list(match_ids)
    numeric = np.zeros((len(match_ids), 8, n), dtype="<f4")
    ids = np.zeros((len(match_ids), 2, n), dtype="<i4")
    outcomes = []
    for row, mid in enumerate(match_ids):
        t = recency_tensor(store, mid, n)
        numeric[row] = t["numeric"]
        ids[row] = t["ids"]
        outcomes.append(store.record(mid).outcome)
    prefix = str(prefix)
    numeric.tofile(prefix + ".bin")
    ids.tofile(prefix + ".ids.bin")
    with open(prefix + ".meta.json", "w") as fh:
        json.dump({
            "shape": [len(match_ids), 8, n],
            "channel_names": TENSOR_CHANNELS,
            "match_ids": match_ids,
            "id_block_path": prefix + ".ids.bin",
            "outcomes": outcomes,
        }, fh, indent=1)
