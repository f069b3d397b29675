"""CSV ingest into a chronologically ordered, indexed match store.

The input format follows the challenge convention: one row per match with
season, league, date, team names, goals, goal difference and W/D/L outcome.
Column names are remappable via :class:`ColumnSchema`. Unplayed matches
(prediction set) carry empty goal fields and flow through the same store.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from datetime import date as Date
from datetime import datetime
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ConsistencyError, OrderError, RowError, SchemaError

OUTCOMES = ("W", "D", "L")

#: Values treated as "no goals recorded" (unplayed match).
DEFAULT_MISSING = ("", "NA", "N/A", "-", "?")


@dataclass(frozen=True)
class ColumnSchema:
    """Column-name mapping plus date/missing-value conventions."""

    season: str = "Sea"
    league: str = "Lge"
    date: str = "Date"
    home_team: str = "HT"
    away_team: str = "AT"
    home_goals: str = "HS"
    away_goals: str = "AS"
    goal_diff: str = "GD"
    outcome: str = "WDL"
    date_formats: tuple[str, ...] = ("%Y-%m-%d", "%d/%m/%Y", "%d/%m/%y")
    missing_values: tuple[str, ...] = DEFAULT_MISSING

    def required(self) -> tuple[str, ...]:
        return (
            self.season, self.league, self.date,
            self.home_team, self.away_team,
            self.home_goals, self.away_goals,
        )


def outcome_of(goal_diff: int) -> str:
    if goal_diff > 0:
        return "W"
    if goal_diff < 0:
        return "L"
    return "D"


@dataclass(frozen=True)
class MatchRecord:
    """One played or scheduled match. Derived fields come from the goals."""

    match_id: int
    season: str
    league: str
    date: Date
    home_team: str
    away_team: str
    home_goals: int | None = None
    away_goals: int | None = None

    @property
    def played(self) -> bool:
        return self.home_goals is not None and self.away_goals is not None

    @property
    def goal_diff(self) -> int | None:
        if not self.played:
            return None
        return self.home_goals - self.away_goals

    @property
    def outcome(self) -> str | None:
        gd = self.goal_diff
        return None if gd is None else outcome_of(gd)

    def key(self) -> tuple:
        """Duplicate-detection key used by append."""
        return (self.league, self.date, self.home_team, self.away_team)


class MatchStore:
    """Immutable, chronologically ordered collection of matches with indices."""

    def __init__(self, records: Sequence[MatchRecord]):
        self._records = tuple(records)
        self._league_index: dict[str, list[int]] = {}
        self._team_index: dict[tuple[str, str], list[int]] = {}
        self._season_order: dict[str, list[str]] = {}
        seen_seasons: dict[str, set[str]] = {}
        for rec in self._records:
            self._league_index.setdefault(rec.league, []).append(rec.match_id)
            self._team_index.setdefault((rec.league, rec.home_team), []).append(rec.match_id)
            self._team_index.setdefault((rec.league, rec.away_team), []).append(rec.match_id)
            seen = seen_seasons.setdefault(rec.league, set())
            if rec.season not in seen:
                seen.add(rec.season)
                self._season_order.setdefault(rec.league, []).append(rec.season)
        self._rounds: dict[int, int] | None = None

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self):
        return iter(self._records)

    @property
    def records(self) -> tuple[MatchRecord, ...]:
        return self._records

    def record(self, match_id: int) -> MatchRecord:
        return self._records[match_id]

    def leagues(self) -> list[str]:
        return sorted(self._league_index)

    def league_matches(self, league: str) -> list[int]:
        return self._league_index.get(league, [])

    def team_matches(self, league: str, team: str) -> list[int]:
        return self._team_index.get((league, team), [])

    def seasons(self, league: str) -> list[str]:
        """Seasons of a league in chronological (first-appearance) order."""
        return self._season_order.get(league, [])

    def season_teams(self, league: str, season: str) -> set[str]:
        teams: set[str] = set()
        for mid in self._league_index.get(league, []):
            rec = self._records[mid]
            if rec.season == season:
                teams.add(rec.home_team)
                teams.add(rec.away_team)
        return teams

    def rounds(self) -> dict[int, int]:
        if self._rounds is None:
            self._rounds = derive_rounds(self)
        return self._rounds

    @classmethod
    def build(cls, records: Iterable[MatchRecord]) -> "MatchStore":
        """Sort stably by date (keeping input order within a date), re-id."""
        ordered = sorted(records, key=lambda r: r.date)
        return cls([replace(r, match_id=i) for i, r in enumerate(ordered)])

    def serialize(self, path) -> None:
        """Canonical CSV dump: challenge columns plus match_id and round."""
        rounds = self.rounds()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["Sea", "Lge", "Date", "HT", "AT", "HS", "AS", "GD", "WDL",
                        "match_id", "round"])
            for rec in self._records:
                w.writerow([
                    rec.season, rec.league, rec.date.isoformat(),
                    rec.home_team, rec.away_team,
                    "" if rec.home_goals is None else rec.home_goals,
                    "" if rec.away_goals is None else rec.away_goals,
                    "" if rec.goal_diff is None else rec.goal_diff,
                    rec.outcome or "",
                    rec.match_id, rounds[rec.match_id],
                ])


@dataclass
class ParseResult:
    store: MatchStore
    errors: list[RowError] = field(default_factory=list)


def _parse_date(text: str, schema: ColumnSchema) -> Date:
    for fmt in schema.date_formats:
        try:
            return datetime.strptime(text, fmt).date()
        except ValueError:
            continue
    raise ValueError(f"unparseable date {text!r}")


def _parse_goals(text: str, schema: ColumnSchema) -> int | None:
    if text.strip() in schema.missing_values:
        return None
    value = int(text)
    if value < 0:
        raise ValueError(f"negative goals {text!r}")
    return value


def parse_csv(source, schema: ColumnSchema | None = None) -> ParseResult:
    """Parse a results CSV into a MatchStore.

    ``source`` may be a path, bytes, or a text stream. Malformed rows are
    collected as RowError / ConsistencyError (with line numbers) and skipped;
    a missing column raises SchemaError immediately.
    """
    schema = schema or ColumnSchema()
    if isinstance(source, (str, Path)):
        fh = open(source, newline="", encoding="utf-8")
    elif isinstance(source, bytes):
        fh = io.StringIO(source.decode("utf-8"))
    else:
        fh = source
    try:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in schema.required():
            if col not in header:
                raise SchemaError(f"missing column {col!r}")
        have_gd = schema.goal_diff in header
        have_wdl = schema.outcome in header
        records: list[MatchRecord] = []
        errors: list[RowError] = []
        for line, row in enumerate(reader, start=2):
            try:
                records.append(_parse_row(row, line, schema, have_gd, have_wdl))
            except RowError as err:
                errors.append(err)
            except (ValueError, TypeError) as err:
                errors.append(RowError(line, str(err)))
    finally:
        if isinstance(source, (str, Path)):
            fh.close()
    return ParseResult(MatchStore.build(records), errors)


def _parse_row(row: dict, line: int, schema: ColumnSchema,
               have_gd: bool, have_wdl: bool) -> MatchRecord:
    home_goals = _parse_goals(row[schema.home_goals] or "", schema)
    away_goals = _parse_goals(row[schema.away_goals] or "", schema)
    if (home_goals is None) != (away_goals is None):
        raise RowError(line, "one goal value present, the other missing")
    rec = MatchRecord(
        match_id=-1,
        season=row[schema.season].strip(),
        league=row[schema.league].strip(),
        date=_parse_date(row[schema.date].strip(), schema),
        home_team=row[schema.home_team].strip(),
        away_team=row[schema.away_team].strip(),
        home_goals=home_goals,
        away_goals=away_goals,
    )
    if rec.played:
        if have_gd:
            given = (row[schema.goal_diff] or "").strip()
            if given not in schema.missing_values and int(given) != rec.goal_diff:
                raise ConsistencyError(
                    line, f"goal_diff {given} contradicts goals "
                          f"{rec.home_goals}-{rec.away_goals}")
        if have_wdl:
            given = (row[schema.outcome] or "").strip()
            if given and given not in schema.missing_values and given != rec.outcome:
                raise ConsistencyError(
                    line, f"outcome {given!r} contradicts goals "
                          f"{rec.home_goals}-{rec.away_goals}")
    return rec


def load_store(path, schema: ColumnSchema | None = None) -> MatchStore:
    """Parse a canonical store dump or a raw results CSV."""
    return parse_csv(path, schema).store


@dataclass
class AppendResult:
    store: MatchStore
    duplicates: int


def append_matches(store: MatchStore, extra: MatchStore) -> AppendResult:
    """Merge later matches into the store, dropping duplicate fixtures."""
    if len(extra) == 0:
        return AppendResult(store, 0)
    if len(store) > 0:
        last = max(r.date for r in store)
        first = min(r.date for r in extra)
        if first < last:
            raise OrderError(
                f"appended matches start {first}, before store end {last}")
    seen = {rec.key() for rec in store}
    merged = list(store.records)
    duplicates = 0
    for rec in extra:
        if rec.key() in seen:
            duplicates += 1
            continue
        seen.add(rec.key())
        merged.append(rec)
    return AppendResult(MatchStore.build(merged), duplicates)


def derive_rounds(store: MatchStore) -> dict[int, int]:
    """Round of a match = 1 + prior matches of its home team in the
    league-season. Well-defined for every league; unplayed matches included."""
    counters: dict[tuple[str, str, str], int] = {}
    rounds: dict[int, int] = {}
    for rec in store:
        key_h = (rec.league, rec.season, rec.home_team)
        key_a = (rec.league, rec.season, rec.away_team)
        rounds[rec.match_id] = counters.get(key_h, 0) + 1
        counters[key_h] = counters.get(key_h, 0) + 1
        counters[key_a] = counters.get(key_a, 0) + 1
    return rounds
