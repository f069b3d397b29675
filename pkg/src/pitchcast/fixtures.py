"""Bundled data: the synthetic public-league fixture used by the test bench.

Regenerate with scripts/generate_fixture.py (fixed seed; byte-stable).
"""

from importlib.resources import files

from .ingest import MatchStore, parse_csv


def public_fixture_path():
    return files("pitchcast").joinpath("data/synthetic_league.csv")


def load_public_fixture() -> MatchStore:
    with public_fixture_path().open("r") as fh:
        return parse_csv(fh).store
