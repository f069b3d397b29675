import json
from importlib import resources

import pytest

from helpers import run_pitchcast

STORE_CSV = str(resources.files("pitchcast") / "data" / "synthetic_league.csv")


@pytest.fixture(scope="session")
def syn_split_tensors(tmp_path_factory):
    """Export the public-fixture rolling splits as tensor files.

    Returns (store_path, [(anchor, train_prefix, valid_prefix), ...]).
    """
    base = tmp_path_factory.mktemp("syn_tensors")
    splits_path = base / "splits.json"
    proc = run_pitchcast("splits", "--store", STORE_CSV,
                         "--out", str(splits_path))
    assert proc.returncode == 0, proc.stderr
    splits = json.loads(splits_path.read_text())
    out = []
    for split in splits:
        anchor = split["anchor_season"]
        parts = []
        for part, ids in (("train", split["train_ids"]),
                          ("valid", split["validation_ids"])):
            prefix = base / f"{anchor}.{part}"
            proc = run_pitchcast(
                "tensors", "--store", STORE_CSV,
                "--matches", ",".join(str(i) for i in ids),
                "--out", str(prefix))
            assert proc.returncode == 0, proc.stderr
            parts.append(str(prefix))
        out.append((anchor, parts[0], parts[1]))
    return STORE_CSV, out
