import json
import subprocess
import sys

import numpy as np

from pitchcast_dl.data import OUTCOMES, TensorSet


def make_tensor_set(rng, n=32, channels=8, steps=5, vocab=16, labeled=True):
    """Build a random TensorSet for unit tests."""
    numeric = rng.normal(size=(n, channels, steps)).astype(np.float32)
    ids = rng.integers(0, vocab, size=(n, 2, steps)).astype(np.int32)
    outcomes = [OUTCOMES[i] for i in rng.integers(0, 3, size=n)] if labeled else None
    return TensorSet(numeric, ids, list(range(n)), outcomes)


def write_tensor_files(prefix, ts):
    """Write a TensorSet in the exported on-disk layout."""
    prefix = str(prefix)
    ts.numeric.astype("<f4").tofile(prefix + ".bin")
    ts.ids.astype("<i4").tofile(prefix + ".ids.bin")
    meta = {
        "shape": list(ts.numeric.shape),
        "channel_names": [f"c{i}" for i in range(ts.numeric.shape[1])],
        "match_ids": ts.match_ids,
        "id_block_path": prefix + ".ids.bin",
    }
    if ts.outcomes is not None:
        meta["outcomes"] = ts.outcomes
    with open(prefix + ".meta.json", "w") as fh:
        json.dump(meta, fh)
    return prefix


def run_pitchcast(*argv):
    """Invoke the upstream CLI as a subprocess (file interface only)."""
    return subprocess.run([sys.executable, "-m", "pitchcast.cli", *argv],
                          capture_output=True, text=True)
