"""Reader for the tensor files exported by the upstream pipeline.

Layout: <prefix>.bin (float32 LE, row-major, shape N x channels x n),
<prefix>.ids.bin (int32 LE, N x 2 x n), <prefix>.meta.json with shape,
channel names, match ids, and outcome labels.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ShapeMismatch

OUTCOMES = ("W", "D", "L")


@dataclass
class TensorSet:
    numeric: np.ndarray          # (N, channels, n) float32
    ids: np.ndarray              # (N, 2, n) int32
    match_ids: list[int]
    outcomes: list[str] | None   # None when labels are absent (prediction)

    def __len__(self) -> int:
        return self.numeric.shape[0]

    @property
    def n_steps(self) -> int:
        return self.numeric.shape[2]

    @property
    def labels(self) -> np.ndarray:
        if self.outcomes is None:
            raise ShapeMismatch("tensor set has no outcome labels")
        return np.array([OUTCOMES.index(o) for o in self.outcomes])


def load_tensors(prefix) -> TensorSet:
    prefix = str(prefix)
    with open(prefix + ".meta.json") as fh:
        meta = json.load(fh)
    n, channels, steps = meta["shape"]
    numeric = np.fromfile(prefix + ".bin", dtype="<f4")
    if numeric.size != n * channels * steps:
        raise ShapeMismatch(
            f"{prefix}.bin holds {numeric.size} values, meta says {meta['shape']}")
    numeric = numeric.reshape(n, channels, steps)
    id_path = meta.get("id_block_path", prefix + ".ids.bin")
    if not Path(id_path).is_absolute():
        id_path = str(Path(prefix).parent / Path(id_path).name)
    ids = np.fromfile(id_path, dtype="<i4")
    if ids.size != n * 2 * steps:
        raise ShapeMismatch(f"id block holds {ids.size} values for shape "
                            f"({n}, 2, {steps})")
    ids = ids.reshape(n, 2, steps)
    if not np.isfinite(numeric).all():
        raise ShapeMismatch("numeric block contains non-finite values")
    outcomes = meta.get("outcomes")
    if outcomes is not None and any(o not in OUTCOMES for o in outcomes):
        outcomes = None
    return TensorSet(numeric, ids, list(meta["match_ids"]), outcomes)
