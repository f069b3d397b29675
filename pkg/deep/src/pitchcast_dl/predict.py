"""Prediction CSV output in the shared match_id,p_win,p_draw,p_loss format."""

import numpy as np
import torch

from .data import TensorSet
from .errors import ShapeMismatch
from .model import DeepModel


def predict_proba(model: DeepModel, ts: TensorSet) -> np.ndarray:
    if ts.n_steps != model.n_steps:
        raise ShapeMismatch(
            f"model expects n={model.n_steps}, tensors have n={ts.n_steps}")
    if ts.numeric.shape[1] != 8:
        raise ShapeMismatch(
            f"expected 8 numeric channels, got {ts.numeric.shape[1]}")
    numeric = torch.from_numpy(ts.numeric.astype(np.float32))
    ids = torch.from_numpy(ts.ids.astype(np.int64))
    ids = ids.clamp(max=model.embedding.num_embeddings - 1)
    return model.predict_proba(numeric, ids).numpy()


def prediction_rows(model: DeepModel, ts: TensorSet) -> list[tuple]:
    probs = predict_proba(model, ts)
    return [(mid, float(p[0]), float(p[1]), float(p[2]))
            for mid, p in zip(ts.match_ids, probs)]


def write_prediction_csv(path, rows) -> None:
    lines = ["match_id,p_win,p_draw,p_loss"]
    for mid, pw, pd_, pl in rows:
        lines.append(f"{mid},{pw:.8f},{pd_:.8f},{pl:.8f}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
