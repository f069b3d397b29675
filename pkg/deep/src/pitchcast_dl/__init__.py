"""Deep match-outcome probability model.

Consumes the recency tensors exported by the pitchcast pipeline (binary
float32/int32 blocks plus a JSON sidecar) and emits win/draw/loss
probabilities in the shared prediction CSV format.
"""

__version__ = "0.1.0"
