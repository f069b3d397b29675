"""Model/training configuration and the hyperparameter search lattice."""

from dataclasses import dataclass, field, fields

from .errors import ConfigError

#: Search lattice for the gridded hyperparameters.
GRID = {
    "team_id_embedding_dim": [1, 2, 4, 8, 16],
    "te_dim_feedforward": [1, 8, 64, 512, 2048, 4096],
    "te_dropout": [0.0, 0.1, 0.2, 0.3],
    "mlp_num_layer": list(range(1, 13)),
    "mlp_dropout": [0.0, 0.1, 0.2, 0.3],
}

#: Best lattice point found by the grid search.
OPTIMAL = {
    "team_id_embedding_dim": 1,
    "te_dim_feedforward": 1,
    "te_dropout": 0.0,
    "mlp_num_layer": 10,
    "mlp_dropout": 0.2,
}


@dataclass(frozen=True)
class DeepConfig:
    team_id_embedding_dim: int = 1
    te_dim_feedforward: int = 1
    te_dropout: float = 0.0
    mlp_num_layer: int = 10
    mlp_dropout: float = 0.2
    te_heads: int = 2
    te_layers: int = 1
    model_width: int = 32
    learning_rate: float = 1e-3
    batch_size: int = 64
    epochs: int = 30
    seed: int = 0

    def __post_init__(self):
        for name in ("team_id_embedding_dim", "te_dim_feedforward",
                     "mlp_num_layer", "te_heads", "te_layers", "model_width",
                     "batch_size"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        for name in ("te_dropout", "mlp_dropout"):
            if not 0.0 <= getattr(self, name) < 1.0:
                raise ConfigError(f"{name} must be in [0, 1)")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if self.epochs < 0:
            raise ConfigError("epochs must be >= 0")
        if self.model_width % self.te_heads:
            raise ConfigError("model_width must be divisible by te_heads")


def optimal_config(**overrides) -> DeepConfig:
    return DeepConfig(**{**OPTIMAL, **overrides})


def from_dict(data: dict) -> DeepConfig:
    known = {f.name for f in fields(DeepConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return DeepConfig(**data)
