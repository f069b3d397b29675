"""Inception + transformer-encoder + MLP outcome probability model.

Per timestep, the 8 numeric channels are concatenated with an embedding of
each team id; the inception block applies parallel 1-D convolutions with
kernel sizes {1, 3, 5} and same-padding so the (channel, time) shape is
preserved; the encoded sequence is mean-pooled and decoded by an MLP into
3 outcome logits (class order win, draw, loss).
"""

import torch
from torch import nn

from .config import DeepConfig

NUMERIC_CHANNELS = 8
INCEPTION_KERNELS = (1, 3, 5)


class InceptionBlock(nn.Module):
    """Parallel same-padded Conv1d branches, averaged; shape preserving."""

    def __init__(self, channels: int):
        super().__init__()
        self.branches = nn.ModuleList([
            nn.Conv1d(channels, channels, k, padding=k // 2)
            for k in INCEPTION_KERNELS
        ])

    def forward(self, x):                      # (B, C, n) -> (B, C, n)
        out = sum(branch(x) for branch in self.branches) / len(self.branches)
        return torch.relu(out)


class DeepModel(nn.Module):
    def __init__(self, cfg: DeepConfig, vocab_size: int, n_steps: int = 5):
        super().__init__()
        self.cfg = cfg
        self.n_steps = n_steps
        emb = cfg.team_id_embedding_dim
        self.channels = NUMERIC_CHANNELS + 2 * emb
        self.embedding = nn.Embedding(vocab_size, emb)
        self.inception = InceptionBlock(self.channels)
        self.project = nn.Linear(self.channels, cfg.model_width)
        layer = nn.TransformerEncoderLayer(
            d_model=cfg.model_width, nhead=cfg.te_heads,
            dim_feedforward=cfg.te_dim_feedforward,
            dropout=cfg.te_dropout, batch_first=True)
        self.encoder = nn.TransformerEncoder(layer, num_layers=cfg.te_layers)
        # Residual hidden layers keep the deep (up to 12-layer) MLP variants
        # trainable; the final projection maps to the 3 outcome logits.
        self.hidden = nn.ModuleList([
            nn.Sequential(nn.Linear(cfg.model_width, cfg.model_width),
                          nn.ReLU(), nn.Dropout(cfg.mlp_dropout))
            for _ in range(cfg.mlp_num_layer - 1)
        ])
        self.head = nn.Linear(cfg.model_width, 3)
        # The residual trunk grows the pooled activation scale with depth;
        # a small head init keeps untrained predictions near-uniform.
        nn.init.normal_(self.head.weight, std=0.01)
        nn.init.zeros_(self.head.bias)

    def forward(self, numeric, ids):
        """numeric (B, 8, n) float, ids (B, 2, n) long -> logits (B, 3)."""
        home = self.embedding(ids[:, 0]).transpose(1, 2)   # (B, E, n)
        away = self.embedding(ids[:, 1]).transpose(1, 2)
        x = torch.cat([numeric, home, away], dim=1)        # (B, 8+2E, n)
        x = self.inception(x)
        x = self.project(x.transpose(1, 2))                # (B, n, W)
        x = self.encoder(x)
        pooled = x.mean(dim=1)                             # (B, W)
        for layer in self.hidden:
            pooled = pooled + layer(pooled)
        return self.head(pooled)

    def predict_proba(self, numeric, ids):
        self.eval()
        with torch.no_grad():
            return torch.softmax(self.forward(numeric, ids), dim=1)


def build_model(cfg: DeepConfig, vocab_size: int, n_steps: int = 5) -> DeepModel:
    torch.manual_seed(cfg.seed)
    return DeepModel(cfg, vocab_size, n_steps)
