"""Edge prediction: a relative-attention encoder over per-token averaged
subword embeddings, topped by a pairwise head emitting one logit per
ordered token pair and edge type."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..graphs.edges import N_EDGE_TYPES, EdgeSet
from ..nn.layers import (
    BlockConfig,
    Encoder,
    Module,
    PairwiseHead,
    pad_subwords,
)
from ..nn.losses import focal_loss
from ..nn.tensor import Tensor, no_grad


@dataclass
class EdgeModelConfig:
    block: BlockConfig = field(default_factory=BlockConfig)
    pair_heads: int = 4
    pair_width: int = 128

    @staticmethod
    def paper_scale() -> "EdgeModelConfig":
        # Retained for reference; never run in the test suite.
        return EdgeModelConfig(
            block=BlockConfig(n_layers=6, d_model=512, d_ff=2048, n_heads=8),
            pair_heads=32, pair_width=1024)

    def to_dict(self) -> dict:
        return {
            "block": vars(self.block).copy(),
            "pair_heads": self.pair_heads,
            "pair_width": self.pair_width,
        }

    @staticmethod
    def from_dict(d: dict) -> "EdgeModelConfig":
        return EdgeModelConfig(block=BlockConfig(**d["block"]),
                               pair_heads=d["pair_heads"],
                               pair_width=d["pair_width"])


class EdgeModel(Module):
    def __init__(self, cfg: EdgeModelConfig, vocab_size: int, unk_id: int,
                 pad_id: int, seed: int = 0, dtype=np.float32):
        rng = np.random.default_rng(seed)
        self.cfg = cfg
        self.encoder = Encoder(vocab_size, cfg.block, rng, dtype, unk_id,
                               pad_id, n_edge_types=0)
        self.head = PairwiseHead(cfg.block.d_model, cfg.pair_heads,
                                 cfg.pair_width, N_EDGE_TYPES, rng, dtype)
        self.pad_id = pad_id
        self.dtype = dtype

    def forward(self, subwords: list[list[int]], training: bool = False,
                rng: np.random.Generator | None = None) -> Tensor:
        ids, counts = pad_subwords(subwords, self.pad_id)
        x = self.encoder.forward(ids, counts, edges=None, training=training,
                                 rng=rng)
        return self.head.forward(x)


def edge_forward(model: EdgeModel, subwords: list[list[int]]) -> Tensor:
    """Deterministic eval-mode logits, shape (L, L, E)."""
    with no_grad():
        return model.forward(subwords, training=False)


def valid_pair_mask(L: int) -> np.ndarray:
    """All ordered pairs i != j, over every edge type."""
    return np.broadcast_to(~np.eye(L, dtype=bool)[:, :, None],
                           (L, L, N_EDGE_TYPES))


def edge_loss(logits: Tensor, truth: EdgeSet, gamma: float = 2.0,
              alpha: float = 1.0) -> Tensor:
    L = logits.shape[0]
    if truth.seq_len != L:
        raise ValueError(f"EdgeSet length {truth.seq_len} != logits side {L}")
    targets = np.zeros((L, L, N_EDGE_TYPES), dtype=np.float64)
    for s, d, t in truth.edges:
        targets[s, d, t] = 1.0
    return focal_loss(logits, targets, valid_pair_mask(L), gamma, alpha)


def predict_edges(logits: np.ndarray, source_id: str = "",
                  threshold: float = 0.5) -> EdgeSet:
    """Hard decision sigma(logit) >= threshold; ties included.  Self-pairs
    are never predicted."""
    L = logits.shape[0]
    logit_thr = float(np.log(threshold / (1.0 - threshold))) if \
        0.0 < threshold < 1.0 else (np.inf if threshold >= 1.0 else -np.inf)
    hits = np.argwhere((logits >= logit_thr) & valid_pair_mask(L))
    return EdgeSet.from_iter(L, [(int(s), int(d), int(t)) for s, d, t in hits],
                             source_id=source_id)
