"""Subword-level causal language model baseline with sliding-window
evaluation.

The model never sees edges.  It operates on the flattened subword stream
in which every token's subwords are followed by the end-of-token marker,
so token-level metrics can be re-aggregated from marker boundaries.  A BOS
is prepended per window, making position 0 predictable.
"""

from __future__ import annotations

import numpy as np

from ..nn.layers import BlockConfig, Encoder, Module, pad_subwords
from ..nn.losses import log_softmax
from ..nn.tensor import Tensor, matmul, no_grad
from ..nn.losses import cross_entropy


class BaselineLM(Module):
    def __init__(self, block: BlockConfig, vocab_size: int, bos_id: int,
                 eot_id: int, unk_id: int, pad_id: int, seed: int = 0,
                 dtype=np.float32):
        if not block.causal:
            raise ValueError("language model must be causal")
        rng = np.random.default_rng(seed)
        self.block = block
        self.encoder = Encoder(vocab_size, block, rng, dtype, unk_id, pad_id,
                               n_edge_types=0)
        self.w_lm = Tensor(
            rng.normal(0, 0.02, (block.d_model, vocab_size)).astype(dtype),
            requires_grad=True)
        self.b_lm = Tensor(np.zeros(vocab_size, dtype=dtype),
                           requires_grad=True)
        self.bos_id = bos_id
        self.eot_id = eot_id
        self.pad_id = pad_id
        self.dtype = dtype

    def window_logits(self, window: np.ndarray, training: bool = False,
                      rng: np.random.Generator | None = None) -> Tensor:
        """Logits predicting window[i] from [BOS] + window[:i]; (T, V)."""
        T = len(window)
        subs = [[self.bos_id]] + [[int(s)] for s in window]
        ids, counts = pad_subwords(subs, self.pad_id, max_s=1)
        x = self.encoder.forward(ids, counts, None, training, rng)
        return matmul(x[0:T, :], self.w_lm) + self.b_lm

    def window_loss(self, window: np.ndarray, training: bool = True,
                    rng: np.random.Generator | None = None) -> Tensor:
        return cross_entropy(self.window_logits(window, training, rng),
                             window)


def record_stream(subwords: list[list[int]], eot_id: int) -> np.ndarray:
    """Flattened subword stream with end-of-token markers."""
    out: list[int] = []
    for subs in subwords:
        out.extend(subs[:6])
        out.append(eot_id)
    return np.asarray(out, dtype=np.int64)


def sliding_positions(n: int, window: int, stride: int
                      ) -> list[tuple[int, int, int]]:
    """(window_start, window_end, n_scored_tail) covering each position
    exactly once: the first window scores everything, later ones only
    their final stride positions."""
    if not (1 <= stride <= window):
        raise ValueError("stride must lie in [1, window]")
    if n <= window:
        return [(0, n, n)]
    spans = [(0, window, window)]
    scored = window
    while scored < n:
        end = min(scored + stride, n)
        spans.append((end - window, end, end - scored))
        scored = end
    return spans


def sliding_scores(model: BaselineLM, stream: np.ndarray, window: int,
                   stride: int) -> tuple[np.ndarray, np.ndarray]:
    """(per-position NLL, per-position top-1 hit) over the whole stream."""
    n = len(stream)
    nll = np.empty(n, dtype=np.float64)
    hits = np.empty(n, dtype=bool)
    with no_grad():
        for a, b, take in sliding_positions(n, window, stride):
            logits = model.window_logits(stream[a:b])
            lp = log_softmax(logits, axis=-1).data
            idx = np.arange(b - a)
            picked = lp[idx, stream[a:b]]
            am = logits.data.argmax(axis=1)
            nll[b - take: b] = -picked[b - take - a:]
            hits[b - take: b] = (am == stream[a:b])[b - take - a:]
    return nll, hits


def token_aggregate(stream: np.ndarray, nll: np.ndarray, hits: np.ndarray,
                    eot_id: int) -> tuple[np.ndarray, np.ndarray]:
    """Token NLL sums and all-positions-correct flags, split at markers."""
    bounds = np.nonzero(stream == eot_id)[0]
    tok_nll, tok_hit = [], []
    start = 0
    for b in bounds:
        tok_nll.append(nll[start: b + 1].sum())
        tok_hit.append(bool(hits[start: b + 1].all()))
        start = b + 1
    return np.asarray(tok_nll), np.asarray(tok_hit)


def baseline_sliding_eval(model: BaselineLM, streams: list[np.ndarray],
                          window: int, stride: int) -> dict:
    """Pooled subword and re-aggregated token metrics over file streams."""
    all_nll, all_hits = [], []
    tok_nll, tok_hit = [], []
    for stream in streams:
        nll, hits = sliding_scores(model, stream, window, stride)
        all_nll.append(nll)
        all_hits.append(hits)
        tn, th = token_aggregate(stream, nll, hits, model.eot_id)
        tok_nll.append(tn)
        tok_hit.append(th)
    nll = np.concatenate(all_nll)
    hits = np.concatenate(all_hits)
    tn = np.concatenate(tok_nll)
    th = np.concatenate(tok_hit)
    return {
        "subword_ppl": float(np.exp(nll.mean())),
        "subword_top1": 100.0 * float(hits.mean()),
        "token_ppl": float(np.exp(tn.mean())),
        "token_top1": 100.0 * float(th.mean()),
        "n_subwords": int(len(nll)),
        "n_tokens": int(len(tn)),
    }
