"""Token-level code completion: causal relation-aware encoder over tokens,
GRU decoder over each target token's subwords.

A begin-of-sequence token is prepended so token 0 is predictable: the
encoding that conditions target token t is the encoder output at position
t of [BOS, w_0, .., w_{N-1}], which sees exactly the tokens before t.
Each token's target subword sequence is its (<=6) subwords followed by the
end-of-token marker.
"""

from __future__ import annotations

import numpy as np

from ..graphs.edges import N_EDGE_TYPES
from ..nn.layers import (
    BlockConfig,
    EdgeContext,
    Encoder,
    Module,
    SubwordDecoder,
    pad_subwords,
)
from ..nn.losses import cross_entropy, log_softmax
from ..nn.tensor import Tensor, concat, no_grad, take_rows

MAX_STEPS = 7  # up to 6 subwords plus the end-of-token marker


class CompletionModel(Module):
    def __init__(self, block: BlockConfig, vocab_size: int, bos_id: int,
                 eot_id: int, unk_id: int, pad_id: int, seed: int = 0,
                 dtype=np.float32, with_edges: bool = True):
        if not block.causal:
            raise ValueError("completion encoder must be causal")
        rng = np.random.default_rng(seed)
        self.block = block
        self.encoder = Encoder(vocab_size, block, rng, dtype, unk_id, pad_id,
                               n_edge_types=N_EDGE_TYPES if with_edges else 0)
        # Decoder shares the encoder's subword embedding table.
        self.decoder = SubwordDecoder(block.d_model, vocab_size, rng, dtype)
        self.bos_id = bos_id
        self.eot_id = eot_id
        self.pad_id = pad_id
        self.dtype = dtype

    def encode(self, subwords: list[list[int]],
               edges: EdgeContext | None = None, training: bool = False,
               rng: np.random.Generator | None = None) -> Tensor:
        """Encodings of [BOS] + window, shape (N+1, d)."""
        ids, counts = pad_subwords([[self.bos_id]] + list(subwords),
                                   self.pad_id)
        return self.encoder.forward(ids, counts, edges, training, rng)

    def target_arrays(self, subwords: list[list[int]]
                      ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(prev_ids, target_ids, step_mask), each (N, K<=7).

        Row t: targets are token t's subwords then the end marker; the
        decoder input at step k is the previous target (BOS at step 0).
        """
        N = len(subwords)
        lens = np.array([min(len(s), 6) + 1 for s in subwords])
        K = int(lens.max())
        tgt = np.full((N, K), self.eot_id, dtype=np.int64)
        prev = np.full((N, K), self.eot_id, dtype=np.int64)
        mask = np.zeros((N, K), dtype=bool)
        for t, subs in enumerate(subwords):
            subs = subs[:6]
            seq = list(subs) + [self.eot_id]
            tgt[t, : len(seq)] = seq
            prev[t, 0] = self.bos_id
            prev[t, 1: len(seq)] = seq[:-1]
            mask[t, : len(seq)] = True
        return prev, tgt, mask

    def step_logits(self, enc_tokens: Tensor, prev: np.ndarray
                    ) -> list[Tensor]:
        """Teacher-forced decoder logits, one (N, V) tensor per step."""
        N, K = prev.shape
        table = self.encoder.embed.table
        hidden = self.decoder.init_hidden(N, self.dtype)
        out = []
        for k in range(K):
            prev_emb = take_rows(table, prev[:, k])
            logits, hidden = self.decoder.step(prev_emb, hidden, enc_tokens)
            out.append(logits)
        return out

    def window_loss(self, subwords: list[list[int]],
                    edges: EdgeContext | None = None, training: bool = True,
                    rng: np.random.Generator | None = None) -> Tensor:
        """Mean subword cross-entropy (including end markers)."""
        N = len(subwords)
        enc = self.encode(subwords, edges, training, rng)
        enc_tokens = enc[0:N, :]
        prev, tgt, mask = self.target_arrays(subwords)
        logits = concat(self.step_logits(enc_tokens, prev), axis=0)
        flat_mask = np.concatenate([mask[:, k] for k in range(mask.shape[1])])
        flat_tgt = np.concatenate([tgt[:, k] for k in range(tgt.shape[1])])
        rows = np.nonzero(flat_mask)[0]
        return cross_entropy(logits[rows], flat_tgt[rows])


def completion_forward(model: CompletionModel, subwords: list[list[int]],
                       edges: EdgeContext | None = None) -> list[np.ndarray]:
    """Per-token teacher-forced subword logits, token t -> (m_t+1, V)."""
    with no_grad():
        N = len(subwords)
        enc = model.encode(subwords, edges, training=False)
        prev, tgt, mask = model.target_arrays(subwords)
        steps = model.step_logits(enc[0:N, :], prev)
    stacked = np.stack([s.data for s in steps], axis=1)  # (N, K, V)
    return [stacked[t, mask[t]] for t in range(N)]


def score_window(model: CompletionModel, subwords: list[list[int]],
                 edges: EdgeContext | None = None) -> dict:
    """Teacher-forced NLLs plus greedy intra-token decoding accuracy."""
    N = len(subwords)
    with no_grad():
        enc = model.encode(subwords, edges, training=False)
        enc_tokens = enc[0:N, :]
        prev, tgt, mask = model.target_arrays(subwords)
        steps = model.step_logits(enc_tokens, prev)
        K = len(steps)
        lp = np.stack(
            [log_softmax(steps[k], axis=-1).data for k in range(K)], axis=1)
        picked = np.take_along_axis(lp, tgt[:, :, None], axis=2)[:, :, 0]
        argmax = np.stack([steps[k].data.argmax(axis=1) for k in range(K)],
                          axis=1)

        # Greedy decode: feed back own argmax, compare against the target
        # sequence (correct only if every step matches, end marker included).
        table = model.encoder.embed.table
        hidden = model.decoder.init_hidden(N, model.dtype)
        prev_ids = np.full(N, model.bos_id, dtype=np.int64)
        greedy_ok = np.ones(N, dtype=bool)
        for k in range(K):
            logits, hidden = model.decoder.step(
                take_rows(table, prev_ids), hidden, enc_tokens)
            step_arg = logits.data.argmax(axis=1)
            greedy_ok &= (step_arg == tgt[:, k]) | ~mask[:, k]
            prev_ids = step_arg

    token_nll = -(picked * mask).sum(axis=1)
    sub_hits = int(((argmax == tgt) & mask).sum())
    return {
        "token_nll": token_nll,
        "subword_nll": -picked[mask],
        "subword_hits": sub_hits,
        "n_subwords": int(mask.sum()),
        "token_hits": int(greedy_ok.sum()),
        "n_tokens": N,
    }


def aggregate_completion(scores: list[dict]) -> dict:
    token_nll = np.concatenate([s["token_nll"] for s in scores])
    sub_nll = np.concatenate([s["subword_nll"] for s in scores])
    n_sub = sum(s["n_subwords"] for s in scores)
    n_tok = sum(s["n_tokens"] for s in scores)
    return {
        "token_ppl": float(np.exp(token_nll.mean())),
        "token_top1": 100.0 * sum(s["token_hits"] for s in scores) / n_tok,
        "subword_ppl": float(np.exp(sub_nll.mean())),
        "subword_top1": 100.0 * sum(s["subword_hits"] for s in scores) / n_sub,
        "n_tokens": n_tok,
        "n_subwords": n_sub,
    }
