"""Model building blocks.

Attention scores follow the relative-position form
    α_ij = (E_xi Wq)·(WkE E_xj) + (E_xi Wq)·(WkR R_{i−j})
         + u·(WkE E_xj) + v·(WkR R_{i−j}),
scaled by 1/√d_head, with u, v shared across layers.  Typed-edge
augmentation adds, for every edge (i, j, r) whose gate is open,
    g_r(i,j) · [(E_xi Wq)·(WkR' R^(r)) + v·(WkR' R^(r))] / √d_head,
computed sparsely at edge positions only; R^(r) is global across
layers, WkR' per layer.  Blocks are Pre-LN with a final LayerNorm after
the stack.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .tensor import (
    Tensor,
    concat,
    dropout,
    masked_softmax,
    matmul,
    relu,
    sigmoid,
    sqrt,
    take_rows,
    tanh,
)
from . import tensor as T


class Module:
    def parameters(self) -> dict[str, Tensor]:
        out: dict[str, Tensor] = {}
        for name, val in vars(self).items():
            if isinstance(val, Tensor) and val.requires_grad:
                out[name] = val
            elif isinstance(val, Module):
                for k, v in val.parameters().items():
                    out[f"{name}.{k}"] = v
            elif isinstance(val, (list, tuple)):
                for i, item in enumerate(val):
                    if isinstance(item, Module):
                        for k, v in item.parameters().items():
                            out[f"{name}.{i}.{k}"] = v
        return out

    def zero_grad(self) -> None:
        for p in self.parameters().values():
            p.grad = None


def _param(rng: np.random.Generator, shape, dtype, scale=0.02) -> Tensor:
    return Tensor(rng.normal(0.0, scale, size=shape).astype(dtype),
                  requires_grad=True)


def _zeros(shape, dtype) -> Tensor:
    return Tensor(np.zeros(shape, dtype=dtype), requires_grad=True)


@dataclass
class BlockConfig:
    n_layers: int = 2
    d_model: int = 64
    d_ff: int = 256
    n_heads: int = 4
    dropout: float = 0.1
    subword_dropout: float = 0.1
    causal: bool = True

    def __post_init__(self):
        if self.d_model % self.n_heads != 0:
            raise ValueError("d_model must divide evenly across heads")

    @property
    def d_head(self) -> int:
        return self.d_model // self.n_heads


PAPER_BLOCK = BlockConfig(n_layers=6, d_model=512, d_ff=2048, n_heads=8)


_SINUS_CACHE: dict[tuple, np.ndarray] = {}


def sinusoid_table(L: int, d_model: int, dtype) -> np.ndarray:
    """R_{i−j} rows for offsets −(L−1)..(L−1); row index = offset + L − 1."""
    key = (L, d_model, np.dtype(dtype).name)
    tab = _SINUS_CACHE.get(key)
    if tab is None:
        offsets = np.arange(-(L - 1), L, dtype=np.float64)[:, None]
        dims = np.arange(0, d_model, 2, dtype=np.float64)[None, :]
        angles = offsets / np.power(10000.0, dims / d_model)
        tab = np.zeros((2 * L - 1, d_model), dtype=np.float64)
        tab[:, 0::2] = np.sin(angles)
        tab[:, 1::2] = np.cos(angles[:, : (d_model - d_model // 2)])
        tab = tab.astype(dtype)
        _SINUS_CACHE[key] = tab
    return tab


def rel_shift(qp: Tensor) -> Tensor:
    """(H, L, 2L−1) → (H, L, L): out[h,i,j] = qp[h, i, i−j+L−1]."""
    H, L, _ = qp.shape
    out = np.empty((H, L, L), dtype=qp.dtype)
    for h in range(H):
        out[h] = kernels.relshift_gather(qp.data[h])

    def da(g):
        full = np.empty_like(qp.data)
        for h in range(H):
            full[h] = kernels.relshift_scatter(np.ascontiguousarray(g[h]))
        return full

    return T._unary(qp, out, da)


def edge_bias(qc: Tensor, vc: Tensor, gates: Tensor, src: np.ndarray,
              dst: np.ndarray, typ: np.ndarray, L: int) -> Tensor:
    """Sparse relation-bias increment: (H, L, L) with
    out[h, s_k, d_k] += gate_k · (qc[h, s_k, r_k] + vc[h, r_k])."""
    H = qc.shape[0]
    vals = np.empty((H, len(src)), dtype=qc.dtype)
    for h in range(H):
        vals[h] = (qc.data[h][src, typ] + vc.data[h][typ]) * gates.data
    out = np.empty((H, L, L), dtype=qc.dtype)
    for h in range(H):
        out[h] = kernels.edge_scatter(L, src, dst, vals[h])

    req = qc.requires_grad or vc.requires_grad or gates.requires_grad
    if not (req and T.grad_enabled()):
        return Tensor(out)
    parents = tuple(t for t in (qc, vc, gates) if t.requires_grad)
    res = Tensor(out, requires_grad=True, parents=parents)

    def backward(g):
        E = vc.shape[1]
        picked = np.empty((H, len(src)), dtype=g.dtype)
        for h in range(H):
            picked[h] = kernels.edge_gather(g[h], src, dst)
        if gates.requires_grad:
            raw = np.zeros(len(src), dtype=g.dtype)
            for h in range(H):
                raw += picked[h] * (qc.data[h][src, typ] + vc.data[h][typ])
            gates.accumulate(raw)
        if qc.requires_grad:
            dqc = np.zeros_like(qc.data)
            for h in range(H):
                np.add.at(dqc[h], (src, typ), picked[h] * gates.data)
            qc.accumulate(dqc)
        if vc.requires_grad:
            dvc = np.zeros_like(vc.data)
            for h in range(H):
                dvc[h] = np.bincount(typ, weights=(picked[h] * gates.data)
                                     .astype(np.float64),
                                     minlength=E).astype(g.dtype)
            vc.accumulate(dvc)

    res._backward = backward
    return res


@dataclass
class EdgeContext:
    """Gated edges feeding the attention relation bias: index arrays
    plus per-edge gate values."""
    src: np.ndarray
    dst: np.ndarray
    typ: np.ndarray
    gates: Tensor  # shape (n_edges,)

    @property
    def empty(self) -> bool:
        return len(self.src) == 0


def _split_heads(x: Tensor, n_heads: int) -> Tensor:
    L, d = x.shape
    return x.reshape(L, n_heads, d // n_heads).transpose(1, 0, 2)


class RelAttention(Module):
    """One multi-head relative-position attention layer (+ edge terms)."""

    def __init__(self, cfg: BlockConfig, rng: np.random.Generator, dtype,
                 with_edges: bool = True):
        d = cfg.d_model
        self.cfg = cfg
        self.wq = _param(rng, (d, d), dtype)
        self.wke = _param(rng, (d, d), dtype)
        self.wkr = _param(rng, (d, d), dtype)
        self.wv = _param(rng, (d, d), dtype)
        self.wo = _param(rng, (d, d), dtype)
        self.bo = _zeros((d,), dtype)
        self.wkr_edge = _param(rng, (d, d), dtype) if with_edges else None

    def forward(self, x: Tensor, rel: Tensor, u: Tensor, v: Tensor,
                edge_emb: Tensor | None, edges: EdgeContext | None,
                mask: np.ndarray, training: bool,
                rng: np.random.Generator) -> Tensor:
        cfg = self.cfg
        L = x.shape[0]
        H, dh = cfg.n_heads, cfg.d_head
        q = _split_heads(matmul(x, self.wq), H)           # (H, L, dh)
        ke = _split_heads(matmul(x, self.wke), H)         # (H, L, dh)
        kr = _split_heads(matmul(rel, self.wkr), H)       # (H, 2L-1, dh)
        val = _split_heads(matmul(x, self.wv), H)         # (H, L, dh)

        qu = q + u.reshape(H, 1, dh)
        ac = matmul(qu, ke.transpose(0, 2, 1))            # terms (a)+(c)
        qv = q + v.reshape(H, 1, dh)
        bd = rel_shift(matmul(qv, kr.transpose(0, 2, 1)))  # terms (b)+(d)
        scores = (ac + bd) * (1.0 / np.sqrt(dh))

        if (edges is not None and edge_emb is not None
                and self.wkr_edge is not None and not edges.empty):
            ck = _split_heads(matmul(edge_emb, self.wkr_edge), H)  # (H, E, dh)
            qc = matmul(q, ck.transpose(0, 2, 1))                  # (H, L, E)
            vc = matmul(v.reshape(H, 1, dh), ck.transpose(0, 2, 1))
            vc = vc.reshape(H, ck.shape[1])                        # (H, E)
            inc = edge_bias(qc, vc, edges.gates, edges.src, edges.dst,
                            edges.typ, L)
            scores = scores + inc * (1.0 / np.sqrt(dh))

        probs = masked_softmax(scores, mask[None, :, :], axis=-1)
        probs = dropout(probs, cfg.dropout, rng, training)
        ctx = matmul(probs, val)                          # (H, L, dh)
        ctx = ctx.transpose(1, 0, 2).reshape(L, cfg.d_model)
        return matmul(ctx, self.wo) + self.bo


class LayerNorm(Module):
    def __init__(self, dim: int, dtype, eps: float = 1e-5):
        self.gamma = Tensor(np.ones(dim, dtype=dtype), requires_grad=True)
        self.beta = _zeros((dim,), dtype)
        self.eps = eps

    def forward(self, x: Tensor) -> Tensor:
        mu = x.mean(axis=-1, keepdims=True)
        xc = x - mu
        var = (xc * xc).mean(axis=-1, keepdims=True)
        inv = T.pow_(var + self.eps, -0.5)
        return xc * inv * self.gamma + self.beta


class PreLNBlock(Module):
    def __init__(self, cfg: BlockConfig, rng: np.random.Generator, dtype,
                 with_edges: bool = True):
        d = cfg.d_model
        self.cfg = cfg
        self.ln1 = LayerNorm(d, dtype)
        self.attn = RelAttention(cfg, rng, dtype, with_edges)
        self.ln2 = LayerNorm(d, dtype)
        self.w1 = _param(rng, (d, cfg.d_ff), dtype)
        self.b1 = _zeros((cfg.d_ff,), dtype)
        self.w2 = _param(rng, (cfg.d_ff, d), dtype)
        self.b2 = _zeros((d,), dtype)

    def forward(self, x: Tensor, rel, u, v, edge_emb, edges, mask,
                training: bool, rng: np.random.Generator) -> Tensor:
        a = self.attn.forward(self.ln1.forward(x), rel, u, v, edge_emb,
                              edges, mask, training, rng)
        x = x + dropout(a, self.cfg.dropout, rng, training)
        h = relu(matmul(self.ln2.forward(x), self.w1) + self.b1)
        h = dropout(h, self.cfg.dropout, rng, training)
        f = matmul(h, self.w2) + self.b2
        return x + dropout(f, self.cfg.dropout, rng, training)


class SubwordEmbedding(Module):
    """Per-token mean of subword embeddings; ids padded to (L, S)."""

    def __init__(self, vocab_size: int, d_model: int,
                 rng: np.random.Generator, dtype, unk_id: int, pad_id: int):
        self.table = _param(rng, (vocab_size, d_model), dtype)
        self.unk_id = unk_id
        self.pad_id = pad_id

    def forward(self, ids: np.ndarray, counts: np.ndarray, sub_dropout: float,
                training: bool, rng: np.random.Generator) -> Tensor:
        if training and sub_dropout > 0.0:
            drop = rng.random(ids.shape) < sub_dropout
            ids = np.where(drop & (ids != self.pad_id), self.unk_id, ids)
        L, S = ids.shape
        emb = take_rows(self.table, ids.reshape(-1)).reshape(L, S, -1)
        mask = (ids != self.pad_id).astype(self.table.dtype)
        summed = (emb * Tensor(mask[:, :, None])).sum(axis=1)
        return summed * Tensor((1.0 / counts)[:, None].astype(self.table.dtype))


def pad_subwords(subwords: list[list[int]], pad_id: int,
                 max_s: int = 6) -> tuple[np.ndarray, np.ndarray]:
    L = len(subwords)
    ids = np.full((L, max_s), pad_id, dtype=np.int64)
    counts = np.empty(L, dtype=np.float64)
    for i, sw in enumerate(subwords):
        sw = sw[:max_s]
        if not sw:
            raise ValueError(f"token {i} has no subwords")
        ids[i, : len(sw)] = sw
        counts[i] = len(sw)
    return ids, counts


def causal_mask(L: int) -> np.ndarray:
    return np.tril(np.ones((L, L), dtype=bool))


class Encoder(Module):
    """Subword-avg embedding + Pre-LN relative-attention stack + final LN."""

    def __init__(self, vocab_size: int, cfg: BlockConfig,
                 rng: np.random.Generator, dtype, unk_id: int, pad_id: int,
                 n_edge_types: int = 0):
        d = cfg.d_model
        self.cfg = cfg
        self.embed = SubwordEmbedding(vocab_size, d, rng, dtype, unk_id, pad_id)
        self.blocks = [PreLNBlock(cfg, rng, dtype, with_edges=n_edge_types > 0)
                       for _ in range(cfg.n_layers)]
        self.ln_f = LayerNorm(d, dtype)
        # u, v shared across layers (one copy, passed into each block).
        self.u = _param(rng, (cfg.n_heads, cfg.d_head), dtype)
        self.v = _param(rng, (cfg.n_heads, cfg.d_head), dtype)
        # One trainable embedding per edge type, global across layers.
        self.edge_emb = (_param(rng, (n_edge_types, d), dtype)
                         if n_edge_types else None)
        self.dtype = dtype

    def forward(self, ids: np.ndarray, counts: np.ndarray,
                edges: EdgeContext | None = None, training: bool = False,
                rng: np.random.Generator | None = None) -> Tensor:
        rng = rng or np.random.default_rng(0)
        L = ids.shape[0]
        x = self.embed.forward(ids, counts, self.cfg.subword_dropout,
                               training, rng)
        x = dropout(x, self.cfg.dropout, rng, training)
        rel = Tensor(sinusoid_table(L, self.cfg.d_model, self.dtype))
        mask = causal_mask(L) if self.cfg.causal else np.ones((L, L), bool)
        for blk in self.blocks:
            x = blk.forward(x, rel, self.u, self.v, self.edge_emb, edges,
                            mask, training, rng)
        return self.ln_f.forward(x)


class PairwiseHead(Module):
    """Per-pair H-head relative-attention scores → affine map → E logits."""

    def __init__(self, d_model: int, n_heads: int, width: int,
                 n_edge_types: int, rng: np.random.Generator, dtype):
        if width % n_heads != 0:
            raise ValueError("pairwise width must divide across heads")
        self.n_heads = n_heads
        self.d_head = width // n_heads
        # Similarity-preserving init: with I added to the query/key maps the
        # content-content term starts as a (head-sliced) dot product between
        # token states, so edge types keyed to lexeme identity (LastRead,
        # LastLexicalUse, Calls, ...) see usable signal immediately instead
        # of waiting for two near-zero matrices to rediscover similarity.
        self.wq = _param(rng, (d_model, width), dtype)
        self.wq.data += np.eye(d_model, width, dtype=dtype)
        self.wke = _param(rng, (d_model, width), dtype)
        self.wke.data += np.eye(d_model, width, dtype=dtype)
        self.wkr = _param(rng, (d_model, width), dtype)
        self.u = _param(rng, (n_heads, self.d_head), dtype)
        self.v = _param(rng, (n_heads, self.d_head), dtype)
        self.w_out = _param(rng, (n_heads, n_edge_types), dtype)
        # Positives are rare (~1 pair in 500), so start the output bias
        # negative: negatives begin nearly satisfied and early gradient
        # budget goes to the positive pairs instead of deflating a uniform
        # prior one step at a time.
        self.b_out = Tensor(np.full((n_edge_types,), -2.0, dtype=dtype),
                            requires_grad=True)
        self.d_model = d_model

    def forward(self, x: Tensor) -> Tensor:
        L = x.shape[0]
        H, dh = self.n_heads, self.d_head
        rel = Tensor(sinusoid_table(L, self.d_model, x.dtype))
        q = _split_heads(matmul(x, self.wq), H)
        ke = _split_heads(matmul(x, self.wke), H)
        kr = _split_heads(matmul(rel, self.wkr), H)
        ac = matmul(q + self.u.reshape(H, 1, dh), ke.transpose(0, 2, 1))
        bd = rel_shift(matmul(q + self.v.reshape(H, 1, dh),
                              kr.transpose(0, 2, 1)))
        scores = (ac + bd) * (1.0 / np.sqrt(dh))  # (H, L, L)
        scores = scores.transpose(1, 2, 0)         # (L, L, H)
        return matmul(scores, self.w_out) + self.b_out  # (L, L, E)


class GRUCell(Module):
    """Gate layout follows the r|z|n convention of the common GRU cell."""

    def __init__(self, d_in: int, d_hidden: int, rng: np.random.Generator,
                 dtype):
        self.wi = _param(rng, (d_in, 3 * d_hidden), dtype)
        self.bi = _zeros((3 * d_hidden,), dtype)
        self.wh = _param(rng, (d_hidden, 3 * d_hidden), dtype)
        self.bh = _zeros((3 * d_hidden,), dtype)
        self.d_hidden = d_hidden

    def step(self, x: Tensor, h: Tensor) -> Tensor:
        dh = self.d_hidden
        gi = matmul(x, self.wi) + self.bi
        gh = matmul(h, self.wh) + self.bh
        r = sigmoid(gi[:, 0:dh] + gh[:, 0:dh])
        z = sigmoid(gi[:, dh:2 * dh] + gh[:, dh:2 * dh])
        n = tanh(gi[:, 2 * dh:] + r * gh[:, 2 * dh:])
        return (1.0 - z) * n + z * h


class SubwordDecoder(Module):
    """GRU over subwords; output ⊕ token encoding → tanh MLP → vocab logits.

    The GRU hidden width and the MLP hidden width are both d_model/2; the
    subword embedding table is shared with the encoder.
    """

    def __init__(self, d_model: int, vocab_size: int,
                 rng: np.random.Generator, dtype):
        h = d_model // 2
        self.gru = GRUCell(d_model, h, rng, dtype)
        self.w1 = _param(rng, (h + d_model, d_model // 2), dtype)
        self.b1 = _zeros((d_model // 2,), dtype)
        self.w2 = _param(rng, (d_model // 2, vocab_size), dtype)
        self.b2 = _zeros((vocab_size,), dtype)
        self.d_hidden = h

    def step(self, prev_emb: Tensor, hidden: Tensor,
             token_enc: Tensor) -> tuple[Tensor, Tensor]:
        h2 = self.gru.step(prev_emb, hidden)
        feat = concat([h2, token_enc], axis=1)
        out = tanh(matmul(feat, self.w1) + self.b1)
        return matmul(out, self.w2) + self.b2, h2

    def init_hidden(self, batch: int, dtype) -> Tensor:
        return Tensor(np.zeros((batch, self.d_hidden), dtype=dtype))
