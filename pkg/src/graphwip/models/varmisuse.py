"""Variable-misuse localization and repair: bidirectional relation-aware
encoder, one affine head emitting two logits per position.

A sentinel token is prepended at slot 0; its localization logit means
"no bug".  Repair is a distribution over real token positions (the
sentinel is excluded); the repair target is spread uniformly over every
occurrence of the correct name.
"""

from __future__ import annotations

import numpy as np

from ..graphs.edges import N_EDGE_TYPES
from ..nn.layers import BlockConfig, EdgeContext, Encoder, Module, pad_subwords
from ..nn.losses import cross_entropy, cross_entropy_dist
from ..nn.tensor import Tensor, matmul, no_grad


class VarMisuseModel(Module):
    def __init__(self, block: BlockConfig, vocab_size: int, bos_id: int,
                 unk_id: int, pad_id: int, seed: int = 0, dtype=np.float32,
                 with_edges: bool = True):
        if block.causal:
            raise ValueError("misuse encoder is bidirectional")
        rng = np.random.default_rng(seed)
        self.block = block
        self.encoder = Encoder(vocab_size, block, rng, dtype, unk_id, pad_id,
                               n_edge_types=N_EDGE_TYPES if with_edges else 0)
        self.w_head = Tensor(
            rng.normal(0, 0.02, (block.d_model, 2)).astype(dtype),
            requires_grad=True)
        self.b_head = Tensor(np.zeros(2, dtype=dtype), requires_grad=True)
        self.bos_id = bos_id
        self.pad_id = pad_id
        self.dtype = dtype

    def forward(self, subwords: list[list[int]],
                edges: EdgeContext | None = None, training: bool = False,
                rng: np.random.Generator | None = None
                ) -> tuple[Tensor, Tensor]:
        """(loc logits over slots 0..N, repair logits over slots 0..N)."""
        ids, counts = pad_subwords([[self.bos_id]] + list(subwords),
                                   self.pad_id)
        x = self.encoder.forward(ids, counts, edges, training, rng)
        both = matmul(x, self.w_head) + self.b_head  # (N+1, 2)
        return both[:, 0], both[:, 1]


def varmisuse_loss(loc_logits: Tensor, rep_logits: Tensor,
                   bug_loc: int | None,
                   repair_targets: tuple[int, ...] | None) -> Tensor:
    """Localization CE (+ repair CE spread uniformly over targets).

    Targets arrive in token coordinates; slot = token index + 1.  Bug-free
    examples (bug_loc None) target slot 0 and skip the repair term.
    """
    n_slots = loc_logits.shape[0]
    loc_target = 0 if bug_loc is None else bug_loc + 1
    loss = cross_entropy(loc_logits.reshape(1, n_slots),
                         np.array([loc_target]))
    if bug_loc is not None:
        if not repair_targets:
            raise ValueError("buggy example without repair targets")
        q = np.zeros(n_slots - 1)
        for t in repair_targets:
            q[t] = 1.0 / len(repair_targets)
        loss = loss + cross_entropy_dist(rep_logits[1:], q)
    return loss


def varmisuse_predict(loc_logits: np.ndarray,
                      rep_logits: np.ndarray) -> tuple[int, int]:
    """(predicted slot, predicted repair token index)."""
    loc_slot = int(loc_logits.argmax())
    rep_tok = int(rep_logits[1:].argmax())
    return loc_slot, rep_tok


def score_example(model: VarMisuseModel, subwords: list[list[int]],
                  edges: EdgeContext | None, bug_loc: int | None,
                  repair_targets: tuple[int, ...] | None) -> dict:
    with no_grad():
        loc, rep = model.forward(subwords, edges, training=False)
    loc_slot, rep_tok = varmisuse_predict(loc.data, rep.data)
    want_slot = 0 if bug_loc is None else bug_loc + 1
    out = {"loc_correct": loc_slot == want_slot, "buggy": bug_loc is not None}
    if bug_loc is not None:
        out["rep_correct"] = rep_tok in set(repair_targets or ())
    return out


def aggregate_varmisuse(scores: list[dict]) -> dict:
    n = len(scores)
    loc = 100.0 * sum(s["loc_correct"] for s in scores) / max(n, 1)
    buggy = [s for s in scores if s["buggy"]]
    rep = (100.0 * sum(s["rep_correct"] for s in buggy) / len(buggy)
           if buggy else float("nan"))
    return {"localization": loc, "repair": rep, "n_examples": n,
            "n_buggy": len(buggy)}
