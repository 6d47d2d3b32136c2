"""Edge modes for task models: agnostic, aware-true, aware-fixed,
aware-tuned, aware-random-init.

The provider turns an example into gated edge indicators: ground-truth
gates (constant 1), thresholded edge-model predictions with the
straight-through gate (backward attached for the tuned/random-init modes,
severed for fixed), or nothing at all (agnostic).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..nn.gate import GateConfig, st_gate
from ..nn.layers import EdgeContext
from ..nn.snapshot import load_snapshot, restore_params
from ..nn.tensor import Tensor, no_grad
from .edge_model import EdgeModel, EdgeModelConfig, valid_pair_mask

MODE_NAMES = ("agnostic", "aware-true", "aware-fixed", "aware-tuned",
              "aware-random-init")


class EdgeModeError(ValueError):
    pass


@dataclass(frozen=True)
class EdgeMode:
    name: str
    edge_ckpt: str | None = None
    tau: float = 0.1
    init_seed: int = 0
    type_subset: tuple[int, ...] | None = None  # restrict aware-true gates

    def __post_init__(self):
        if self.name not in MODE_NAMES:
            raise EdgeModeError(f"unknown edge mode {self.name!r}")
        if self.name in ("aware-fixed", "aware-tuned") and not self.edge_ckpt:
            raise EdgeModeError(f"{self.name} requires an edge checkpoint")

    @property
    def uses_edge_model(self) -> bool:
        return self.name in ("aware-fixed", "aware-tuned", "aware-random-init")

    @property
    def trains_edge_model(self) -> bool:
        return self.name in ("aware-tuned", "aware-random-init")


def load_edge_model(ckpt_dir: str, dtype=np.float32) -> tuple[EdgeModel, dict]:
    arrays, manifest = load_snapshot(ckpt_dir)
    mc = manifest["config"]
    model = EdgeModel(EdgeModelConfig.from_dict(mc["model"]),
                      vocab_size=mc["vocab_size"], unk_id=mc["unk_id"],
                      pad_id=mc["pad_id"], seed=manifest.get("seed", 0),
                      dtype=dtype)
    restore_params(model.parameters(), arrays)
    return model, manifest


class EdgeProvider:
    """Resolves one example's gated edges for a given mode."""

    def __init__(self, mode: EdgeMode, vocab_size: int, unk_id: int,
                 pad_id: int, edge_cfg: EdgeModelConfig | None = None,
                 causal: bool = True, dtype=np.float32):
        self.mode = mode
        self.dtype = dtype
        self.edge_model: EdgeModel | None = None
        if mode.name in ("aware-fixed", "aware-tuned"):
            self.edge_model, _ = load_edge_model(mode.edge_ckpt, dtype)
        elif mode.name == "aware-random-init":
            cfg = edge_cfg or EdgeModelConfig()
            cfg.block.causal = causal
            self.edge_model = EdgeModel(cfg, vocab_size, unk_id, pad_id,
                                        seed=mode.init_seed, dtype=dtype)

    def edge_parameters(self) -> dict:
        """Parameters the task optimizer should also update."""
        if self.mode.trains_edge_model and self.edge_model is not None:
            return {f"edge_model.{k}": v
                    for k, v in self.edge_model.parameters().items()}
        return {}

    def context_for(self, subwords: list[list[int]],
                    true_edges: list[tuple[int, int, int]] | None,
                    shift: int = 0, training: bool = False,
                    rng: np.random.Generator | None = None
                    ) -> EdgeContext | None:
        name = self.mode.name
        if name == "agnostic":
            return None
        if name == "aware-true":
            if true_edges is None:
                raise EdgeModeError(
                    "aware-true needs ground-truth edges (source unparseable)")
            edges = true_edges
            if self.mode.type_subset is not None:
                keep = set(self.mode.type_subset)
                edges = [e for e in edges if e[2] in keep]
            if not edges:
                return None
            arr = np.asarray(edges, dtype=np.int64)
            gates = Tensor(np.ones(len(arr), dtype=self.dtype))
            return EdgeContext(arr[:, 0] + shift, arr[:, 1] + shift,
                               arr[:, 2], gates)
        # Prediction-driven modes.
        assert self.edge_model is not None
        if name == "aware-fixed":
            with no_grad():
                logits = self.edge_model.forward(subwords, training=False)
            return self._materialize(logits, shift, trainable=False)
        logits = self.edge_model.forward(subwords, training=training, rng=rng)
        return self._materialize(logits, shift, trainable=True)

    def _materialize(self, logits: Tensor, shift: int,
                     trainable: bool) -> EdgeContext | None:
        data = logits.data
        L = data.shape[0]
        open_mask = (data >= 0.0) & valid_pair_mask(L)
        src, dst, typ = np.nonzero(open_mask)
        if len(src) == 0:
            return None
        if trainable:
            # Gradient reaches the edge model only through materialized
            # (open) gates; closed gates contribute nothing forward.
            sel = logits[src, dst, typ]
            gates = st_gate(sel, GateConfig(self.mode.tau))
        else:
            gates = Tensor(np.ones(len(src), dtype=self.dtype))
        return EdgeContext(src + shift, dst + shift, typ, gates)


def resolve_edges(provider: EdgeProvider, subwords: list[list[int]],
                  true_edges: list[tuple[int, int, int]] | None,
                  shift: int = 0, training: bool = False,
                  rng: np.random.Generator | None = None
                  ) -> EdgeContext | None:
    return provider.context_for(subwords, true_edges, shift, training, rng)
