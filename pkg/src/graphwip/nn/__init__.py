"""Numeric core: tape autograd, attention blocks, gates, losses, optimizer."""

from . import kernels
from .gate import GateConfig, st_gate, st_gate_backward_factor
from .layers import (
    BlockConfig,
    EdgeContext,
    Encoder,
    GRUCell,
    LayerNorm,
    Module,
    PAPER_BLOCK,
    PairwiseHead,
    PreLNBlock,
    RelAttention,
    SubwordDecoder,
    SubwordEmbedding,
    causal_mask,
    edge_bias,
    pad_subwords,
    rel_shift,
    sinusoid_table,
)
from .losses import (
    cross_entropy,
    cross_entropy_dist,
    focal_loss,
    log_softmax,
)
from .optim import Adam, clip_global_norm, global_grad_norm
from .snapshot import load_snapshot, restore_params, save_snapshot
from .tensor import (
    Tensor,
    as_tensor,
    concat,
    dropout,
    grad_enabled,
    masked_softmax,
    matmul,
    no_grad,
    relu,
    sigmoid,
    stop_gradient,
    take_rows,
    tanh,
)

__all__ = [
    "Adam",
    "BlockConfig",
    "EdgeContext",
    "Encoder",
    "GRUCell",
    "GateConfig",
    "LayerNorm",
    "Module",
    "PAPER_BLOCK",
    "PairwiseHead",
    "PreLNBlock",
    "RelAttention",
    "SubwordDecoder",
    "SubwordEmbedding",
    "Tensor",
    "as_tensor",
    "causal_mask",
    "clip_global_norm",
    "concat",
    "cross_entropy",
    "cross_entropy_dist",
    "dropout",
    "edge_bias",
    "focal_loss",
    "global_grad_norm",
    "grad_enabled",
    "kernels",
    "load_snapshot",
    "log_softmax",
    "masked_softmax",
    "matmul",
    "no_grad",
    "pad_subwords",
    "rel_shift",
    "relu",
    "restore_params",
    "save_snapshot",
    "sigmoid",
    "sinusoid_table",
    "st_gate",
    "st_gate_backward_factor",
    "stop_gradient",
    "take_rows",
    "tanh",
]
