"""Edge prediction and downstream task models."""

from .baseline_lm import (
    BaselineLM,
    baseline_sliding_eval,
    record_stream,
    sliding_positions,
    sliding_scores,
    token_aggregate,
)
from .completion import (
    CompletionModel,
    aggregate_completion,
    completion_forward,
    score_window,
)
from .edge_model import (
    EdgeModel,
    EdgeModelConfig,
    edge_forward,
    edge_loss,
    predict_edges,
    valid_pair_mask,
)
from .modes import (
    EdgeMode,
    EdgeModeError,
    EdgeProvider,
    MODE_NAMES,
    load_edge_model,
    resolve_edges,
)
from .varmisuse import (
    VarMisuseModel,
    aggregate_varmisuse,
    score_example,
    varmisuse_loss,
    varmisuse_predict,
)

__all__ = [
    "BaselineLM",
    "CompletionModel",
    "EdgeMode",
    "EdgeModeError",
    "EdgeModel",
    "EdgeModelConfig",
    "EdgeProvider",
    "MODE_NAMES",
    "VarMisuseModel",
    "aggregate_completion",
    "aggregate_varmisuse",
    "baseline_sliding_eval",
    "completion_forward",
    "edge_forward",
    "edge_loss",
    "load_edge_model",
    "predict_edges",
    "record_stream",
    "resolve_edges",
    "score_example",
    "score_window",
    "sliding_positions",
    "sliding_scores",
    "token_aggregate",
    "valid_pair_mask",
    "varmisuse_loss",
    "varmisuse_predict",
]
