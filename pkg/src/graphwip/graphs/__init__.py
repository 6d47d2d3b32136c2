"""Program graphs: CFG, data-flow facts, typed token-pair edges, scoring."""

from .cfg import Cfg, CfgNode, Scope, build_cfg
from .dataflow import Access, DataflowFacts, OccurrenceFacts, compute_dataflow
from .edges import (
    AnalysisError,
    Edge,
    EdgeSet,
    EdgeType,
    N_EDGE_TYPES,
    edge_stats,
    edges_from_analysis,
    extract_edges,
    head_token,
)
from .metrics import PRF, EdgeMetrics, edge_metrics, pool_edge_metrics

__all__ = [
    "Cfg", "CfgNode", "Scope", "build_cfg",
    "Access", "DataflowFacts", "OccurrenceFacts", "compute_dataflow",
    "AnalysisError", "Edge", "EdgeSet", "EdgeType", "N_EDGE_TYPES",
    "edge_stats", "edges_from_analysis", "extract_edges", "head_token",
    "PRF", "EdgeMetrics", "edge_metrics", "pool_edge_metrics",
]
