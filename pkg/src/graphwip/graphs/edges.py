"""Ground-truth edge extraction: ten typed, directed token-pair relations.

Directions follow a "query looks back" convention so that most edges are
visible under causal masking: data-flow and lexical edges point from the
later occurrence to the earlier one, ComputedFrom points LHS→RHS,
ReturnsTo return→def, Calls call-site→definition, FormalArgName
argument→parameter, Field attribute→object head.  NextToken and CFGNext
point forward by nature.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import IntEnum

from ..minipy.lexer import TokenStream, tokenize
from ..minipy.parser import (
    Attribute,
    BinOp,
    BoolOp,
    Call,
    Compare,
    FuncDef,
    Name,
    Node,
    Num,
    ParseError,
    Program,
    Return,
    Str,
    parse,
    walk,
)
from .cfg import Cfg, build_cfg
from .dataflow import DataflowFacts, compute_dataflow, expr_reads, toplevel_func_names
from ..minipy.parser import Assign


class EdgeType(IntEnum):
    NextToken = 0
    LastLexicalUse = 1
    LastRead = 2
    LastWrite = 3
    ComputedFrom = 4
    CFGNext = 5
    ReturnsTo = 6
    FormalArgName = 7
    Field = 8
    Calls = 9


N_EDGE_TYPES = len(EdgeType)
EDGE_TYPE_NAMES = tuple(t.name for t in EdgeType)

Edge = tuple[int, int, int]  # (src, dst, type code)


class AnalysisError(Exception):
    """Edge extraction failed because the source does not parse."""


@dataclass(frozen=True)
class EdgeSet:
    seq_len: int
    edges: tuple[Edge, ...]
    source_id: str = "<memory>"

    @staticmethod
    def from_iter(seq_len: int, edges, source_id: str = "<memory>") -> "EdgeSet":
        uniq = sorted({(int(s), int(d), int(t)) for (s, d, t) in edges})
        for s, d, t in uniq:
            if not (0 <= s < seq_len and 0 <= d < seq_len):
                raise ValueError(f"edge ({s},{d}) out of range for L={seq_len}")
            if not 0 <= t < N_EDGE_TYPES:
                raise ValueError(f"bad edge type code {t}")
        return EdgeSet(seq_len=seq_len, edges=tuple(uniq), source_id=source_id)

    def __len__(self) -> int:
        return len(self.edges)

    def by_type(self, t: EdgeType) -> list[Edge]:
        return [e for e in self.edges if e[2] == int(t)]

    def to_json(self) -> str:
        return json.dumps({
            "source_id": self.source_id,
            "seq_len": self.seq_len,
            "edges": [list(e) for e in self.edges],
        })

    @staticmethod
    def from_json(text: str) -> "EdgeSet":
        obj = json.loads(text)
        return EdgeSet.from_iter(obj["seq_len"], obj["edges"], obj["source_id"])


def head_token(expr: Node) -> int:
    """Leftmost primary token of an expression (the syntactic head)."""
    while True:
        if isinstance(expr, (Name, Num, Str)):
            return expr.tok_index
        if isinstance(expr, (BinOp, Compare)):
            expr = expr.left
        elif isinstance(expr, BoolOp):
            expr = expr.operands[0]
        elif isinstance(expr, Call):
            expr = expr.func
        elif isinstance(expr, Attribute):
            expr = expr.obj
        else:
            raise TypeError(f"no head token for {type(expr).__name__}")


def _funcdefs_by_name(ast: Program) -> dict[str, FuncDef]:
    unique = toplevel_func_names(ast)
    return {s.name: s for s in ast.body
            if isinstance(s, FuncDef) and s.name in unique}


def edges_from_analysis(stream: TokenStream, ast: Program, cfg: Cfg,
                        facts: DataflowFacts) -> EdgeSet:
    L = len(stream)
    func_names = toplevel_func_names(ast)
    funcdefs = _funcdefs_by_name(ast)
    edges: set[Edge] = set()

    for i in range(L - 1):
        edges.add((i, i + 1, int(EdgeType.NextToken)))

    # Data-flow edges from the fixpoint facts.
    for occ in facts.occurrences():
        for r in occ.may_last_read:
            edges.add((occ.tok, r, int(EdgeType.LastRead)))
        for w in occ.may_last_write:
            edges.add((occ.tok, w, int(EdgeType.LastWrite)))

    # LastLexicalUse: same variable, same scope, previous occurrence in
    # token order, independent of control flow.
    by_var: dict[tuple[int, str], list[int]] = {}
    for occ in facts.occurrences():
        by_var.setdefault((occ.scope_id, occ.name), []).append(occ.tok)
    for toks in by_var.values():
        for prev, cur in zip(toks, toks[1:]):
            edges.add((cur, prev, int(EdgeType.LastLexicalUse)))

    # Syntax-derived edges.
    for top in ast.body:
        for node in walk(top):
            if isinstance(node, Assign):
                for a in expr_reads(node.value, func_names):
                    edges.add((node.target.tok_index, a.tok,
                               int(EdgeType.ComputedFrom)))
            elif isinstance(node, Attribute):
                edges.add((node.attr_tok_index, head_token(node.obj),
                           int(EdgeType.Field)))
            elif isinstance(node, Call):
                if isinstance(node.func, Name) and node.func.id in funcdefs:
                    fd = funcdefs[node.func.id]
                    edges.add((node.func.tok_index, fd.name_tok_index,
                               int(EdgeType.Calls)))
                    for arg, param in zip(node.args, fd.params):
                        edges.add((head_token(arg), param.tok_index,
                                   int(EdgeType.FormalArgName)))
            elif isinstance(node, FuncDef):
                for inner in walk(node):
                    if isinstance(inner, Return):
                        edges.add((inner.kw_tok_index, node.def_tok_index,
                                   int(EdgeType.ReturnsTo)))

    for n in cfg.nodes:
        for s in n.succs:
            edges.add((n.first_tok, cfg.nodes[s].first_tok,
                       int(EdgeType.CFGNext)))

    return EdgeSet.from_iter(L, edges, source_id=stream.source_id)


def extract_edges(source: str, source_id: str = "<memory>") -> EdgeSet:
    """Full pipeline: tokenize, parse (strict), analyze, extract.

    Raises AnalysisError when the source does not parse — predicted
    edges, not ground truth, are what ill-formed code gets.
    """
    stream = tokenize(source, source_id=source_id)
    try:
        ast = parse(stream)
    except ParseError as exc:
        raise AnalysisError(str(exc)) from exc
    cfg = build_cfg(ast)
    facts = compute_dataflow(cfg, ast)
    return edges_from_analysis(stream, ast, cfg, facts)


def edge_stats(edges: EdgeSet) -> dict:
    """Per-type counts plus density of connected ordered pairs."""
    counts = {t.name: 0 for t in EdgeType}
    pairs = set()
    for s, d, t in edges.edges:
        counts[EdgeType(t).name] += 1
        pairs.add((s, d))
    L = edges.seq_len
    denom = L * (L - 1)
    density = len(pairs) / denom if denom > 0 else 0.0
    return {"counts": counts, "total": len(edges.edges),
            "connected_pairs": len(pairs), "seq_len": L, "density": density}
