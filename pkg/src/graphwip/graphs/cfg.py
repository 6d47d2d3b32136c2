"""Statement-level control-flow graphs for MiniPy.

One CFG node per statement; entry/exit are implicit per scope (they are
not tokens, so no edges ever point at them).  The module top level is a
scope of its own, in which `def` statements participate in execution
order.  Compound statements own a node for their header (condition /
iterable evaluation); their bodies are wired recursively.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..minipy.parser import (
    Assign,
    ExprStmt,
    For,
    FuncDef,
    If,
    Node,
    Pass,
    Program,
    Return,
    While,
)


@dataclass
class CfgNode:
    node_id: int
    first_tok: int
    stmt: Node
    scope_id: int
    succs: list[int] = field(default_factory=list)


@dataclass
class Scope:
    scope_id: int
    func: FuncDef | None  # None for the module scope
    entry: int | None  # node id of the first statement, None if empty
    node_ids: list[int] = field(default_factory=list)


@dataclass
class Cfg:
    nodes: list[CfgNode]
    scopes: list[Scope]

    def preds(self) -> list[list[int]]:
        p: list[list[int]] = [[] for _ in self.nodes]
        for n in self.nodes:
            for s in n.succs:
                p[s].append(n.node_id)
        return p


class _Builder:
    def __init__(self):
        self.nodes: list[CfgNode] = []
        self.scopes: list[Scope] = []

    def new_node(self, stmt: Node, scope_id: int) -> int:
        nid = len(self.nodes)
        self.nodes.append(CfgNode(node_id=nid, first_tok=stmt.tok_range[0],
                                  stmt=stmt, scope_id=scope_id))
        self.scopes[scope_id].node_ids.append(nid)
        return nid

    def wire_block(self, stmts: list[Node], follow: int | None,
                   scope_id: int) -> int | None:
        """Wire a statement list; `follow` is the node after the block
        (None = scope exit).  Returns the entry node id, or `follow`
        for an empty list."""
        if not stmts:
            return follow
        # Build back-to-front so each statement knows its successor.
        nxt = follow
        for stmt in reversed(stmts):
            nxt = self.wire_stmt(stmt, nxt, scope_id)
        return nxt

    def wire_stmt(self, stmt: Node, follow: int | None, scope_id: int) -> int:
        nid = self.new_node(stmt, scope_id)
        node = self.nodes[nid]
        if isinstance(stmt, Return):
            pass  # exit is implicit; no successors
        elif isinstance(stmt, If):
            then_entry = self.wire_block(stmt.body, follow, scope_id)
            if then_entry is not None:
                node.succs.append(then_entry)
            if stmt.orelse:
                else_entry = self.wire_block(stmt.orelse, follow, scope_id)
                if else_entry is not None:
                    node.succs.append(else_entry)
            elif follow is not None:
                node.succs.append(follow)
        elif isinstance(stmt, (While, For)):
            body_entry = self.wire_block(stmt.body, nid, scope_id)
            if body_entry is not None:
                node.succs.append(body_entry)
            if follow is not None:
                node.succs.append(follow)
        elif isinstance(stmt, (Assign, ExprStmt, Pass, FuncDef)):
            if follow is not None:
                node.succs.append(follow)
        else:
            raise TypeError(f"unexpected statement: {type(stmt).__name__}")
        return nid


def build_cfg(ast: Program) -> Cfg:
    b = _Builder()
    # Function scopes first (ids 1..), then the module scope chains all
    # top-level statements (FuncDef headers included, in execution order).
    module_scope = Scope(scope_id=0, func=None, entry=None)
    b.scopes.append(module_scope)
    for stmt in ast.body:
        if isinstance(stmt, FuncDef):
            sid = len(b.scopes)
            scope = Scope(scope_id=sid, func=stmt, entry=None)
            b.scopes.append(scope)
            scope.entry = b.wire_block(stmt.body, None, sid)
    module_scope.entry = b.wire_block(ast.body, None, 0)
    return Cfg(nodes=b.nodes, scopes=b.scopes)
