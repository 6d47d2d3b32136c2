"""Forward may-analysis over the statement CFG.

Tracks, per variable, the set of token positions that may have most
recently read it and most recently written it.  Strong updates along a
path, union at joins; loops run to fixpoint (finite lattice, monotone
transfer).  Within a statement, RHS reads are processed before the LHS
write, matching evaluation order rather than lexical order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..minipy.parser import (
    Assign,
    Attribute,
    BoolOp,
    BinOp,
    Call,
    Compare,
    ExprStmt,
    For,
    FuncDef,
    If,
    Name,
    Node,
    Num,
    Program,
    Return,
    Str,
    While,
)
from .cfg import Cfg


@dataclass(frozen=True)
class Access:
    tok: int
    name: str
    is_write: bool


@dataclass
class OccurrenceFacts:
    tok: int
    name: str
    is_write: bool
    scope_id: int
    may_last_read: frozenset[int]
    may_last_write: frozenset[int]


@dataclass
class DataflowFacts:
    by_token: dict[int, OccurrenceFacts] = field(default_factory=dict)

    def occurrences(self) -> list[OccurrenceFacts]:
        return [self.by_token[t] for t in sorted(self.by_token)]


def toplevel_func_names(ast: Program) -> dict[str, int]:
    """Names defined by exactly one top-level def → name-token index."""
    counts: dict[str, int] = {}
    tok: dict[str, int] = {}
    for stmt in ast.body:
        if isinstance(stmt, FuncDef):
            counts[stmt.name] = counts.get(stmt.name, 0) + 1
            tok[stmt.name] = stmt.name_tok_index
    return {n: tok[n] for n, c in counts.items() if c == 1}


def expr_reads(expr: Node, func_names: dict[str, int]) -> list[Access]:
    """Variable reads in an expression, in token order.

    A Name in callee position that resolves to a unique top-level def is
    a function reference (handled by call edges), not a variable read.
    Attribute field names are not Name nodes and never appear here;
    True/False/None parse as Name but carry keyword tokens, which the
    caller has already excluded by construction (they are Name nodes
    whose id is a keyword, filtered below).
    """
    out: list[Access] = []

    def visit(e: Node) -> None:
        if isinstance(e, Name):
            if e.id in ("True", "False", "None"):
                return
            out.append(Access(tok=e.tok_index, name=e.id, is_write=False))
        elif isinstance(e, (Num, Str)):
            return
        elif isinstance(e, (BinOp, Compare)):
            visit(e.left)
            visit(e.right)
        elif isinstance(e, BoolOp):
            for x in e.operands:
                visit(x)
        elif isinstance(e, Call):
            if isinstance(e.func, Name) and e.func.id in func_names:
                pass  # function reference, not a variable read
            else:
                visit(e.func)
            for a in e.args:
                visit(a)
        elif isinstance(e, Attribute):
            visit(e.obj)
        else:
            raise TypeError(f"unexpected expression: {type(e).__name__}")

    visit(expr)
    out.sort(key=lambda a: a.tok)
    return out


def stmt_accesses(stmt: Node, func_names: dict[str, int]) -> list[Access]:
    """Ordered variable accesses of one statement (reads before writes)."""
    if isinstance(stmt, Assign):
        return expr_reads(stmt.value, func_names) + [
            Access(tok=stmt.target.tok_index, name=stmt.target.id, is_write=True)]
    if isinstance(stmt, Return):
        return expr_reads(stmt.value, func_names) if stmt.value else []
    if isinstance(stmt, ExprStmt):
        return expr_reads(stmt.value, func_names)
    if isinstance(stmt, If):
        return expr_reads(stmt.test, func_names)
    if isinstance(stmt, While):
        return expr_reads(stmt.test, func_names)
    if isinstance(stmt, For):
        return expr_reads(stmt.iterable, func_names) + [
            Access(tok=stmt.target.tok_index, name=stmt.target.id, is_write=True)]
    return []  # Pass, FuncDef header


_State = dict[str, tuple[frozenset[int], frozenset[int]]]


def _merge(into: _State, src: _State) -> bool:
    changed = False
    for name, (r, w) in src.items():
        if name in into:
            r0, w0 = into[name]
            r1, w1 = r0 | r, w0 | w
            if r1 != r0 or w1 != w0:
                into[name] = (r1, w1)
                changed = True
        else:
            into[name] = (r, w)
            changed = True
    return changed


def _transfer(state: _State, accesses: list[Access]) -> _State:
    out = dict(state)
    for a in accesses:
        r, w = out.get(a.name, (frozenset(), frozenset()))
        if a.is_write:
            out[a.name] = (r, frozenset({a.tok}))
        else:
            out[a.name] = (frozenset({a.tok}), w)
    return out


def compute_dataflow(cfg: Cfg, ast: Program) -> DataflowFacts:
    func_names = toplevel_func_names(ast)
    facts = DataflowFacts()
    accesses = {n.node_id: stmt_accesses(n.stmt, func_names) for n in cfg.nodes}

    for scope in cfg.scopes:
        init: _State = {}
        if scope.func is not None:
            for p in scope.func.params:
                # The binding itself sees empty sets; record it now.
                facts.by_token[p.tok_index] = OccurrenceFacts(
                    tok=p.tok_index, name=p.id, is_write=True,
                    scope_id=scope.scope_id,
                    may_last_read=frozenset(), may_last_write=frozenset())
                init[p.id] = (frozenset(), frozenset({p.tok_index}))
        if scope.entry is None:
            continue

        in_states: dict[int, _State] = {scope.entry: init}
        worklist = [scope.entry]
        while worklist:
            nid = worklist.pop()
            out = _transfer(in_states[nid], accesses[nid])
            for s in cfg.nodes[nid].succs:
                if s not in in_states:
                    in_states[s] = {k: v for k, v in out.items()}
                    worklist.append(s)
                elif _merge(in_states[s], out):
                    worklist.append(s)

        # Fixpoint reached; replay each node once to attribute facts.
        for nid in scope.node_ids:
            state = in_states.get(nid)
            if state is None:  # unreachable statement
                state = {}
            cur = dict(state)
            for a in accesses[nid]:
                r, w = cur.get(a.name, (frozenset(), frozenset()))
                facts.by_token[a.tok] = OccurrenceFacts(
                    tok=a.tok, name=a.name, is_write=a.is_write,
                    scope_id=scope.scope_id, may_last_read=r, may_last_write=w)
                if a.is_write:
                    cur[a.name] = (r, frozenset({a.tok}))
                else:
                    cur[a.name] = (frozenset({a.tok}), w)
    return facts
