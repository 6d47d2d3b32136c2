"""Seeded synthetic MiniPy program generator.

Programs are built as ASTs (so they parse by construction) and rendered
to canonical text.  Every function takes at least one parameter and
assigns at least one fresh variable before its return, so misuse
injection always has two distinct in-scope variables to work with.
Generated code exercises every edge type: calls with arguments between
top-level functions, attribute reads, branches, and loops.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..minipy.parser import (
    Assign,
    Attribute,
    BinOp,
    BoolOp,
    Call,
    Compare,
    ExprStmt,
    For,
    FuncDef,
    If,
    Name,
    Node,
    Num,
    Pass,
    Program,
    Return,
    Str,
    While,
    render,
)

_VAR_POOL = ("x", "y", "z", "n", "m", "acc", "val", "tmp", "res", "item",
             "left", "right", "size", "count", "total", "data")
_FUNC_POOL = ("calc", "helper", "scan", "blend", "fold", "probe", "shift",
              "merge", "score", "weigh")
_ATTR_POOL = ("size", "head", "tail", "key", "val", "rank")
_STR_POOL = ('"a"', '"b"', '"it"', '"no"')


@dataclass
class GenConfig:
    n_files: int = 100
    funcs_per_file: tuple[int, int] = (1, 3)
    stmts_per_func: tuple[int, int] = (3, 7)
    max_expr_depth: int = 2
    n_idents: int = 10
    literals: tuple[int, ...] = (0, 1, 2, 3, 5, 10)
    seed: int = 0

    def __post_init__(self):
        if self.funcs_per_file[0] < 1 or self.funcs_per_file[0] > self.funcs_per_file[1]:
            raise ValueError("funcs_per_file range invalid")
        if self.stmts_per_func[0] < 2 or self.stmts_per_func[0] > self.stmts_per_func[1]:
            raise ValueError("stmts_per_func range invalid (need ≥2)")
        if self.n_idents < 3 or self.n_idents > len(_VAR_POOL):
            raise ValueError(f"n_idents must be in [3, {len(_VAR_POOL)}]")
        if not self.literals:
            raise ValueError("literal pool empty")


@dataclass
class _FuncScope:
    bound: list[str] = field(default_factory=list)

    def fresh(self, rng: random.Random, pool) -> str | None:
        free = [v for v in pool if v not in self.bound]
        return rng.choice(free) if free else None


def _name(v: str) -> Name:
    return Name(id=v, tok_index=-1)


class _Gen:
    def __init__(self, cfg: GenConfig, rng: random.Random):
        self.cfg = cfg
        self.rng = rng
        self.pool = _VAR_POOL[: cfg.n_idents]
        self.funcs: list[tuple[str, int]] = []  # (name, arity) defined so far

    def literal(self) -> Node:
        if self.rng.random() < 0.08:
            return Str(raw=self.rng.choice(_STR_POOL), tok_index=-1)
        return Num(value=self.rng.choice(self.cfg.literals), tok_index=-1)

    def leaf(self, scope: _FuncScope) -> Node:
        if scope.bound and self.rng.random() < 0.72:
            return _name(self.rng.choice(scope.bound))
        return self.literal()

    def expr(self, scope: _FuncScope, depth: int) -> Node:
        rng = self.rng
        if depth <= 0 or rng.random() < 0.35:
            return self.leaf(scope)
        r = rng.random()
        if r < 0.50:
            op = rng.choice(["+", "-", "*", "%"])
            return BinOp(op=op, left=self.expr(scope, depth - 1),
                         right=self.expr(scope, depth - 1))
        if r < 0.62:
            op = rng.choice(["==", "!=", "<", "<=", ">", ">="])
            return Compare(op=op, left=self.expr(scope, depth - 1),
                           right=self.expr(scope, depth - 1))
        if r < 0.70:
            if rng.random() < 0.3:
                return BoolOp(op="not", operands=[self.expr(scope, depth - 1)])
            op = rng.choice(["and", "or"])
            return BoolOp(op=op, operands=[self.expr(scope, depth - 1),
                                           self.expr(scope, depth - 1)])
        if r < 0.86 and self.funcs:
            fname, arity = rng.choice(self.funcs)
            args = [self.expr(scope, depth - 1) for _ in range(arity)]
            return Call(func=_name(fname), args=args)
        if scope.bound:
            return Attribute(obj=_name(rng.choice(scope.bound)),
                             attr=rng.choice(_ATTR_POOL), attr_tok_index=-1)
        return self.leaf(scope)

    def condition(self, scope: _FuncScope) -> Node:
        return Compare(op=self.rng.choice(["<", "<=", ">", ">=", "==", "!="]),
                       left=self.leaf(scope), right=self.leaf(scope))

    def assign(self, scope: _FuncScope) -> Assign:
        rng = self.rng
        fresh = scope.fresh(rng, self.pool)
        if fresh is not None and (not scope.bound or rng.random() < 0.45):
            target = fresh
        else:
            target = rng.choice(scope.bound) if scope.bound else fresh
        value = self.expr(scope, self.cfg.max_expr_depth)
        if target not in scope.bound:
            scope.bound.append(target)
        return Assign(target=_name(target), value=value)

    def stmt(self, scope: _FuncScope, depth: int) -> Node:
        rng = self.rng
        r = rng.random()
        if depth <= 0 or r < 0.52:
            return self.assign(scope)
        if r < 0.68:
            body = self.block(scope, depth - 1, rng.randint(1, 2))
            orelse = (self.block(scope, depth - 1, rng.randint(1, 2))
                      if rng.random() < 0.5 else [])
            return If(test=self.condition(scope), body=body, orelse=orelse)
        if r < 0.78:
            return While(test=self.condition(scope),
                         body=self.block(scope, depth - 1, rng.randint(1, 2)))
        if r < 0.88:
            fresh = scope.fresh(rng, self.pool)
            target = fresh if fresh is not None else rng.choice(scope.bound)
            iterable = (self.call_expr(scope) if self.funcs and rng.random() < 0.5
                        else _name(rng.choice(scope.bound)))
            if target not in scope.bound:
                scope.bound.append(target)
            return For(target=_name(target), iterable=iterable,
                       body=self.block(scope, depth - 1, rng.randint(1, 2)))
        if self.funcs and rng.random() < 0.7:
            return ExprStmt(value=self.call_expr(scope))
        return self.assign(scope)

    def call_expr(self, scope: _FuncScope) -> Call:
        fname, arity = self.rng.choice(self.funcs)
        args = [self.leaf(scope) for _ in range(arity)]
        return Call(func=_name(fname), args=args)

    def block(self, scope: _FuncScope, depth: int, n: int) -> list[Node]:
        return [self.stmt(scope, depth) for _ in range(n)]

    def funcdef(self, name: str) -> FuncDef:
        rng = self.rng
        n_params = rng.randint(1, 3)
        params = rng.sample(self.pool, n_params)
        scope = _FuncScope(bound=list(params))
        body: list[Node] = [self.assign(scope)]
        n_stmts = rng.randint(*self.cfg.stmts_per_func)
        for _ in range(n_stmts - 2):
            body.append(self.stmt(scope, 2))
        ret_leaf = _name(rng.choice(scope.bound))
        if rng.random() < 0.3:
            ret: Node = BinOp(op=rng.choice(["+", "*"]), left=ret_leaf,
                              right=self.leaf(scope))
        else:
            ret = ret_leaf
        body.append(Return(value=ret))
        return FuncDef(name=name, name_tok_index=-1, def_tok_index=-1,
                       params=[_name(p) for p in params], body=body)

    def program(self) -> Program:
        rng = self.rng
        n_funcs = rng.randint(*self.cfg.funcs_per_file)
        names = rng.sample(_FUNC_POOL, n_funcs)
        body: list[Node] = []
        for name in names:
            fd = self.funcdef(name)
            body.append(fd)
            self.funcs.append((name, len(fd.params)))
        if rng.random() < 0.5:
            scope = _FuncScope(bound=[])
            body.append(ExprStmt(value=self.call_expr(scope)))
        return Program(body=body)


def generate_program(cfg: GenConfig, file_seed: int) -> str:
    rng = random.Random(f"{cfg.seed}:{file_seed}")
    return render(_Gen(cfg, rng).program())
