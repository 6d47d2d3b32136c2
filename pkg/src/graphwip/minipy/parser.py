"""Strict recursive-descent parser and renderer for MiniPy.

The parser is the flip side of the lenient lexer: it fails on the first
grammar violation (including streams whose indentation did not close
cleanly).  Every AST node records the half-open token index range it
covers, so downstream analyses can map structure back onto the token
sequence.  Grammar is documented in docs/grammar.md.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .lexer import Token, TokenStream

COMPARE_OPS = frozenset(["==", "!=", "<", "<=", ">", ">="])
ADD_OPS = frozenset(["+", "-"])
MUL_OPS = frozenset(["*", "/", "%"])


class ParseError(Exception):
    """Raised on any grammar violation; carries the offending token index."""

    def __init__(self, message: str, index: int, token: Token | None = None):
        self.index = index
        self.token = token
        where = f" at token {index}"
        if token is not None:
            where += f" ({token.kind} {token.text!r}, line {token.line})"
        super().__init__(message + where)


@dataclass
class Node:
    tok_range: tuple[int, int] = field(default=(0, 0), kw_only=True)

    def children(self) -> list["Node"]:
        return []


@dataclass
class Name(Node):
    id: str
    tok_index: int


@dataclass
class Num(Node):
    value: int
    tok_index: int


@dataclass
class Str(Node):
    raw: str
    tok_index: int


@dataclass
class BinOp(Node):
    op: str
    left: Node
    right: Node

    def children(self):
        return [self.left, self.right]


@dataclass
class Compare(Node):
    op: str
    left: Node
    right: Node

    def children(self):
        return [self.left, self.right]


@dataclass
class BoolOp(Node):
    op: str  # "and" | "or" | "not"
    operands: list[Node]

    def children(self):
        return list(self.operands)


@dataclass
class Call(Node):
    func: Node
    args: list[Node]

    def children(self):
        return [self.func, *self.args]


@dataclass
class Attribute(Node):
    obj: Node
    attr: str
    attr_tok_index: int

    def children(self):
        return [self.obj]


@dataclass
class Assign(Node):
    target: Name
    value: Node

    def children(self):
        return [self.target, self.value]


@dataclass
class Return(Node):
    value: Node | None
    kw_tok_index: int = 0

    def children(self):
        return [self.value] if self.value is not None else []


@dataclass
class ExprStmt(Node):
    value: Node

    def children(self):
        return [self.value]


@dataclass
class Pass(Node):
    pass


@dataclass
class If(Node):
    test: Node
    body: list[Node]
    orelse: list[Node]

    def children(self):
        return [self.test, *self.body, *self.orelse]


@dataclass
class While(Node):
    test: Node
    body: list[Node]

    def children(self):
        return [self.test, *self.body]


@dataclass
class For(Node):
    target: Name
    iterable: Node
    body: list[Node]

    def children(self):
        return [self.target, self.iterable, *self.body]


@dataclass
class FuncDef(Node):
    name: str
    name_tok_index: int
    def_tok_index: int
    params: list[Name]
    body: list[Node]

    def children(self):
        return [*self.params, *self.body]


@dataclass
class Program(Node):
    body: list[Node] = field(default_factory=list)

    def children(self):
        return list(self.body)


def walk(node: Node):
    yield node
    for child in node.children():
        yield from walk(child)


class _Parser:
    def __init__(self, stream: TokenStream):
        self.toks = stream.tokens
        self.pos = 0
        self.in_function = False

    # -- token helpers ----------------------------------------------------

    def peek(self) -> Token | None:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.peek()
        if t is None or t.kind != kind:
            return False
        return text is None or t.text == text

    def expect(self, kind: str, text: str | None = None) -> int:
        t = self.peek()
        if t is None:
            raise ParseError(f"expected {text or kind}, found end of input", self.pos)
        if t.kind != kind or (text is not None and t.text != text):
            raise ParseError(f"expected {text or kind}", self.pos, t)
        self.pos += 1
        return self.pos - 1

    def fail(self, expected: str) -> ParseError:
        return ParseError(f"expected {expected}", self.pos, self.peek())

    # -- grammar ----------------------------------------------------------

    def parse_program(self) -> Program:
        body: list[Node] = []
        while self.pos < len(self.toks):
            if self.at("NEWLINE"):
                self.pos += 1
                continue
            if self.at("keyword", "def"):
                body.append(self.parse_funcdef())
            else:
                body.append(self.parse_statement())
        end = body[-1].tok_range[1] if body else 0
        return Program(body=body, tok_range=(0, end))

    def parse_funcdef(self) -> FuncDef:
        start = self.pos
        def_idx = self.expect("keyword", "def")
        name_idx = self.expect("identifier")
        self.expect("punct", "(")
        params: list[Name] = []
        if self.at("identifier"):
            while True:
                idx = self.expect("identifier")
                params.append(Name(id=self.toks[idx].text, tok_index=idx,
                                   tok_range=(idx, idx + 1)))
                if self.at("punct", ","):
                    self.pos += 1
                else:
                    break
        self.expect("punct", ")")
        self.expect("punct", ":")
        was_in_function = self.in_function
        self.in_function = True
        body = self.parse_block()
        self.in_function = was_in_function
        return FuncDef(name=self.toks[name_idx].text, name_tok_index=name_idx,
                       def_tok_index=def_idx, params=params, body=body,
                       tok_range=(start, self.pos))

    def parse_block(self) -> list[Node]:
        self.expect("NEWLINE")
        self.expect("INDENT")
        body = [self.parse_statement()]
        while not self.at("DEDENT"):
            if self.peek() is None:
                raise self.fail("DEDENT")
            body.append(self.parse_statement())
        self.expect("DEDENT")
        return body

    def parse_statement(self) -> Node:
        t = self.peek()
        if t is None:
            raise self.fail("statement")
        if t.kind == "keyword":
            if t.text == "if":
                return self.parse_if()
            if t.text == "while":
                return self.parse_while()
            if t.text == "for":
                return self.parse_for()
            if t.text == "return":
                return self.parse_return()
            if t.text == "pass":
                start = self.pos
                self.pos += 1
                self.expect("NEWLINE")
                return Pass(tok_range=(start, self.pos))
            if t.text == "def":
                raise ParseError("function definitions are top-level only",
                                 self.pos, t)
        return self.parse_simple()

    def parse_if(self) -> If:
        start = self.pos
        self.expect("keyword", "if")
        test = self.parse_expr()
        self.expect("punct", ":")
        body = self.parse_block()
        orelse: list[Node] = []
        if self.at("keyword", "else"):
            self.pos += 1
            self.expect("punct", ":")
            orelse = self.parse_block()
        return If(test=test, body=body, orelse=orelse, tok_range=(start, self.pos))

    def parse_while(self) -> While:
        start = self.pos
        self.expect("keyword", "while")
        test = self.parse_expr()
        self.expect("punct", ":")
        body = self.parse_block()
        return While(test=test, body=body, tok_range=(start, self.pos))

    def parse_for(self) -> For:
        start = self.pos
        self.expect("keyword", "for")
        idx = self.expect("identifier")
        target = Name(id=self.toks[idx].text, tok_index=idx, tok_range=(idx, idx + 1))
        self.expect("keyword", "in")
        iterable = self.parse_expr()
        self.expect("punct", ":")
        body = self.parse_block()
        return For(target=target, iterable=iterable, body=body,
                   tok_range=(start, self.pos))

    def parse_return(self) -> Return:
        start = self.pos
        kw = self.expect("keyword", "return")
        if not self.in_function:
            raise ParseError("return outside function", kw, self.toks[kw])
        value = None
        if not self.at("NEWLINE"):
            value = self.parse_expr()
        self.expect("NEWLINE")
        return Return(value=value, kw_tok_index=kw, tok_range=(start, self.pos))

    def parse_simple(self) -> Node:
        start = self.pos
        # Assignment is NAME "=" expr; disambiguate with one token of lookahead.
        if (self.at("identifier") and self.pos + 1 < len(self.toks)
                and self.toks[self.pos + 1].kind == "punct"
                and self.toks[self.pos + 1].text == "="):
            idx = self.expect("identifier")
            target = Name(id=self.toks[idx].text, tok_index=idx, tok_range=(idx, idx + 1))
            self.expect("punct", "=")
            value = self.parse_expr()
            self.expect("NEWLINE")
            return Assign(target=target, value=value, tok_range=(start, self.pos))
        value = self.parse_expr()
        self.expect("NEWLINE")
        return ExprStmt(value=value, tok_range=(start, self.pos))

    # Expressions, lowest to highest precedence.

    def parse_expr(self) -> Node:
        return self.parse_or()

    def parse_or(self) -> Node:
        start = self.pos
        node = self.parse_and()
        while self.at("keyword", "or"):
            self.pos += 1
            rhs = self.parse_and()
            node = BoolOp(op="or", operands=[node, rhs], tok_range=(start, self.pos))
        return node

    def parse_and(self) -> Node:
        start = self.pos
        node = self.parse_not()
        while self.at("keyword", "and"):
            self.pos += 1
            rhs = self.parse_not()
            node = BoolOp(op="and", operands=[node, rhs], tok_range=(start, self.pos))
        return node

    def parse_not(self) -> Node:
        if self.at("keyword", "not"):
            start = self.pos
            self.pos += 1
            operand = self.parse_not()
            return BoolOp(op="not", operands=[operand], tok_range=(start, self.pos))
        return self.parse_comparison()

    def parse_comparison(self) -> Node:
        start = self.pos
        node = self.parse_arith()
        if self.at("punct") and self.peek().text in COMPARE_OPS:
            op = self.peek().text
            self.pos += 1
            rhs = self.parse_arith()
            node = Compare(op=op, left=node, right=rhs, tok_range=(start, self.pos))
        return node

    def parse_arith(self) -> Node:
        start = self.pos
        node = self.parse_term()
        while self.at("punct") and self.peek().text in ADD_OPS:
            op = self.peek().text
            self.pos += 1
            rhs = self.parse_term()
            node = BinOp(op=op, left=node, right=rhs, tok_range=(start, self.pos))
        return node

    def parse_term(self) -> Node:
        start = self.pos
        node = self.parse_postfix()
        while self.at("punct") and self.peek().text in MUL_OPS:
            op = self.peek().text
            self.pos += 1
            rhs = self.parse_postfix()
            node = BinOp(op=op, left=node, right=rhs, tok_range=(start, self.pos))
        return node

    def parse_postfix(self) -> Node:
        start = self.pos
        node = self.parse_atom()
        while True:
            if self.at("punct", "("):
                self.pos += 1
                args: list[Node] = []
                if not self.at("punct", ")"):
                    while True:
                        args.append(self.parse_expr())
                        if self.at("punct", ","):
                            self.pos += 1
                        else:
                            break
                self.expect("punct", ")")
                node = Call(func=node, args=args, tok_range=(start, self.pos))
            elif self.at("punct", "."):
                self.pos += 1
                idx = self.expect("identifier")
                node = Attribute(obj=node, attr=self.toks[idx].text,
                                 attr_tok_index=idx, tok_range=(start, self.pos))
            else:
                return node

    def parse_atom(self) -> Node:
        t = self.peek()
        if t is None:
            raise self.fail("expression")
        if t.kind == "identifier":
            self.pos += 1
            return Name(id=t.text, tok_index=self.pos - 1,
                        tok_range=(self.pos - 1, self.pos))
        if t.kind == "number":
            self.pos += 1
            return Num(value=int(t.text), tok_index=self.pos - 1,
                       tok_range=(self.pos - 1, self.pos))
        if t.kind == "string":
            self.pos += 1
            return Str(raw=t.text, tok_index=self.pos - 1,
                       tok_range=(self.pos - 1, self.pos))
        if t.kind == "keyword" and t.text in ("True", "False", "None"):
            self.pos += 1
            return Name(id=t.text, tok_index=self.pos - 1,
                        tok_range=(self.pos - 1, self.pos))
        if t.kind == "punct" and t.text == "(":
            start = self.pos
            self.pos += 1
            node = self.parse_expr()
            self.expect("punct", ")")
            inner = node
            inner.tok_range = (start, self.pos)
            return inner
        raise self.fail("expression")


def parse(stream: TokenStream) -> Program:
    """Parse a TokenStream into a Program, or raise ParseError."""
    if not stream.well_indented:
        bad = next((i for i, t in enumerate(stream.tokens) if t.kind == "DEDENT"), 0)
        raise ParseError("inconsistent dedent", bad,
                         stream.tokens[bad] if stream.tokens else None)
    for i, t in enumerate(stream.tokens):
        if t.kind == "ERROR":
            raise ParseError("unrecognized lexeme", i, t)
    return _Parser(stream).parse_program()


# -- renderer -------------------------------------------------------------

_ATOM_TYPES = (Name, Num, Str)


def _render_expr(node: Node, parent_prec: int = 0) -> str:
    """Render with minimal parentheses; precedence: or=1 and=2 not=3 cmp=4 +−=5 */%=6 postfix=7."""
    if isinstance(node, Name):
        return node.id
    if isinstance(node, Num):
        return str(node.value)
    if isinstance(node, Str):
        return node.raw
    if isinstance(node, BoolOp):
        if node.op == "not":
            text = "not " + _render_expr(node.operands[0], 3)
            prec = 3
        else:
            prec = 1 if node.op == "or" else 2
            text = f" {node.op} ".join(_render_expr(x, prec) for x in node.operands)
        return f"({text})" if prec < parent_prec else text
    if isinstance(node, Compare):
        text = f"{_render_expr(node.left, 5)} {node.op} {_render_expr(node.right, 5)}"
        return f"({text})" if parent_prec > 4 else text
    if isinstance(node, BinOp):
        prec = 5 if node.op in ADD_OPS else 6
        # Left-assoc: right child needs parens at equal precedence.
        text = (f"{_render_expr(node.left, prec)} {node.op} "
                f"{_render_expr(node.right, prec + 1)}")
        return f"({text})" if prec < parent_prec else text
    if isinstance(node, Call):
        args = ", ".join(_render_expr(a, 0) for a in node.args)
        return f"{_render_expr(node.func, 7)}({args})"
    if isinstance(node, Attribute):
        return f"{_render_expr(node.obj, 7)}.{node.attr}"
    raise TypeError(f"not an expression node: {type(node).__name__}")


def _render_stmt(node: Node, depth: int, out: list[str]) -> None:
    pad = "    " * depth
    if isinstance(node, Assign):
        out.append(f"{pad}{node.target.id} = {_render_expr(node.value)}\n")
    elif isinstance(node, Return):
        if node.value is None:
            out.append(f"{pad}return\n")
        else:
            out.append(f"{pad}return {_render_expr(node.value)}\n")
    elif isinstance(node, ExprStmt):
        out.append(f"{pad}{_render_expr(node.value)}\n")
    elif isinstance(node, Pass):
        out.append(f"{pad}pass\n")
    elif isinstance(node, If):
        out.append(f"{pad}if {_render_expr(node.test)}:\n")
        for s in node.body:
            _render_stmt(s, depth + 1, out)
        if node.orelse:
            out.append(f"{pad}else:\n")
            for s in node.orelse:
                _render_stmt(s, depth + 1, out)
    elif isinstance(node, While):
        out.append(f"{pad}while {_render_expr(node.test)}:\n")
        for s in node.body:
            _render_stmt(s, depth + 1, out)
    elif isinstance(node, For):
        out.append(f"{pad}for {node.target.id} in {_render_expr(node.iterable)}:\n")
        for s in node.body:
            _render_stmt(s, depth + 1, out)
    elif isinstance(node, FuncDef):
        params = ", ".join(p.id for p in node.params)
        out.append(f"{pad}def {node.name}({params}):\n")
        for s in node.body:
            _render_stmt(s, depth + 1, out)
    else:
        raise TypeError(f"not a statement node: {type(node).__name__}")


def render(ast: Program) -> str:
    """Render an AST to canonical MiniPy text (4-space indent)."""
    out: list[str] = []
    for stmt in ast.body:
        _render_stmt(stmt, 0, out)
    return "".join(out)


def ast_equal(a: Node, b: Node) -> bool:
    """Structural equality ignoring token indices and ranges."""
    if type(a) is not type(b):
        return False
    if isinstance(a, Name):
        return a.id == b.id
    if isinstance(a, Num):
        return a.value == b.value
    if isinstance(a, Str):
        return a.raw == b.raw
    if isinstance(a, (BinOp, Compare, BoolOp)):
        if a.op != b.op:
            return False
    if isinstance(a, Attribute) and a.attr != b.attr:
        return False
    if isinstance(a, FuncDef) and a.name != b.name:
        return False
    ca, cb = a.children(), b.children()
    if isinstance(a, If) and (len(a.body), len(a.orelse)) != (len(b.body), len(b.orelse)):
        return False
    if len(ca) != len(cb):
        return False
    return all(ast_equal(x, y) for x, y in zip(ca, cb))
