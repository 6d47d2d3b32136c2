"""Strict parser: accepts the toy grammar, rejects anything the lexer had
to paper over, and renders back to canonical 4-space form."""

import pytest

from graphwip.minipy import (
    Assign,
    BinOp,
    Call,
    FuncDef,
    Name,
    ParseError,
    parse,
    render,
    tokenize,
    walk,
)

GOOD = """\
def add(a, b):
    c = a + b
    return c

def main():
    x = add(1, 2)
    while x < 10:
        x = x + 1
    if x == 10:
        pass
    else:
        x = 0
    return x
"""


def test_parse_good_program():
    ast = parse(tokenize(GOOD))
    funcs = [n for n in walk(ast) if isinstance(n, FuncDef)]
    assert [f.name for f in funcs] == ["add", "main"]


def test_funcdef_params():
    ast = parse(tokenize("def f(a, b, c):\n    return a\n"))
    (func,) = [n for n in walk(ast) if isinstance(n, FuncDef)]
    assert [p.id for p in func.params] == ["a", "b", "c"]


def test_expression_precedence():
    ast = parse(tokenize("x = 1 + 2 * 3\n"))
    (assign,) = [n for n in walk(ast) if isinstance(n, Assign)]
    top = assign.value
    assert isinstance(top, BinOp) and top.op == "+"
    assert isinstance(top.right, BinOp) and top.right.op == "*"


def test_call_with_attribute():
    ast = parse(tokenize("y = obj.method(x)\n"))
    (call,) = [n for n in walk(ast) if isinstance(n, Call)]
    assert isinstance(call.args[0], Name)


@pytest.mark.parametrize("bad", [
    "def f(:\n    pass\n",          # malformed params
    "x = \n",                       # missing RHS
    "return 1\n" * 0 + "if x\n    pass\n",   # missing colon
    "x = 1 @ 2\n",                  # ERROR token in stream
    "def f():\n    y = 1\n  z = 2\n",  # unmatched dedent
    "while :\n    pass\n",
])
def test_parse_errors(bad):
    with pytest.raises(ParseError):
        parse(tokenize(bad))


def test_render_is_canonical():
    messy = "def f( a ,b ):\n        c=a+b\n        return  c\n"
    clean = render(parse(tokenize(messy)))
    assert clean == "def f(a, b):\n    c = a + b\n    return c\n"


def test_render_roundtrip_fixpoint():
    out1 = render(parse(tokenize(GOOD)))
    out2 = render(parse(tokenize(out1)))
    assert out1 == out2


def test_grammar_doc_exists():
    import os

    path = os.path.join(os.path.dirname(__file__), "..", "docs", "grammar.md")
    text = open(path).read()
    # the EBNF must at least name every statement form the parser accepts
    for word in ("funcdef", "if", "while", "for", "return", "pass"):
        assert word in text
