"""MiniPy: lenient lexer + strict parser for the toy Python-like language."""

from .lexer import INDENT_UNIT, KEYWORDS, Token, TokenStream, tokenize
from .parser import (
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
    ParseError,
    Pass,
    Program,
    Return,
    Str,
    While,
    ast_equal,
    parse,
    render,
    walk,
)

__all__ = [
    "INDENT_UNIT", "KEYWORDS", "Token", "TokenStream", "tokenize",
    "Assign", "Attribute", "BinOp", "BoolOp", "Call", "Compare", "ExprStmt",
    "For", "FuncDef", "If", "Name", "Node", "Num", "ParseError", "Pass",
    "Program", "Return", "Str", "While", "ast_equal", "parse", "render", "walk",
]
