"""Lexer behavior: totality on arbitrary bytes, indent tracking, and the
token classes downstream components rely on."""

import random
import string

import pytest

from graphwip.minipy import KEYWORDS, tokenize


def kinds(src):
    return [t.kind for t in tokenize(src).tokens]


def texts_of(src, kind):
    return [t.text for t in tokenize(src).tokens if t.kind == kind]


def test_simple_statement():
    ts = tokenize("x = 1\n")
    assert [t.kind for t in ts.tokens] == [
        "identifier", "punct", "number", "NEWLINE"]
    assert ts.well_indented


def test_keywords_recognized():
    ts = tokenize("def f():\n    return None\n")
    kw = [t.text for t in ts.tokens if t.kind == "keyword"]
    assert kw == ["def", "return", "None"]
    assert set(kw) <= KEYWORDS


def test_indent_dedent_pairing():
    src = "if x:\n    y = 1\nz = 2\n"
    ks = kinds(src)
    assert ks.count("INDENT") == ks.count("DEDENT") == 1
    # dedent arrives before the statement that closes the block
    assert ks.index("DEDENT") < ks.index("NEWLINE", ks.index("DEDENT"))


def test_synthetic_tokens_are_zero_width():
    for tok in tokenize("if x:\n    pass\n").tokens:
        if tok.is_synthetic():
            assert tok.span[0] == tok.span[1]
            assert tok.text == ""


def test_tabs_expand_to_four():
    tabbed = tokenize("if x:\n\ty = 1\n")
    spaced = tokenize("if x:\n    y = 1\n")
    assert [t.kind for t in tabbed.tokens] == [t.kind for t in spaced.tokens]
    assert [t.col for t in tabbed.tokens] == [t.col for t in spaced.tokens]


def test_unmatched_dedent_marks_stream():
    # dedent lands between stack levels 0 and 4
    ts = tokenize("if x:\n    y = 1\n  z = 2\n")
    assert not ts.well_indented


def test_stray_leading_indent_is_clean():
    ts = tokenize("  x = 1\nx = 2\n")
    ks = [t.kind for t in ts.tokens]
    assert ks == ["INDENT", "identifier", "punct", "number", "NEWLINE",
                  "DEDENT", "identifier", "punct", "number", "NEWLINE"]
    assert ts.well_indented


def test_unknown_byte_becomes_error_token():
    ts = tokenize("x = 1 @ 2\n")
    assert [t.text for t in ts.tokens if t.kind == "ERROR"] == ["@"]
    # scanning continued past the bad byte
    assert "2" in [t.text for t in ts.tokens]


def test_unterminated_string_is_error():
    assert texts_of('s = "abc\n', "ERROR") == ['"abc']


def test_two_char_operators_greedy():
    assert texts_of("a <= b == c\n", "punct")[:2] == ["<=", "=="]


def test_spans_cover_lexemes():
    src = "foo = bar + 12\n"
    for tok in tokenize(src).tokens:
        if not tok.is_synthetic():
            lo, hi = tok.span
            assert src.encode()[lo:hi].decode() == tok.text


@pytest.mark.parametrize("seed", range(20))
def test_totality_fuzz(seed):
    # any byte soup must lex without raising, with balanced INDENT/DEDENT
    rng = random.Random(seed)
    alphabet = string.printable + "\t\t@$?`"
    src = "".join(rng.choice(alphabet) for _ in range(rng.randrange(400)))
    ts = tokenize(src)
    depth = 0
    for tok in ts.tokens:
        depth += {"INDENT": 1, "DEDENT": -1}.get(tok.kind, 0)
        assert depth >= 0
    assert depth == 0


def test_empty_source():
    assert tokenize("").tokens == []
