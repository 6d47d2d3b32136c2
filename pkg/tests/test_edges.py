"""Golden edge extraction: hand-derived edge sets for small programs,
asserted as exact set equality, plus the structural properties the
extractor guarantees."""

import time

import pytest

from graphwip.graphs import AnalysisError, EdgeSet, EdgeType, extract_edges

NT = int(EdgeType.NextToken)
LLU = int(EdgeType.LastLexicalUse)
LR = int(EdgeType.LastRead)
LW = int(EdgeType.LastWrite)
CF = int(EdgeType.ComputedFrom)
CFG = int(EdgeType.CFGNext)
RT = int(EdgeType.ReturnsTo)
FA = int(EdgeType.FormalArgName)
FLD = int(EdgeType.Field)
CL = int(EdgeType.Calls)


def chain(n_tokens):
    """The NextToken spine every token stream carries."""
    return {(i, i + 1, NT) for i in range(n_tokens - 1)}


# Each entry: (source, token count, set of non-NextToken edges).
# Token indices count synthetic NEWLINE/INDENT/DEDENT tokens too.
GOLDEN = {
    # def(0) f(1) ((2) a(3) )(4) :(5) NL(6) IND(7) b(8) =(9) a(10) +(11)
    # a(12) NL(13) return(14) b(15) NL(16) DED(17)
    "s1": (
        "def f(a):\n    b = a + a\n    return b\n", 18,
        {(8, 10, CF), (8, 12, CF),
         (12, 10, LR),
         (10, 3, LW), (12, 3, LW), (15, 8, LW),
         (10, 3, LLU), (12, 10, LLU), (15, 8, LLU),
         (14, 0, RT),
         (8, 14, CFG)}),
    # call with a literal argument; module chains def -> assignment
    "call": (
        "def f(a):\n    return a\nx = f(3)\n", 19,
        {(9, 3, LW), (9, 3, LLU),
         (8, 0, RT),
         (0, 12, CFG),
         (14, 1, CL),
         (16, 3, FA)}),
    # if/else join: both writes reach the read
    "join": (
        "def g(a):\n    if a:\n        b = 1\n    else:\n"
        "        b = 2\n    return b\n", 31,
        {(9, 3, LW), (28, 13, LW), (28, 22, LW),
         (9, 3, LLU), (22, 13, LLU), (28, 22, LLU),
         (8, 13, CFG), (8, 22, CFG), (13, 27, CFG), (22, 27, CFG),
         (27, 0, RT)}),
    # while loop: back edge makes loop-carried facts, including self-edges
    "loop": (
        "def h(n):\n    while n < 3:\n        n = n + 1\n    return n\n", 26,
        {(9, 17, LR), (17, 9, LR), (15, 17, LR), (23, 9, LR),
         (9, 3, LW), (9, 15, LW), (17, 3, LW), (17, 15, LW),
         (15, 3, LW), (15, 15, LW), (23, 3, LW), (23, 15, LW),
         (9, 3, LLU), (15, 9, LLU), (17, 15, LLU), (23, 17, LLU),
         (15, 17, CF),
         (8, 15, CFG), (8, 22, CFG), (15, 8, CFG),
         (22, 0, RT)}),
    # attribute reads: Field edges point at the object head
    "field": (
        "x = obj.size\ny = x.data + 1\n", 14,
        {(8, 0, LW), (8, 0, LLU),
         (0, 2, CF), (6, 8, CF),
         (4, 2, FLD), (10, 8, FLD),
         (0, 6, CFG)}),
    # for loop over a parameter
    "for": (
        "def s(xs):\n    t = 0\n    for x in xs:\n"
        "        t = t + x\n    return t\n", 30,
        {(15, 15, LR), (13, 23, LR), (21, 21, LR), (23, 23, LR),
         (19, 21, LR), (27, 21, LR),
         (15, 3, LW), (13, 13, LW), (21, 8, LW), (21, 19, LW),
         (23, 13, LW), (19, 8, LW), (19, 19, LW), (27, 8, LW),
         (27, 19, LW),
         (19, 8, LLU), (21, 19, LLU), (27, 21, LLU), (23, 13, LLU),
         (15, 3, LLU),
         (19, 21, CF), (19, 23, CF),
         (8, 12, CFG), (12, 19, CFG), (12, 26, CFG), (19, 12, CFG),
         (26, 0, RT)}),
    # two defs chain at module level; call forwards a variable
    "twodefs": (
        "def f(a):\n    return a\ndef g(b):\n    return b\n"
        "z = 1\nz = f(z)\n", 35,
        {(9, 3, LW), (21, 15, LW), (32, 24, LW), (28, 24, LW),
         (28, 32, LR),
         (9, 3, LLU), (21, 15, LLU), (28, 24, LLU), (32, 28, LLU),
         (28, 32, CF),
         (0, 12, CFG), (12, 24, CFG), (24, 28, CFG),
         (8, 0, RT), (20, 12, RT),
         (30, 1, CL), (32, 3, FA)}),
    # boolean operands are ordinary reads; returns never fall through
    "boolop": (
        "def p(a, b):\n    c = a < b and b > 0\n    if c:\n"
        "        return c\n    return b\n", 33,
        {(12, 3, LW), (14, 5, LW), (16, 5, LW), (21, 10, LW),
         (26, 10, LW), (30, 5, LW),
         (16, 14, LR), (26, 21, LR), (30, 16, LR),
         (12, 3, LLU), (14, 5, LLU), (16, 14, LLU), (30, 16, LLU),
         (21, 10, LLU), (26, 21, LLU),
         (10, 12, CF), (10, 14, CF), (10, 16, CF),
         (10, 20, CFG), (20, 25, CFG), (20, 29, CFG),
         (25, 0, RT), (29, 0, RT)}),
    # method call on an object: no Calls edge, obj is still read
    "method": (
        "def init(obj):\n    obj.reset(5)\n    v = obj.value\n"
        "    return v\n", 25,
        {(8, 3, LW), (17, 3, LW), (22, 15, LW),
         (17, 8, LR),
         (8, 3, LLU), (17, 8, LLU), (22, 15, LLU),
         (15, 17, CF),
         (10, 8, FLD), (19, 17, FLD),
         (8, 15, CFG), (15, 21, CFG),
         (21, 0, RT)}),
    # nested if and pass; early return has no successor
    "nested": (
        "def q(a):\n    if a > 0:\n        if a > 1:\n"
        "            return 2\n        pass\n    return 0\n", 33,
        {(9, 3, LW), (16, 3, LW),
         (16, 9, LR),
         (9, 3, LLU), (16, 9, LLU),
         (8, 15, CFG), (8, 29, CFG), (15, 22, CFG), (15, 26, CFG),
         (26, 29, CFG),
         (22, 0, RT), (29, 0, RT)}),
    # module-level reassignment: the write sees the same statement's read
    "reassign": (
        'msg = "hi"\nmsg = msg + "!"\n', 10,
        {(6, 0, LW), (4, 0, LW),
         (4, 6, LR),
         (4, 0, LLU), (6, 4, LLU),
         (4, 6, CF),
         (0, 4, CFG)}),
    # a module variable shadowing a parameter: scopes never mix
    "shadow": (
        "def f(x):\n    return x\nx = 2\ny = x\n", 20,
        {(9, 3, LW), (18, 12, LW),
         (9, 3, LLU), (18, 12, LLU),
         (16, 18, CF),
         (0, 12, CFG), (12, 16, CFG),
         (8, 0, RT)}),
}


@pytest.mark.parametrize("name", sorted(GOLDEN))
def test_golden_exact(name):
    source, n_tokens, special = GOLDEN[name]
    got = extract_edges(source)
    assert got.seq_len == n_tokens
    assert set(got.edges) == special | chain(n_tokens)


def test_golden_corpus_is_fast():
    t0 = time.time()
    for source, _, _ in GOLDEN.values():
        extract_edges(source)
    assert time.time() - t0 < 1.0


def test_unparseable_raises():
    with pytest.raises(AnalysisError):
        extract_edges("def f(a)\n    return a\n")  # missing colon


def test_error_token_raises():
    with pytest.raises(AnalysisError):
        extract_edges("x = 1 @ 2\n")


def test_edgeset_json_roundtrip():
    es = extract_edges(GOLDEN["s1"][0], source_id="s1")
    back = EdgeSet.from_json(es.to_json())
    assert back.seq_len == es.seq_len
    assert set(back.edges) == set(es.edges)
    assert back.source_id == "s1"


def test_edges_land_inside_stream():
    for source, n_tokens, _ in GOLDEN.values():
        for s, d, t in extract_edges(source).edges:
            assert 0 <= s < n_tokens and 0 <= d < n_tokens
            assert 0 <= t < len(EdgeType)


def test_next_token_is_a_chain():
    es = extract_edges("a = 1\nb = a\n")
    nexts = sorted(e[:2] for e in es.edges if e[2] == NT)
    assert nexts == [(i, i + 1) for i in range(es.seq_len - 1)]
