"""Variable-misuse injection: swap one variable read for another
in-scope variable.  The result still parses; the damage is semantic.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from ..graphs.cfg import build_cfg
from ..graphs.dataflow import compute_dataflow
from ..minipy.lexer import tokenize
from ..minipy.parser import ParseError, parse


@dataclass(frozen=True)
class BugAnnotation:
    bug_loc: int  # token index of the wrong occurrence
    repair_targets: tuple[int, ...]  # all tokens of the correct name, same scope
    original_name: str
    wrong_name: str


def _eligible_sites(source: str):
    stream = tokenize(source)
    ast = parse(stream)
    facts = compute_dataflow(build_cfg(ast), ast)
    occs = facts.occurrences()
    sites = []
    for occ in occs:
        if occ.is_write:
            continue
        # Names already bound (written) strictly before this read, in scope.
        bound_before = {o.name for o in occs
                        if o.scope_id == occ.scope_id and o.is_write
                        and o.tok < occ.tok}
        alternatives = sorted(bound_before - {occ.name})
        same_name = [o.tok for o in occs
                     if o.scope_id == occ.scope_id and o.name == occ.name
                     and o.tok != occ.tok]
        if alternatives and same_name:
            sites.append((occ, alternatives, sorted(same_name)))
    return stream, sites


def inject_misuse(source: str, rng: random.Random) -> tuple[str, BugAnnotation]:
    try:
        stream, sites = _eligible_sites(source)
    except ParseError as exc:
        raise ValueError(f"misuse injection needs parseable source: {exc}") from exc
    if not sites:
        raise ValueError("no eligible misuse site (need a read with an "
                         "alternative in-scope variable)")
    occ, alternatives, repair_targets = rng.choice(sites)
    wrong = rng.choice(alternatives)
    tok = stream.tokens[occ.tok]
    data = source.encode("utf-8")
    bugged = (data[:tok.span[0]] + wrong.encode("utf-8")
              + data[tok.span[1]:]).decode("utf-8")
    ann = BugAnnotation(bug_loc=occ.tok, repair_targets=tuple(repair_targets),
                        original_name=occ.name, wrong_name=wrong)
    return bugged, ann
