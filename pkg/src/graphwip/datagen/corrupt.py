"""Work-in-progress corruptions: keyword mutation, token deletion,
punctuation insertion, indentation shift.

Each corruption is a pure text edit described by (pos, old_len, new_len)
records, so label token positions can be remapped through the edit and
recovered in the corrupted stream (or detected as destroyed).  Results
always tokenize (the lexer is total); they usually stop parsing, which
is the point.
"""

from __future__ import annotations

import random
import string
from dataclasses import dataclass

from ..minipy.lexer import INDENT_UNIT, TokenStream, tokenize

PUNCT_MARKS = (",", ";", ":", ")", "(", ".")
CORRUPTION_KINDS = ("Keyword", "Deletion", "Punctuation", "Indentation")


@dataclass(frozen=True)
class TextEdit:
    pos: int
    old_len: int
    new_len: int


def map_offset(edits: list[TextEdit], off: int) -> int | None:
    """Map a pre-edit byte offset; None if it fell inside an edited region.

    Insertions at `off` push it right (a token starting at the insertion
    point moves after the inserted text).
    """
    delta = 0
    for e in sorted(edits, key=lambda e: e.pos):
        if e.pos + e.old_len <= off:
            delta += e.new_len - e.old_len
        elif e.pos <= off < e.pos + e.old_len:
            return None
        else:
            break
    return off + delta


def apply_edits(text: str, edits: list[TextEdit], replacements: list[str]) -> str:
    data = text.encode("utf-8")
    out = bytearray()
    cur = 0
    for e, rep in sorted(zip(edits, replacements), key=lambda p: p[0].pos):
        out += data[cur:e.pos]
        out += rep.encode("utf-8")
        cur = e.pos + e.old_len
    out += data[cur:]
    return out.decode("utf-8")


def _real_tokens(stream: TokenStream):
    return [t for t in stream.tokens if t.span[1] > t.span[0]]


def corrupt_keyword(text: str, rng: random.Random):
    """Mutate one character of one keyword token (substitution from [a-z])."""
    stream = tokenize(text)
    kws = [t for t in stream.tokens if t.kind == "keyword"]
    if not kws:
        edits, entry = corrupt_delete(text, rng)
        entry = dict(entry, fallback_from="Keyword")
        return edits, entry
    t = rng.choice(kws)
    pos_in = rng.randrange(len(t.text))
    old_ch = t.text[pos_in]
    new_ch = rng.choice([c for c in string.ascii_lowercase if c != old_ch])
    edit = TextEdit(pos=t.span[0] + pos_in, old_len=1, new_len=1)
    entry = {"kind": "Keyword", "location": stream.tokens.index(t),
             "detail": f"{t.text} -> {t.text[:pos_in]}{new_ch}{t.text[pos_in+1:]}"}
    return ([edit], [new_ch]), entry


def corrupt_delete(text: str, rng: random.Random):
    """Delete one real (nonzero-width) token from the text."""
    stream = tokenize(text)
    real = _real_tokens(stream)
    if not real:
        raise ValueError("nothing to delete")
    t = rng.choice(real)
    edit = TextEdit(pos=t.span[0], old_len=t.span[1] - t.span[0], new_len=0)
    entry = {"kind": "Deletion", "location": stream.tokens.index(t),
             "detail": t.text}
    return ([edit], [""]), entry


def corrupt_punct(text: str, rng: random.Random):
    """Insert one punctuation mark at a uniformly chosen token boundary."""
    stream = tokenize(text)
    real = _real_tokens(stream)
    if not real:
        raise ValueError("no token boundaries")
    boundaries = sorted({b for t in real for b in t.span})
    pos = rng.choice(boundaries)
    mark = rng.choice(PUNCT_MARKS)
    edit = TextEdit(pos=pos, old_len=0, new_len=1)
    entry = {"kind": "Punctuation", "location": pos, "detail": mark}
    return ([edit], [mark]), entry


def _line_offsets(text: str) -> list[tuple[int, str]]:
    """(byte offset of line start, line content without newline) per line."""
    out = []
    pos = 0
    for line in text.split("\n"):
        out.append((pos, line))
        pos += len(line.encode("utf-8")) + 1
    if text.endswith("\n") and out and out[-1][1] == "":
        out.pop()  # trailing empty segment after final newline
    return out


def _indent_width(line: str) -> int:
    """Expanded column width of leading whitespace (tabs = 4-col stops)."""
    width = 0
    for ch in line:
        if ch == " ":
            width += 1
        elif ch == "\t":
            width += INDENT_UNIT - (width % INDENT_UNIT)
        else:
            break
    return width


def _dedent_bytes(line: str) -> int:
    """Leading whitespace bytes to strip for a one-unit dedent."""
    width = 0
    n = 0
    for ch in line:
        if ch == " ":
            width += 1
        elif ch == "\t":
            width += INDENT_UNIT - (width % INDENT_UNIT)
        else:
            break
        n += 1
        if width >= INDENT_UNIT:
            break
    return n


def _opens_block(lines: list[tuple[int, str]], idx: int) -> bool:
    """True when line idx is the first line of a multi-line block (the
    next non-blank line is more indented)."""
    cur = lines[idx][1]
    if not cur.strip():
        return False
    for _, nxt in lines[idx + 1:]:
        if nxt.strip():
            return _indent_width(nxt) > _indent_width(cur)
    return False


def corrupt_indent(text: str, rng: random.Random):
    """Shift a contiguous span of lines by ±1 indent unit.

    Never selects a span consisting of only the first line of a
    multi-line block (such a change would merely re-anchor the block).
    """
    lines = _line_offsets(text)
    nonblank = [i for i, (_, ln) in enumerate(lines) if ln.strip()]
    if not nonblank:
        raise ValueError("no lines to re-indent")
    for _ in range(100):
        start = rng.choice(nonblank)
        end = rng.choice([i for i in nonblank if i >= start])
        span = [i for i in nonblank if start <= i <= end]
        if len(span) == 1 and _opens_block(lines, span[0]):
            continue
        direction = rng.choice((1, -1))
        if direction < 0 and all(_indent_width(lines[i][1]) == 0 for i in span):
            direction = 1
        edits: list[TextEdit] = []
        reps: list[str] = []
        for i in span:
            pos, ln = lines[i]
            if direction > 0:
                edits.append(TextEdit(pos=pos, old_len=0, new_len=INDENT_UNIT))
                reps.append(" " * INDENT_UNIT)
            else:
                nbytes = _dedent_bytes(ln)
                if nbytes > 0:
                    edits.append(TextEdit(pos=pos, old_len=nbytes, new_len=0))
                    reps.append("")
        if not edits:
            continue
        entry = {"kind": "Indentation", "location": [start, end],
                 "detail": "indent" if direction > 0 else "dedent"}
        return (edits, reps), entry
    raise ValueError("no valid indentation span found")


_APPLY = {"Keyword": corrupt_keyword, "Deletion": corrupt_delete,
          "Punctuation": corrupt_punct, "Indentation": corrupt_indent}


def apply_corruptions(source: str, k: int, rng: random.Random,
                      protected_offsets: frozenset[int] = frozenset()):
    """Apply k corruptions of uniformly sampled kinds.

    Returns (text, log, offset_map) where offset_map maps each protected
    pre-corruption byte offset to its final offset.  A corruption that
    would destroy a protected token — by editing its bytes or by merging
    it with a neighbor (e.g. deleting the `.` in `x.size`) — is
    resampled, so protected tokens survive verbatim.
    """
    if not source:
        raise ValueError("empty file")
    keys: dict[int, tuple[str, str]] = {}
    if protected_offsets:
        for t in tokenize(source).tokens:
            if t.span[0] in protected_offsets and t.span[1] > t.span[0]:
                keys[t.span[0]] = (t.kind, t.text)
        missing = set(protected_offsets) - set(keys)
        if missing:
            raise ValueError(f"no real token at protected offsets {sorted(missing)}")
    cur = source
    tracked: dict[int, int] = {o: o for o in protected_offsets}
    log: list[dict] = []
    for _ in range(k):
        for _attempt in range(80):
            kind = rng.choice(CORRUPTION_KINDS)
            try:
                (edits, reps), entry = _APPLY[kind](cur, rng)
            except ValueError:
                continue
            new_tracked = {o: map_offset(edits, c) for o, c in tracked.items()}
            if any(v is None for v in new_tracked.values()):
                continue
            new_text = apply_edits(cur, edits, reps)
            if protected_offsets:
                present = {(t.span[0], t.kind, t.text)
                           for t in tokenize(new_text).tokens}
                if any((new_tracked[o], *keys[o]) not in present
                       for o in protected_offsets):
                    continue
            cur = new_text
            tracked = new_tracked
            log.append(entry)
            break
        else:
            raise ValueError("could not corrupt without destroying labels")
    return cur, log, tracked
