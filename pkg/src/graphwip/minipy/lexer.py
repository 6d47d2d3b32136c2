"""Lenient indentation-aware lexer for the MiniPy mini-language.

The lexer never fails: any byte sequence outside the lexical grammar
becomes an ERROR token and scanning continues.  Indentation is tracked
Python-style with a stack; a dedent to a level not on the stack pops to
the nearest enclosing level and flags the stream instead of raising.
This leniency is load-bearing: corrupted work-in-progress code must
still produce a token sequence for the models to consume.
"""

from __future__ import annotations

from dataclasses import dataclass, field

KEYWORDS = frozenset(
    ["def", "return", "if", "else", "while", "for", "in", "pass",
     "and", "or", "not", "True", "False", "None"]
)

# Multi-char operators first so greedy matching picks them up.
TWO_CHAR_PUNCT = ("==", "!=", "<=", ">=")
ONE_CHAR_PUNCT = frozenset("()+-*/%=<>,:.;")

INDENT_UNIT = 4  # canonical indent; tabs expand to this many spaces


@dataclass(frozen=True)
class Token:
    kind: str   # keyword | identifier | number | string | punct | NEWLINE | INDENT | DEDENT | ERROR
    text: str   # verbatim lexeme ("" for synthetic tokens)
    span: tuple[int, int]  # byte offsets into the UTF-8 source, half-open
    line: int   # 1-based
    col: int    # 0-based, tabs expanded

    def is_synthetic(self) -> bool:
        return self.kind in ("NEWLINE", "INDENT", "DEDENT")


@dataclass
class TokenStream:
    tokens: list[Token] = field(default_factory=list)
    source_id: str = "<memory>"
    well_indented: bool = True

    def __len__(self) -> int:
        return len(self.tokens)

    def __getitem__(self, i: int) -> Token:
        return self.tokens[i]

    def texts(self) -> list[str]:
        return [t.text for t in self.tokens]


def _is_ident_start(ch: str) -> bool:
    return ch.isalpha() or ch == "_"


def _is_ident_char(ch: str) -> bool:
    return ch.isalnum() or ch == "_"


def tokenize(source: str, source_id: str = "<memory>") -> TokenStream:
    """Lex ``source`` into a TokenStream.  Total: never raises.

    Comments are stripped, blank lines emit nothing, and INDENT/DEDENT
    bookkeeping follows a stack of expanded-column widths.  Synthetic
    tokens (NEWLINE/INDENT/DEDENT) carry zero-width spans at their
    insertion point.
    """
    stream = TokenStream(source_id=source_id)
    tokens = stream.tokens
    indent_stack = [0]
    byte_pos = 0  # running offset into the UTF-8 encoding of `source`
    line_no = 0

    for raw_line in source.split("\n"):
        line_no += 1
        line_start = byte_pos
        # Advance past this line plus its "\n" (if not the final fragment).
        line_bytes = len(raw_line.encode("utf-8"))
        nl_pos = line_start + line_bytes

        # Measure indentation with tabs expanded to INDENT_UNIT columns.
        width = 0
        i = 0
        while i < len(raw_line) and raw_line[i] in " \t":
            width += INDENT_UNIT if raw_line[i] == "\t" else 1
            i += 1
        content = raw_line[i:]
        if not content or content.startswith("#"):
            byte_pos = nl_pos + 1
            continue

        content_start = line_start + len(raw_line[:i].encode("utf-8"))
        if width > indent_stack[-1]:
            indent_stack.append(width)
            tokens.append(Token("INDENT", "", (content_start, content_start), line_no, width))
        elif width < indent_stack[-1]:
            while indent_stack[-1] > width:
                indent_stack.pop()
                tokens.append(Token("DEDENT", "", (content_start, content_start), line_no, width))
            if indent_stack[-1] != width:
                stream.well_indented = False

        _lex_line(content, content_start, line_no, width, tokens)
        # NEWLINE sits at the end of the line's content (zero-width).
        end_col = width + len(content.rstrip())
        tokens.append(Token("NEWLINE", "", (nl_pos, nl_pos), line_no, end_col))
        byte_pos = nl_pos + 1

    eof = len(source.encode("utf-8"))
    while len(indent_stack) > 1:
        indent_stack.pop()
        tokens.append(Token("DEDENT", "", (eof, eof), line_no, 0))
    return stream


def _lex_line(content: str, start_byte: int, line_no: int, indent: int,
              out: list[Token]) -> None:
    """Lex one line's content (indentation already consumed)."""
    pos = 0          # char offset into `content`
    bpos = start_byte  # byte offset into the full source
    n = len(content)

    def advance(k: int) -> None:
        nonlocal pos, bpos
        bpos += len(content[pos:pos + k].encode("utf-8"))
        pos += k

    while pos < n:
        ch = content[pos]
        if ch in " \t":
            advance(1)
            continue
        if ch == "#":
            return  # comment runs to end of line
        col = indent + pos
        if _is_ident_start(ch):
            j = pos + 1
            while j < n and _is_ident_char(content[j]):
                j += 1
            text = content[pos:j]
            kind = "keyword" if text in KEYWORDS else "identifier"
            out.append(Token(kind, text, (bpos, bpos + len(text.encode("utf-8"))), line_no, col))
            advance(j - pos)
            continue
        if ch.isdigit():
            j = pos + 1
            while j < n and content[j].isdigit():
                j += 1
            text = content[pos:j]
            out.append(Token("number", text, (bpos, bpos + len(text)), line_no, col))
            advance(j - pos)
            continue
        if ch in "'\"":
            quote = ch
            j = pos + 1
            closed = False
            while j < n:
                if content[j] == "\\" and j + 1 < n:
                    j += 2
                    continue
                if content[j] == quote:
                    j += 1
                    closed = True
                    break
                j += 1
            text = content[pos:j]
            kind = "string" if closed else "ERROR"
            out.append(Token(kind, text, (bpos, bpos + len(text.encode("utf-8"))), line_no, col))
            advance(j - pos)
            continue
        two = content[pos:pos + 2]
        if two in TWO_CHAR_PUNCT:
            out.append(Token("punct", two, (bpos, bpos + 2), line_no, col))
            advance(2)
            continue
        if ch in ONE_CHAR_PUNCT:
            out.append(Token("punct", ch, (bpos, bpos + 1), line_no, col))
            advance(1)
            continue
        # Anything else (including a lone "!") is outside the lexical grammar.
        blen = len(ch.encode("utf-8"))
        out.append(Token("ERROR", ch, (bpos, bpos + blen), line_no, col))
        advance(1)
