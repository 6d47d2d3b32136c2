"""Byte-pair encoding over token texts.

Greedy highest-frequency adjacent-pair merging with lexicographic
tie-break, learned on a corpus of token texts.  Layout tokens
(NEWLINE/INDENT/DEDENT) are atomic specials, never split.  Encoded
token length is truncated to MAX_SUBWORDS; the `#` end-of-token marker
is appended by consumers, on top of the truncated sequence.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field

MAX_SUBWORDS = 6

PAD = "<pad>"
UNK = "<unk>"
BOS = "<bos>"
EOT = "#"  # end-of-token marker (cannot occur in MiniPy token text)
NEWLINE_SYM = "<newline>"
INDENT_SYM = "<indent>"
DEDENT_SYM = "<dedent>"

SPECIALS = (PAD, UNK, BOS, EOT, NEWLINE_SYM, INDENT_SYM, DEDENT_SYM)
_LAYOUT = {"NEWLINE": NEWLINE_SYM, "INDENT": INDENT_SYM, "DEDENT": DEDENT_SYM}


@dataclass
class BpeVocab:
    merges: list[tuple[str, str]]
    id_of: dict[str, int]
    _cache: dict[str, list[int]] = field(default_factory=dict, repr=False)

    @property
    def size(self) -> int:
        return len(self.id_of)

    @property
    def pad_id(self) -> int:
        return self.id_of[PAD]

    @property
    def unk_id(self) -> int:
        return self.id_of[UNK]

    @property
    def bos_id(self) -> int:
        return self.id_of[BOS]

    @property
    def eot_id(self) -> int:
        return self.id_of[EOT]

    def _segment(self, text: str) -> list[str]:
        symbols = list(text)
        for a, b in self.merges:
            i = 0
            out: list[str] = []
            while i < len(symbols):
                if i + 1 < len(symbols) and symbols[i] == a and symbols[i + 1] == b:
                    out.append(a + b)
                    i += 2
                else:
                    out.append(symbols[i])
                    i += 1
            symbols = out
            if len(symbols) == 1:
                break
        return symbols

    def encode_text(self, text: str) -> list[int]:
        """Subword ids for one token text, truncated to MAX_SUBWORDS."""
        cached = self._cache.get(text)
        if cached is None:
            unk = self.unk_id
            cached = [self.id_of.get(s, unk) for s in self._segment(text)]
            if not cached:
                cached = [unk]
            cached = cached[:MAX_SUBWORDS]
            self._cache[text] = cached
        return list(cached)

    def encode_token(self, kind: str, text: str) -> list[int]:
        if kind in _LAYOUT:
            return [self.id_of[_LAYOUT[kind]]]
        return self.encode_text(text)

    def to_json(self) -> str:
        return json.dumps({"merges": [list(m) for m in self.merges],
                           "symbols": sorted(self.id_of, key=self.id_of.get)})

    @staticmethod
    def from_json(text: str) -> "BpeVocab":
        obj = json.loads(text)
        merges = [tuple(m) for m in obj["merges"]]
        id_of = {s: i for i, s in enumerate(obj["symbols"])}
        return BpeVocab(merges=merges, id_of=id_of)


def learn_bpe(token_texts, n_merges: int) -> BpeVocab:
    """Learn merges from an iterable of token texts (layout kinds excluded)."""
    if n_merges < 0:
        raise ValueError("n_merges must be nonnegative")
    word_freq = Counter(token_texts)
    if not word_freq:
        raise ValueError("empty corpus")
    words = {w: tuple(w) for w in word_freq}

    merges: list[tuple[str, str]] = []
    for _ in range(n_merges):
        pair_freq: Counter = Counter()
        for w, sym in words.items():
            f = word_freq[w]
            for i in range(len(sym) - 1):
                pair_freq[(sym[i], sym[i + 1])] += f
        if not pair_freq:
            break
        # Lexicographic tie-break: among max-frequency pairs take the smallest.
        top = max(pair_freq.values())
        best_pair = min(p for p, f in pair_freq.items() if f == top)
        a, b = best_pair
        merges.append(best_pair)
        fused = a + b
        new_words = {}
        for w, sym in words.items():
            i = 0
            out = []
            while i < len(sym):
                if i + 1 < len(sym) and sym[i] == a and sym[i + 1] == b:
                    out.append(fused)
                    i += 2
                else:
                    out.append(sym[i])
                    i += 1
            new_words[w] = tuple(out)
        words = new_words

    chars = sorted({c for w in word_freq for c in w})
    symbols = list(SPECIALS) + chars + [a + b for a, b in merges]
    # Merge outputs can collide with single chars ("a"+"b" vs a literal "ab"
    # char is impossible, but two different merges can't produce the same
    # string twice either since the pair disappears once fused; keep first.
    id_of: dict[str, int] = {}
    for s in symbols:
        if s not in id_of:
            id_of[s] = len(id_of)
    return BpeVocab(merges=merges, id_of=id_of)
