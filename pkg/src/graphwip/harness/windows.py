"""Context-window selection over token sequences.

Training windows are positioned uniformly at random; test files get 3
fixed windows at {start, middle, end}.  Files shorter than the context
yield the whole file (and 3 identical test windows).
"""

from __future__ import annotations

import numpy as np


def sample_window(n_tokens: int, context: int,
                  rng: np.random.Generator) -> tuple[int, int]:
    """(offset, length) of a uniformly positioned training window."""
    if n_tokens <= 0:
        raise ValueError("empty file")
    if n_tokens <= context:
        return 0, n_tokens
    off = int(rng.integers(0, n_tokens - context + 1))
    return off, context


def test_windows(n_tokens: int, context: int) -> list[tuple[int, int]]:
    """Three fixed (offset, length) windows: start, middle, end."""
    if n_tokens <= 0:
        raise ValueError("empty file")
    if n_tokens <= context:
        return [(0, n_tokens)] * 3
    last = n_tokens - context
    return [(0, context), (last // 2, context), (last, context)]


def slice_edges(edges: list[list[int]] | list[tuple[int, int, int]],
                offset: int, length: int) -> list[tuple[int, int, int]]:
    """Edges with both endpoints inside [offset, offset+length), shifted."""
    out = []
    hi = offset + length
    for s, d, t in edges:
        if offset <= s < hi and offset <= d < hi:
            out.append((s - offset, d - offset, t))
    return out
