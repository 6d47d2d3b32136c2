"""Parameter snapshots: flat float32 little-endian arrays plus a JSON
manifest recording names, shapes, config, seed, and step.

A snapshot is a directory holding `params.bin` and `manifest.json`.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .tensor import Tensor

FORMAT = "graphwip-snapshot-v1"


def save_snapshot(path: str | Path, params: dict[str, Tensor],
                  config: dict, seed: int, step: int) -> None:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    names = sorted(params)
    blobs = []
    shapes = {}
    for name in names:
        arr = np.ascontiguousarray(params[name].data, dtype="<f4")
        shapes[name] = list(arr.shape)
        blobs.append(arr.tobytes())
    tmp = path / "params.bin.tmp"
    tmp.write_bytes(b"".join(blobs))
    os.replace(tmp, path / "params.bin")
    manifest = {
        "format": FORMAT,
        "names": names,
        "shapes": shapes,
        "config": config,
        "seed": seed,
        "step": step,
    }
    tmp = path / "manifest.json.tmp"
    tmp.write_text(json.dumps(manifest, indent=2, sort_keys=True))
    os.replace(tmp, path / "manifest.json")


def load_snapshot(path: str | Path) -> tuple[dict[str, np.ndarray], dict]:
    path = Path(path)
    manifest = json.loads((path / "manifest.json").read_text())
    if manifest.get("format") != FORMAT:
        raise ValueError(f"unrecognized snapshot format in {path}")
    raw = (path / "params.bin").read_bytes()
    arrays: dict[str, np.ndarray] = {}
    off = 0
    for name in manifest["names"]:
        shape = tuple(manifest["shapes"][name])
        n = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(raw, dtype="<f4", count=n, offset=off)
        arrays[name] = arr.reshape(shape).astype(np.float32)
        off += n * 4
    if off != len(raw):
        raise ValueError("snapshot payload length does not match manifest")
    return arrays, manifest


def restore_params(params: dict[str, Tensor],
                   arrays: dict[str, np.ndarray]) -> None:
    """Copy stored values into live tensors in place (shared tensors stay
    shared)."""
    missing = sorted(set(params) - set(arrays))
    extra = sorted(set(arrays) - set(params))
    if missing or extra:
        raise ValueError(
            f"parameter names disagree; missing={missing} extra={extra}")
    for name, p in params.items():
        arr = arrays[name]
        if tuple(arr.shape) != tuple(p.data.shape):
            raise ValueError(f"shape mismatch for {name}")
        p.data[...] = arr.astype(p.data.dtype)
