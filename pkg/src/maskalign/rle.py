"""Run-length codec for binary masks.

Runs are counted over the row-major flattened grid and alternate between
zeros and ones, always starting with the zero run (which may be empty).
This keeps serialized masks compact and diffable in plain JSON.
"""

from __future__ import annotations

import numpy as np


def encode(grid: np.ndarray) -> list[int]:
    """Encode a binary (H, W) grid into alternating run lengths.

    The first count is the leading run of zeros, so a mask whose top-left
    pixel is set encodes as [0, ...].
    """
    if grid.ndim != 2:
        raise ValueError(f"expected a 2-d grid, got shape {grid.shape}")
    flat = np.asarray(grid).reshape(-1)
    binary = (flat != 0).astype(np.int64)
    if binary.size == 0:
        return [0]
    change = np.flatnonzero(np.diff(binary)) + 1
    bounds = np.concatenate([[0], change, [binary.size]])
    runs = np.diff(bounds).tolist()
    if binary[0] == 1:
        runs = [0] + runs
    return [int(r) for r in runs]


def decode(runs: list[int], height: int, width: int) -> np.ndarray:
    """Decode alternating run lengths back into a binary (H, W) uint8 grid."""
    counts = np.asarray(runs, dtype=np.int64)
    if counts.size and counts.min() < 0:
        raise ValueError("run lengths must be non-negative")
    total = int(counts.sum())
    if total != height * width:
        raise ValueError(
            f"run lengths sum to {total}, expected {height}x{width}={height * width}"
        )
    values = np.zeros(counts.size, dtype=np.uint8)
    values[1::2] = 1
    flat = np.repeat(values, counts)
    return flat.reshape(height, width)
