"""Shared generators for randomized fixtures."""

from __future__ import annotations

import numpy as np
from PIL import Image, ImageDraw
from scipy.spatial import ConvexHull


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def random_mask_grid(rng: np.random.Generator, h: int, w: int,
                     density: float = 0.3) -> np.ndarray:
    """Random binary grid with at least one member pixel."""
    grid = (rng.random((h, w)) < density).astype(np.uint8)
    if not grid.any():
        grid[rng.integers(0, h), rng.integers(0, w)] = 1
    return grid


def random_convex_blob(rng: np.random.Generator, h: int, w: int) -> np.ndarray:
    """Rasterize a random convex polygon; retried until non-empty."""
    while True:
        k = int(rng.integers(3, 9))
        cx = rng.uniform(w * 0.25, w * 0.75)
        cy = rng.uniform(h * 0.25, h * 0.75)
        radius = rng.uniform(min(h, w) * 0.15, min(h, w) * 0.45)
        pts = np.stack([
            cx + radius * rng.uniform(0.3, 1.0, k) * np.cos(rng.uniform(0, 2 * np.pi, k)),
            cy + radius * rng.uniform(0.3, 1.0, k) * np.sin(rng.uniform(0, 2 * np.pi, k)),
        ], axis=1)
        try:
            hull = ConvexHull(pts)
        except Exception:
            continue
        corners = [tuple(p) for p in pts[hull.vertices]]
        img = Image.new("L", (w, h), 0)
        ImageDraw.Draw(img).polygon(corners, fill=1)
        grid = (np.asarray(img) > 0).astype(np.uint8)
        if grid.any():
            return grid
