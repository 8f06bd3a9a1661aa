"""Oriented bounding geometry for mask proposals.

Pixels are treated as unit cells: the pixel at row r, column c occupies the
square [c, c+1] x [r, r+1] in (x, y) coordinates, so a single pixel yields
a 1x1 box and a filled axis-aligned rectangle yields a box with exactly its
pixel dimensions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.spatial import ConvexHull

from .masks import MaskProposal


@dataclass
class OrientedBox:
    """A rectangle with center (x, y), side lengths, and a rotation angle.

    `width` is the extent along the angle direction, `height` the extent
    along the orthogonal. Angles are degrees in [0, 180), measured from the
    +x axis toward +y (downward on screen).
    """

    center: tuple[float, float]
    width: float
    height: float
    angle: float

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"box sides must be positive, got {self.width}x{self.height}")
        self.angle = float(self.angle) % 180.0

    @property
    def area(self) -> float:
        return self.width * self.height

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        """Unit vectors along the width and height directions."""
        a = math.radians(self.angle)
        u = np.array([math.cos(a), math.sin(a)])
        v = np.array([-math.sin(a), math.cos(a)])
        return u, v

    def corners(self) -> np.ndarray:
        """The four corner points, shape (4, 2), in (x, y) order."""
        u, v = self.axes()
        c = np.asarray(self.center, dtype=float)
        hw, hh = self.width / 2.0, self.height / 2.0
        return np.array([
            c - hw * u - hh * v,
            c + hw * u - hh * v,
            c + hw * u + hh * v,
            c - hw * u + hh * v,
        ])

    def contains_point(self, point, eps: float = 1e-9) -> bool:
        u, v = self.axes()
        d = np.asarray(point, dtype=float) - np.asarray(self.center, dtype=float)
        return (abs(float(d @ u)) <= self.width / 2.0 + eps
                and abs(float(d @ v)) <= self.height / 2.0 + eps)


def _boundary_corner_points(grid: np.ndarray) -> np.ndarray:
    """Corner points (x, y) of the unit cells on the mask boundary.

    Interior pixels cannot contribute hull vertices, so eroding them away
    keeps the hull input small on large blobs.
    """
    inner = ndimage.binary_erosion(grid.astype(bool))
    boundary = grid.astype(bool) & ~inner
    if not boundary.any():
        boundary = grid.astype(bool)
    rows, cols = np.nonzero(boundary)
    x = cols.astype(float)
    y = rows.astype(float)
    return np.concatenate([
        np.stack([x, y], axis=1),
        np.stack([x + 1.0, y], axis=1),
        np.stack([x, y + 1.0], axis=1),
        np.stack([x + 1.0, y + 1.0], axis=1),
    ])


def _hull_points(points: np.ndarray) -> np.ndarray:
    hull = ConvexHull(points)
    return points[hull.vertices]


def compute_mbr(mask: MaskProposal) -> OrientedBox:
    """Minimum-area oriented box covering every unit cell of the mask.

    Classic rotating calipers: the optimal box is flush with some edge of
    the convex hull of the cell corner points, so it suffices to evaluate
    each hull edge direction. Ties in area break toward the smaller angle,
    which pins axis-aligned masks to angle 0. The returned angle is
    canonicalized into [0, 90) (the same box re-described with swapped
    sides covers the rest of the range).
    """
    pts = _hull_points(_boundary_corner_points(mask.grid))
    edges = np.roll(pts, -1, axis=0) - pts
    angles = np.arctan2(edges[:, 1], edges[:, 0]) % (math.pi / 2.0)
    angles = np.unique(angles)

    best = None
    for theta in angles:
        c, s = math.cos(theta), math.sin(theta)
        rot = np.array([[c, s], [-s, c]])  # rotate points by -theta
        proj = pts @ rot.T
        lo = proj.min(axis=0)
        hi = proj.max(axis=0)
        w, h = hi - lo
        area = w * h
        deg = math.degrees(theta) % 90.0
        if best is not None:
            tol = 1e-9 * max(1.0, best[0])
            if area > best[0] + tol:
                continue
            if abs(area - best[0]) <= tol and deg >= best[1]:
                continue
        center_local = (lo + hi) / 2.0
        center = rot.T @ center_local
        best = (area, deg, float(w), float(h), (float(center[0]), float(center[1])))

    area, deg, w, h, center = best
    return OrientedBox(center=center, width=w, height=h, angle=deg)


def expand_box(box: OrientedBox, ratio: float) -> OrientedBox:
    """Symmetrically grow both sides by `ratio` on each end (scale 1 + 2*ratio)."""
    if ratio < 0:
        raise ValueError(f"buffer ratio must be non-negative, got {ratio}")
    scale = 1.0 + 2.0 * ratio
    return OrientedBox(
        center=box.center,
        width=box.width * scale,
        height=box.height * scale,
        angle=box.angle,
    )


def axis_aligned_bounds(grid: np.ndarray) -> tuple[float, float, float, float]:
    """Unit-cell bounding extents (x0, y0, x1, y1) of a binary grid."""
    rows, cols = np.nonzero(grid)
    if rows.size == 0:
        raise ValueError("cannot bound an empty grid")
    return float(cols.min()), float(rows.min()), float(cols.max() + 1), float(rows.max() + 1)
