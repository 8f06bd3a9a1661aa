"""Oriented-box geometry against an exhaustive-rotation oracle."""

from __future__ import annotations

import numpy as np
import pytest

from maskalign.geometry import OrientedBox, axis_aligned_bounds, compute_mbr, expand_box
from maskalign.masks import MaskProposal

from conftest import random_convex_blob, rng_for


def unit_cell_corners(grid: np.ndarray) -> np.ndarray:
    """Every corner point of every member pixel's unit cell, as (x, y)."""
    rows, cols = np.nonzero(grid)
    x = cols.astype(float)
    y = rows.astype(float)
    return np.concatenate([
        np.stack([x, y], axis=1),
        np.stack([x + 1, y], axis=1),
        np.stack([x, y + 1], axis=1),
        np.stack([x + 1, y + 1], axis=1),
    ])


def exhaustive_min_area(grid: np.ndarray, step_deg: float = 0.5) -> float:
    """Oracle: minimum axis-aligned extent area over a dense rotation sweep."""
    pts = unit_cell_corners(grid)
    thetas = np.radians(np.arange(0.0, 180.0, step_deg))
    cos, sin = np.cos(thetas), np.sin(thetas)
    # rotate by -theta: x' = x cos + y sin, y' = -x sin + y cos
    xs = pts[:, 0][None, :] * cos[:, None] + pts[:, 1][None, :] * sin[:, None]
    ys = -pts[:, 0][None, :] * sin[:, None] + pts[:, 1][None, :] * cos[:, None]
    areas = (xs.max(axis=1) - xs.min(axis=1)) * (ys.max(axis=1) - ys.min(axis=1))
    return float(areas.min())


def diamond_grid(n: int, radius: int) -> np.ndarray:
    c = n // 2
    yy, xx = np.mgrid[0:n, 0:n]
    return (np.abs(yy - c) + np.abs(xx - c) <= radius).astype(np.uint8)


def test_axis_aligned_rectangle_is_its_own_mbr():
    grid = np.zeros((30, 40), dtype=np.uint8)
    grid[5:25, 8:18] = 1  # 10 wide, 20 tall
    box = compute_mbr(MaskProposal(0, grid))
    assert box.angle == pytest.approx(0.0, abs=1e-9)
    assert box.width == pytest.approx(10.0, abs=1e-9)
    assert box.height == pytest.approx(20.0, abs=1e-9)
    assert box.center == pytest.approx((13.0, 15.0), abs=1e-9)


def test_single_pixel_unit_box():
    grid = np.zeros((5, 5), dtype=np.uint8)
    grid[2, 3] = 1
    box = compute_mbr(MaskProposal(0, grid))
    assert box.width == pytest.approx(1.0)
    assert box.height == pytest.approx(1.0)
    assert box.angle == pytest.approx(0.0)
    assert box.center == pytest.approx((3.5, 2.5))


def test_diamond_mbr_angle_near_45():
    grid = diamond_grid(41, 15)
    box = compute_mbr(MaskProposal(0, grid))
    assert abs(box.angle - 45.0) <= 1.0
    oracle = exhaustive_min_area(grid)
    assert box.area <= oracle + 1e-9
    assert abs(box.area - oracle) <= 0.02 * oracle


def test_mbr_matches_exhaustive_oracle_on_random_blobs():
    rng = rng_for(97)
    for trial in range(60):
        grid = random_convex_blob(rng, 48, 48)
        mask = MaskProposal(trial, grid)
        box = compute_mbr(mask)
        oracle = exhaustive_min_area(grid)
        assert box.area <= oracle + 1e-9, f"trial {trial}"
        assert abs(box.area - oracle) <= 0.02 * oracle, f"trial {trial}"


def test_mbr_covers_every_member_pixel_center():
    rng = rng_for(11)
    for trial in range(25):
        grid = random_convex_blob(rng, 32, 32)
        box = compute_mbr(MaskProposal(trial, grid))
        rows, cols = np.nonzero(grid)
        for r, c in zip(rows, cols):
            assert box.contains_point((c + 0.5, r + 0.5), eps=1e-7)


def test_mbr_never_beats_axis_aligned_box():
    rng = rng_for(23)
    for trial in range(25):
        grid = random_convex_blob(rng, 40, 40)
        box = compute_mbr(MaskProposal(trial, grid))
        x0, y0, x1, y1 = axis_aligned_bounds(grid)
        assert box.area <= (x1 - x0) * (y1 - y0) + 1e-9


def test_mbr_angle_range():
    rng = rng_for(5)
    for trial in range(25):
        grid = random_convex_blob(rng, 32, 32)
        box = compute_mbr(MaskProposal(trial, grid))
        assert 0.0 <= box.angle < 180.0


def test_expand_box_scales_both_sides():
    box = OrientedBox(center=(10.0, 8.0), width=10.0, height=4.0, angle=30.0)
    grown = expand_box(box, 0.1)
    assert grown.width == pytest.approx(12.0)
    assert grown.height == pytest.approx(4.8)
    assert grown.angle == box.angle
    assert grown.center == box.center


def test_expand_box_zero_ratio_is_identity():
    box = OrientedBox(center=(3.0, 4.0), width=5.0, height=6.0, angle=10.0)
    same = expand_box(box, 0.0)
    assert (same.width, same.height) == (box.width, box.height)


def test_expand_box_rejects_negative_ratio():
    box = OrientedBox(center=(0.0, 0.0), width=1.0, height=1.0, angle=0.0)
    with pytest.raises(ValueError):
        expand_box(box, -0.1)


def test_oriented_box_validates_sides():
    with pytest.raises(ValueError):
        OrientedBox(center=(0.0, 0.0), width=0.0, height=1.0, angle=0.0)


def test_oriented_box_normalizes_angle():
    box = OrientedBox(center=(0.0, 0.0), width=2.0, height=1.0, angle=200.0)
    assert box.angle == pytest.approx(20.0)


def test_corners_match_width_and_height():
    box = OrientedBox(center=(5.0, 5.0), width=6.0, height=2.0, angle=37.0)
    corners = box.corners()
    assert np.linalg.norm(corners[1] - corners[0]) == pytest.approx(6.0)
    assert np.linalg.norm(corners[3] - corners[0]) == pytest.approx(2.0)
