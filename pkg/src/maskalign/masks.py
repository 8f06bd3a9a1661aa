"""Binary mask proposals and set-level containers.

A proposal is one class-agnostic region hypothesis on a fixed pixel grid.
Proposal generation itself is out of scope; everything downstream treats
the proposals as given and immutable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _as_binary_grid(grid) -> np.ndarray:
    arr = np.asarray(grid)
    if arr.ndim != 2:
        raise ValueError(f"mask grid must be 2-d, got shape {arr.shape}")
    if arr.dtype == bool:
        return arr.astype(np.uint8)
    if not np.isin(arr, (0, 1)).all():
        raise ValueError("mask grid must contain only 0 and 1")
    return arr.astype(np.uint8)


@dataclass
class MaskProposal:
    """One binary region on an (H, W) grid. Empty masks are rejected."""

    mask_id: int
    grid: np.ndarray
    area: int = field(init=False)

    def __post_init__(self):
        self.grid = _as_binary_grid(self.grid)
        self.area = int(self.grid.sum())
        if self.area == 0:
            raise ValueError(f"mask {self.mask_id} is empty")

    @property
    def shape(self) -> tuple[int, int]:
        return self.grid.shape


@dataclass
class MaskSet:
    """All proposals for one image, with unique ids and a shared grid shape."""

    image_id: str
    image_size: tuple[int, int]
    masks: list[MaskProposal]

    def __post_init__(self):
        self.image_size = (int(self.image_size[0]), int(self.image_size[1]))
        seen = set()
        for m in self.masks:
            if m.mask_id in seen:
                raise ValueError(f"duplicate mask id {m.mask_id} in image {self.image_id}")
            seen.add(m.mask_id)
            if m.shape != self.image_size:
                raise ValueError(
                    f"mask {m.mask_id} has shape {m.shape}, image is {self.image_size}"
                )

    def __iter__(self):
        return iter(self.masks)

    def __len__(self) -> int:
        return len(self.masks)

    def ids(self) -> list[int]:
        return [m.mask_id for m in self.masks]

    def get(self, mask_id: int) -> MaskProposal:
        for m in self.masks:
            if m.mask_id == mask_id:
                return m
        raise KeyError(f"no mask with id {mask_id} in image {self.image_id}")


def mask_iou(a: np.ndarray | MaskProposal, b: np.ndarray | MaskProposal) -> float:
    """Intersection over union of two binary grids on the same shape.

    Two empty grids have IoU 0.0 by convention.
    """
    ga = a.grid if isinstance(a, MaskProposal) else _as_binary_grid(a)
    gb = b.grid if isinstance(b, MaskProposal) else _as_binary_grid(b)
    if ga.shape != gb.shape:
        raise ValueError(f"shape mismatch: {ga.shape} vs {gb.shape}")
    inter = int(np.logical_and(ga, gb).sum())
    union = int(np.logical_or(ga, gb).sum())
    if union == 0:
        return 0.0
    return inter / union


def merge_masks(masks, shape: tuple[int, int] | None = None) -> np.ndarray:
    """Pixelwise union of any number of binary grids.

    With no masks, `shape` is required and the result is all zeros.
    """
    grids = [m.grid if isinstance(m, MaskProposal) else _as_binary_grid(m) for m in masks]
    if not grids:
        if shape is None:
            raise ValueError("merge of zero masks requires an explicit shape")
        return np.zeros(shape, dtype=np.uint8)
    out = np.zeros(grids[0].shape, dtype=bool)
    for g in grids:
        if g.shape != out.shape:
            raise ValueError(f"shape mismatch: {g.shape} vs {out.shape}")
        out |= g.astype(bool)
    return out.astype(np.uint8)
