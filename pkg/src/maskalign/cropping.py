"""Crop a per-mask image patch for the local encoder.

The crop variant is the main lever for how much scene context travels with
each region: from the bare masked pixels up to an oriented box with a
proportional buffer around it. All variants return float32 patches and pad
with zeros up to a minimum side length so tiny regions stay encodable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .geometry import OrientedBox, axis_aligned_bounds, compute_mbr, expand_box
from .masks import MaskProposal

CROP_VARIANTS = ("mask_only", "bb", "bb_mask", "bb_buffer", "mbr", "mbr_buffer")


@dataclass
class CropConfig:
    """How to cut the per-mask patch.

    ratio only affects the *_buffer variants; min_side is the zero-padded
    floor on both patch dimensions.
    """

    variant: str = "mbr_buffer"
    ratio: float = 0.1
    min_side: int = 16

    def __post_init__(self):
        if self.variant not in CROP_VARIANTS:
            raise ValueError(
                f"unknown crop variant {self.variant!r}, expected one of {CROP_VARIANTS}"
            )
        if self.ratio < 0:
            raise ValueError(f"buffer ratio must be non-negative, got {self.ratio}")
        if self.min_side < 1:
            raise ValueError(f"min_side must be at least 1, got {self.min_side}")


def _as_float_image(image: np.ndarray) -> np.ndarray:
    arr = np.asarray(image, dtype=np.float32)
    if arr.ndim not in (2, 3):
        raise ValueError(f"image must be (H, W) or (H, W, C), got shape {arr.shape}")
    return arr


def _apply_mask(image: np.ndarray, grid: np.ndarray) -> np.ndarray:
    if image.ndim == 2:
        return image * grid
    return image * grid[:, :, None]


def pad_to_min_side(patch: np.ndarray, min_side: int) -> np.ndarray:
    """Zero-pad a patch symmetrically so both sides are at least min_side."""
    h, w = patch.shape[:2]
    out_h, out_w = max(h, min_side), max(w, min_side)
    if (out_h, out_w) == (h, w):
        return patch
    top = (out_h - h) // 2
    left = (out_w - w) // 2
    pad = [(top, out_h - h - top), (left, out_w - w - left)]
    if patch.ndim == 3:
        pad.append((0, 0))
    return np.pad(patch, pad)


def _crop_rect(image: np.ndarray, x0: float, y0: float, x1: float, y1: float) -> np.ndarray:
    h, w = image.shape[:2]
    r0 = max(0, int(np.floor(y0)))
    r1 = min(h, int(np.ceil(y1)))
    c0 = max(0, int(np.floor(x0)))
    c1 = min(w, int(np.ceil(x1)))
    if r1 <= r0 or c1 <= c0:
        raise ValueError("crop rectangle lies outside the image")
    return image[r0:r1, c0:c1]


def crop_oriented(image: np.ndarray, box: OrientedBox) -> np.ndarray:
    """Resample the contents of an oriented box into an upright patch.

    The patch is sampled bilinearly along the box axes; samples falling
    outside the image read as zero.
    """
    image = _as_float_image(image)
    pw = max(1, int(round(box.width)))
    ph = max(1, int(round(box.height)))
    u, v = box.axes()
    cx, cy = box.center
    jj, ii = np.meshgrid(np.arange(pw), np.arange(ph))
    du = (jj + 0.5) - pw / 2.0
    dv = (ii + 0.5) - ph / 2.0
    src_x = cx + du * u[0] + dv * v[0]
    src_y = cy + du * u[1] + dv * v[1]
    # Pixel centers sit at (c + 0.5, r + 0.5), so shift into array coords.
    coords = [src_y - 0.5, src_x - 0.5]
    if image.ndim == 2:
        return ndimage.map_coordinates(image, coords, order=1, mode="constant", cval=0.0)
    channels = [
        ndimage.map_coordinates(image[:, :, k], coords, order=1, mode="constant", cval=0.0)
        for k in range(image.shape[2])
    ]
    return np.stack(channels, axis=2)


def crop_patch(image: np.ndarray, mask: MaskProposal, config: CropConfig) -> np.ndarray:
    """Cut the patch for one mask according to the configured variant.

    Variants:
      mask_only   full frame with non-member pixels zeroed
      bb          axis-aligned bounding box, context kept
      bb_mask     axis-aligned bounding box of the masked image
      bb_buffer   axis-aligned box grown by ratio per side, context kept
      mbr         minimum oriented box resampled upright, context kept
      mbr_buffer  buffered minimum oriented box resampled upright
    """
    image = _as_float_image(image)
    if image.shape[:2] != mask.shape:
        raise ValueError(
            f"mask {mask.mask_id} shape {mask.shape} does not match image {image.shape[:2]}"
        )
    variant = config.variant
    if variant == "mask_only":
        patch = _apply_mask(image, mask.grid)
    elif variant in ("bb", "bb_mask", "bb_buffer"):
        x0, y0, x1, y1 = axis_aligned_bounds(mask.grid)
        if variant == "bb_buffer":
            cx, cy = (x0 + x1) / 2.0, (y0 + y1) / 2.0
            hw = (x1 - x0) * (1.0 + 2.0 * config.ratio) / 2.0
            hh = (y1 - y0) * (1.0 + 2.0 * config.ratio) / 2.0
            x0, x1, y0, y1 = cx - hw, cx + hw, cy - hh, cy + hh
        source = _apply_mask(image, mask.grid) if variant == "bb_mask" else image
        patch = _crop_rect(source, x0, y0, x1, y1)
    else:
        box = compute_mbr(mask)
        if variant == "mbr_buffer":
            box = expand_box(box, config.ratio)
        patch = crop_oriented(image, box)
    return pad_to_min_side(np.ascontiguousarray(patch, dtype=np.float32), config.min_side)
