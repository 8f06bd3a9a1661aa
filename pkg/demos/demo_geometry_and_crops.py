"""Walkthrough: binary masks, run-length codes, oriented boxes, and crops.

Run with:  python3 demos/demo_geometry_and_crops.py
Artifacts land in demos/output/.
"""

import pathlib

import numpy as np
from PIL import Image

from maskalign import rle
from maskalign.cropping import CropConfig, crop_patch
from maskalign.geometry import compute_mbr, expand_box
from maskalign.masks import MaskProposal, mask_iou

out_dir = pathlib.Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

# ---------------------------------------------------------------
# 1. a tilted rectangle as a binary mask
# ---------------------------------------------------------------
h = w = 64
yy, xx = np.mgrid[0:h, 0:w]
cy, cx = 32.0, 32.0
theta = np.deg2rad(30.0)
u = (xx + 0.5 - cx) * np.cos(theta) + (yy + 0.5 - cy) * np.sin(theta)
v = -(xx + 0.5 - cx) * np.sin(theta) + (yy + 0.5 - cy) * np.cos(theta)
grid = ((np.abs(u) <= 18) & (np.abs(v) <= 7)).astype(np.uint8)
mask = MaskProposal(0, grid)
print("mask area:", mask.area)

# ---------------------------------------------------------------
# 2. run-length codes are how masks travel in JSON files
# ---------------------------------------------------------------
runs = rle.encode(grid)
print("run-length code has", len(runs), "runs; first five:", runs[:5])
back = rle.decode(runs, h, w)
print("round trip lossless:", bool(np.array_equal(back, grid)))

# ---------------------------------------------------------------
# 3. the minimum-area oriented box recovers the tilt
# ---------------------------------------------------------------
box = compute_mbr(mask)
print(f"oriented box: {box.width:.2f} x {box.height:.2f} at "
      f"{box.angle:.1f} degrees, center "
      f"({box.center[0]:.1f}, {box.center[1]:.1f})")
print("axis-aligned area would be",
      (grid.any(axis=0).sum()) * (grid.any(axis=1).sum()),
      "vs oriented", f"{box.width * box.height:.1f}")

# a buffered box adds breathing room on every side
bigger = expand_box(box, 0.1)
print(f"after 10% buffer: {bigger.width:.2f} x {bigger.height:.2f}")

# ---------------------------------------------------------------
# 4. crop variants feed different pixels to an image encoder
# ---------------------------------------------------------------
image = np.zeros((h, w, 3), dtype=np.uint8)
image[..., 2] = 40
image[grid.astype(bool)] = (220, 80, 60)

for variant in ("bb", "bb_buffer", "bb_mask", "mask_only", "mbr_buffer"):
    crop = crop_patch(image.astype(np.float32), mask,
                       CropConfig(variant=variant, ratio=0.1))
    png = out_dir / f"crop_{variant}.png"
    Image.fromarray(np.clip(crop, 0, 255).astype(np.uint8)).save(png)
    print(f"{variant:>10}: crop shape {crop.shape} -> {png.name}")

# ---------------------------------------------------------------
# 5. IoU is the yardstick used everywhere downstream
# ---------------------------------------------------------------
shifted = np.roll(grid, 6, axis=1)
print("IoU of the mask against a 6px shifted copy:",
      round(mask_iou(grid, shifted), 4))
print("done; open", out_dir, "to compare the crops")
