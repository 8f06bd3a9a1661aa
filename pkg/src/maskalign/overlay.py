"""Composite overlay panels: input image, proposals, predicted labels.

Colors are derived from stable hashes so the same class or mask id always
renders the same color across runs and machines.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from .alignment import SegmentationResult
from .masks import MaskSet


def stable_color(key: str) -> tuple[int, int, int]:
    digest = hashlib.sha256(key.encode()).digest()
    # Keep channels away from pure black so labels stay visible.
    return tuple(64 + b % 192 for b in digest[:3])


def _blend(base: np.ndarray, member: np.ndarray, color, alpha: float = 0.6) -> None:
    rgb = np.array(color, dtype=np.float64)
    base[member] = (1 - alpha) * base[member] + alpha * rgb


def _as_rgb(image: np.ndarray) -> np.ndarray:
    arr = np.asarray(image)
    if arr.ndim == 2:
        arr = np.stack([arr] * 3, axis=2)
    return arr[:, :, :3].astype(np.float64)


def render_overlay(image: np.ndarray, mask_set: MaskSet,
                   result: SegmentationResult | None = None,
                   highlight: int | None = None) -> Image.Image:
    """Build the side-by-side panel image.

    Panels: the input, every proposal in its id color, and (when a result
    is given) the predicted classes with a legend. `highlight` draws one
    mask id in full opacity, for referring-expression outputs.
    """
    base = _as_rgb(image)
    h, w = base.shape[:2]

    proposals = base.copy()
    for m in mask_set:
        _blend(proposals, m.grid.astype(bool), stable_color(f"mask:{m.mask_id}"))

    panels = [base, proposals]
    legend: list[tuple[str, tuple[int, int, int]]] = []
    if result is not None:
        predictions = base.copy()
        for lm in sorted(result.foreground(), key=lambda lm: lm.probability):
            color = stable_color(f"class:{lm.class_id}")
            member = result.mask_set.get(lm.mask_id).grid.astype(bool)
            alpha = 1.0 if highlight == lm.mask_id else 0.6
            _blend(predictions, member, color, alpha=alpha)
            if lm.class_id not in [c for c, _ in legend]:
                legend.append((lm.class_id, color))
        panels.append(predictions)

    gap = 4
    legend_h = 14 * len(legend) + 4 if legend else 0
    total_w = w * len(panels) + gap * (len(panels) - 1)
    canvas = Image.new("RGB", (total_w, h + legend_h), (255, 255, 255))
    for i, panel in enumerate(panels):
        img = Image.fromarray(np.clip(np.round(panel), 0, 255).astype(np.uint8))
        canvas.paste(img, (i * (w + gap), 0))
    if legend:
        draw = ImageDraw.Draw(canvas)
        for i, (class_id, color) in enumerate(legend):
            y = h + 2 + 14 * i
            draw.rectangle([2, y, 12, y + 10], fill=color)
            draw.text((16, y - 1), class_id, fill=(0, 0, 0))
    return canvas


def save_overlay(path: str | Path, image: np.ndarray, mask_set: MaskSet,
                 result: SegmentationResult | None = None,
                 highlight: int | None = None) -> None:
    render_overlay(image, mask_set, result, highlight).save(Path(path))
