"""Scene-level saliency: token-group maps, contrastive fusion, local maxima.

The referring expression splits into class tokens and modifier tokens. For
each group we average the per-token saliency grids; the normalized
difference of the two groups' attention highlights where the modifiers add
information beyond the bare category, and gating the modifier-group map
with that difference gives a scene-level cue. Fusing it with the
whole-expression map yields the grid that drives proposal selection.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

from .encoders import TokenSaliency
from .text import DecoupledExpression

# Norms below this are treated as "the two groups attend identically".
NORM_EPS = 1e-12


@dataclass
class SaliencyMap:
    """A named saliency grid. `normalized` records whether the values were
    min-max rescaled into [0, 1]."""

    grid: np.ndarray
    provenance: str
    normalized: bool = False

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=np.float64)
        if self.grid.ndim != 2:
            raise ValueError(f"saliency grid must be 2-d, got shape {self.grid.shape}")

    @property
    def shape(self) -> tuple[int, int]:
        return self.grid.shape


@dataclass
class PeakSet:
    """Local-maxima coordinates as (x, y) pairs, with the parameters that
    produced them."""

    coords: list[tuple[int, int]]
    threshold: float
    smooth_radius: int

    def __len__(self) -> int:
        return len(self.coords)


@dataclass
class TokenGroupMaps:
    """Group-averaged maps for one expression on one image."""

    l_ref: SaliencyMap
    l_cls: SaliencyMap
    l_mod: SaliencyMap
    a_cls: np.ndarray = field(repr=False, default=None)
    a_mod: np.ndarray = field(repr=False, default=None)
    g_mod: np.ndarray = field(repr=False, default=None)


def _group_mean(maps: list[np.ndarray], shape: tuple[int, int]) -> np.ndarray:
    """Mean of member maps; an empty group contributes a zero map."""
    if not maps:
        return np.zeros(shape, dtype=np.float64)
    return np.mean(np.stack(maps), axis=0)


def group_gradcam(sal: TokenSaliency, expr: DecoupledExpression) -> TokenGroupMaps:
    """Average per-token maps over the whole expression and over the class
    and modifier groups.

    Saliency per token is attention times the non-negative part of the
    gradient. Group gradients are clamped the same way before averaging.
    Every group token must be present in the saliency output.
    """
    shape = sal.map_shape

    def gather(tokens):
        attn, grad, cams = [], [], []
        for tok in tokens:
            if tok.text not in sal.attn:
                raise ValueError(f"token {tok.text!r} has no saliency map")
            a = sal.attn[tok.text]
            g = np.clip(sal.grad_raw[tok.text], 0.0, None)
            attn.append(a)
            grad.append(g)
            cams.append(a * g)
        return attn, grad, cams

    ref_a, _, ref_cams = gather(expr.ref_tokens)
    cls_a, _, cls_cams = gather(expr.cls_tokens)
    mod_a, mod_g, mod_cams = gather(expr.mod_tokens)

    return TokenGroupMaps(
        l_ref=SaliencyMap(_group_mean(ref_cams, shape), "l_ref"),
        l_cls=SaliencyMap(_group_mean(cls_cams, shape), "l_cls"),
        l_mod=SaliencyMap(_group_mean(mod_cams, shape), "l_mod"),
        a_cls=_group_mean(cls_a, shape),
        a_mod=_group_mean(mod_a, shape),
        g_mod=_group_mean(mod_g, shape),
    )


def activation_difference(a_mod: np.ndarray, a_cls: np.ndarray) -> SaliencyMap:
    """Unit-norm difference of the modifier and class attention maps.

    Where the modifiers attend beyond the category the values are positive;
    an (almost) identical pair collapses to the zero map.
    """
    a_mod = np.asarray(a_mod, dtype=np.float64)
    a_cls = np.asarray(a_cls, dtype=np.float64)
    if a_mod.shape != a_cls.shape:
        raise ValueError(f"shape mismatch: {a_mod.shape} vs {a_cls.shape}")
    diff = a_mod - a_cls
    norm = float(np.linalg.norm(diff))
    if norm < NORM_EPS:
        return SaliencyMap(np.zeros_like(diff), "a_dif")
    return SaliencyMap(diff / norm, "a_dif")


def enhance_global(a_dif: SaliencyMap, g_mod: np.ndarray,
                   l_mod: SaliencyMap) -> SaliencyMap:
    """Gate the modifier-group saliency by the attention difference and the
    clamped modifier gradient, elementwise."""
    grid = a_dif.grid * np.clip(np.asarray(g_mod, dtype=np.float64), 0.0, None) * l_mod.grid
    return SaliencyMap(grid, "l_global")


def minmax_normalize(grid: np.ndarray) -> np.ndarray:
    """Rescale into [0, 1]; a constant grid maps to all zeros."""
    grid = np.asarray(grid, dtype=np.float64)
    lo = grid.min()
    hi = grid.max()
    if hi == lo:
        return np.zeros_like(grid)
    return (grid - lo) / (hi - lo)


def fuse(l_global: SaliencyMap, l_ref: SaliencyMap, normalize: bool = True) -> SaliencyMap:
    """Mean of the scene-level and whole-expression maps.

    With normalize on (the default), both operands are min-max rescaled
    first, making the result invariant to positive rescaling of either
    input and bounded in [0, 1]. The operation is symmetric.
    """
    if l_global.shape != l_ref.shape:
        raise ValueError(f"shape mismatch: {l_global.shape} vs {l_ref.shape}")
    a, b = l_global.grid, l_ref.grid
    if normalize:
        a, b = minmax_normalize(a), minmax_normalize(b)
    return SaliencyMap((a + b) / 2.0, "l_cs", normalized=normalize)


def find_local_maxima(saliency: SaliencyMap, threshold: float = 0.5,
                      smooth_radius: int = 1) -> PeakSet:
    """Coordinates of prominent local maxima.

    After optional box smoothing, a cell is a peak when it is >= all of its
    existing 8-neighbors, strictly greater than at least one of them, and
    at least `threshold` times the global maximum. A constant grid has no
    meaningful maxima; the whole grid is returned so downstream activation
    degrades gracefully.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {threshold}")
    if smooth_radius < 0:
        raise ValueError(f"smooth radius must be non-negative, got {smooth_radius}")
    grid = saliency.grid
    if smooth_radius > 0:
        grid = ndimage.uniform_filter(grid, size=2 * smooth_radius + 1, mode="nearest")
    h, w = grid.shape

    if grid.max() == grid.min():
        coords = [(x, y) for y in range(h) for x in range(w)]
        return PeakSet(coords=coords, threshold=threshold, smooth_radius=smooth_radius)

    # Two paddings: -inf never blocks the >=-all test at the border, +inf
    # never satisfies the strictly-greater test there.
    lo_pad = np.pad(grid, 1, constant_values=-np.inf)
    hi_pad = np.pad(grid, 1, constant_values=np.inf)
    ge_all = np.ones((h, w), dtype=bool)
    gt_any = np.zeros((h, w), dtype=bool)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == 0 and dx == 0:
                continue
            ge_all &= grid >= lo_pad[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
            gt_any |= grid > hi_pad[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
    keep = ge_all & gt_any & (grid >= threshold * grid.max())
    ys, xs = np.nonzero(keep)
    coords = [(int(x), int(y)) for y, x in zip(ys, xs)]
    return PeakSet(coords=coords, threshold=threshold, smooth_radius=smooth_radius)


def fuse_expression_maps(groups: TokenGroupMaps, normalize: bool = True,
                         refine=None) -> SaliencyMap:
    """Full scene-level fusion for one expression.

    Runs the attention-difference gating and fuses with the
    whole-expression map; `refine` is an optional post-fuse transform on
    the raw grid (identity when omitted).
    """
    a_dif = activation_difference(groups.a_mod, groups.a_cls)
    l_global = enhance_global(a_dif, groups.g_mod, groups.l_mod)
    fused = fuse(l_global, groups.l_ref, normalize=normalize)
    if refine is not None:
        fused = SaliencyMap(np.asarray(refine(fused.grid), dtype=np.float64),
                            fused.provenance, normalized=False)
    return fused


def save_saliency_debug(saliency: SaliencyMap, path: str | Path) -> None:
    """Write a 16-bit grayscale preview plus a sidecar with the min/max
    needed to undo the normalization (values are exact up to the 16-bit
    quantization step)."""
    path = Path(path)
    grid = saliency.grid
    lo, hi = float(grid.min()), float(grid.max())
    scaled = np.zeros_like(grid) if hi == lo else (grid - lo) / (hi - lo)
    codes = np.round(scaled * 65535.0).astype(np.uint16)
    Image.fromarray(codes).save(path)
    sidecar = path.with_suffix(path.suffix + ".json")
    sidecar.write_text(json.dumps({
        "min": lo, "max": hi, "provenance": saliency.provenance,
        "normalized": saliency.normalized,
    }, sort_keys=True))


def load_saliency_debug(path: str | Path) -> SaliencyMap:
    path = Path(path)
    sidecar = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    codes = np.asarray(Image.open(path), dtype=np.float64)
    lo, hi = sidecar["min"], sidecar["max"]
    grid = np.full_like(codes, lo) if hi == lo else lo + codes / 65535.0 * (hi - lo)
    return SaliencyMap(grid, sidecar["provenance"], normalized=sidecar["normalized"])
