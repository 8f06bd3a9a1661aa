"""Bring mask proposals (and ground truth) into the pipeline.

Proposals arrive from serialized containers, from deterministic synthetic
generators, or from named adapter plugins. The container format is plain
JSON with run-length encoded masks, so fixtures diff cleanly and round-trip
losslessly.
"""

from __future__ import annotations

import hashlib
import importlib.util
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import rle
from .evaluation import GtInstance
from .masks import MaskProposal, MaskSet

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# container serialization

def mask_set_to_container(mask_set: MaskSet) -> dict:
    h, w = mask_set.image_size
    return {
        "image_id": mask_set.image_id,
        "height": h,
        "width": w,
        "masks": [{"id": m.mask_id, "rle": rle.encode(m.grid)} for m in mask_set],
    }


def container_to_mask_set(container: dict, source: str = "<container>") -> MaskSet:
    """Decode a container dict; empty masks are rejected and logged, format
    problems (bad runs, duplicate ids) raise."""
    try:
        image_id = str(container["image_id"])
        h, w = int(container["height"]), int(container["width"])
        raw_masks = container["masks"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"{source}: malformed proposal container: {exc}") from exc
    masks = []
    for entry in raw_masks:
        mask_id = int(entry["id"])
        try:
            grid = rle.decode(entry["rle"], h, w)
        except ValueError as exc:
            raise ValueError(f"{source}: mask {mask_id}: {exc}") from exc
        if not grid.any():
            logger.warning("%s: rejected empty mask %d", source, mask_id)
            continue
        masks.append(MaskProposal(mask_id=mask_id, grid=grid))
    return MaskSet(image_id=image_id, image_size=(h, w), masks=masks)


def save_proposals(mask_set: MaskSet, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(mask_set_to_container(mask_set), sort_keys=True) + "\n")


def load_container_file(path: str | Path) -> MaskSet:
    path = Path(path)
    try:
        container = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"cannot read proposal file {path}: {exc}") from exc
    return container_to_mask_set(container, source=str(path))


# ---------------------------------------------------------------------------
# synthetic proposal layouts

def _stable_seed(*parts) -> int:
    digest = hashlib.sha256("|".join(str(p) for p in parts).encode()).hexdigest()
    return int(digest[:16], 16)


def synthetic_masks(image_id: str, image_size: tuple[int, int],
                    seed: int = 0, layout: str = "grid2x2") -> MaskSet:
    """Deterministic proposal sets for tests and dry runs.

    gridRxC tiles the image into R*C rectangles; blobs:N draws N random
    non-degenerate rectangles seeded by (seed, image_id).
    """
    h, w = image_size
    masks: list[MaskProposal] = []
    if layout.startswith("grid"):
        try:
            rows, cols = (int(v) for v in layout[4:].split("x"))
        except ValueError as exc:
            raise ValueError(f"bad grid layout {layout!r}, expected e.g. grid2x2") from exc
        if rows < 1 or cols < 1 or rows > h or cols > w:
            raise ValueError(f"layout {layout!r} does not fit a {h}x{w} image")
        r_edges = np.linspace(0, h, rows + 1).astype(int)
        c_edges = np.linspace(0, w, cols + 1).astype(int)
        mask_id = 0
        for r in range(rows):
            for c in range(cols):
                grid = np.zeros((h, w), dtype=np.uint8)
                grid[r_edges[r]:r_edges[r + 1], c_edges[c]:c_edges[c + 1]] = 1
                masks.append(MaskProposal(mask_id=mask_id, grid=grid))
                mask_id += 1
    elif layout.startswith("blobs:"):
        n = int(layout.split(":", 1)[1])
        rng = np.random.Generator(np.random.PCG64(_stable_seed(seed, image_id)))
        for mask_id in range(n):
            bh = int(rng.integers(1, max(2, h // 2)))
            bw = int(rng.integers(1, max(2, w // 2)))
            r0 = int(rng.integers(0, h - bh + 1))
            c0 = int(rng.integers(0, w - bw + 1))
            grid = np.zeros((h, w), dtype=np.uint8)
            grid[r0:r0 + bh, c0:c0 + bw] = 1
            masks.append(MaskProposal(mask_id=mask_id, grid=grid))
    else:
        raise ValueError(f"unknown synthetic layout {layout!r}")
    return MaskSet(image_id=image_id, image_size=(h, w), masks=masks)


# ---------------------------------------------------------------------------
# adapter plugins

PROPOSAL_ADAPTERS: dict[str, object] = {}


def register_adapter(name: str, factory) -> None:
    """factory(params: dict) -> callable(image_id, image_size) -> MaskSet"""
    PROPOSAL_ADAPTERS[name] = factory


def load_adapter_plugins(directory: str | Path) -> list[str]:
    """Import every .py file in `directory` and let it register adapters
    via its module-level register(register_adapter) hook."""
    directory = Path(directory)
    loaded = []
    for path in sorted(directory.glob("*.py")):
        spec = importlib.util.spec_from_file_location(f"maskalign_plugin_{path.stem}", path)
        module = importlib.util.module_from_spec(spec)
        spec.loader.exec_module(module)
        hook = getattr(module, "register", None)
        if hook is None:
            raise ValueError(f"plugin {path} defines no register() hook")
        hook(register_adapter)
        loaded.append(path.stem)
    return loaded


# ---------------------------------------------------------------------------
# proposal source facade

@dataclass
class ProposalSource:
    """Where proposals come from.

    kind "file": path is a container file or a directory of
    <image_id>.json containers. kind "synthetic": seed + layout. kind
    "adapter": a registered adapter name plus its params.
    """

    kind: str
    path: str | None = None
    seed: int = 0
    layout: str = "grid2x2"
    adapter: str | None = None
    params: dict = field(default_factory=dict)


def load_proposals(source: ProposalSource, image_id: str,
                   image_size: tuple[int, int] | None = None) -> MaskSet:
    if source.kind == "file":
        path = Path(source.path)
        if path.is_dir():
            path = path / f"{image_id}.json"
        mask_set = load_container_file(path)
        if mask_set.image_id != image_id:
            raise ValueError(
                f"{path} holds proposals for {mask_set.image_id!r}, wanted {image_id!r}"
            )
        return mask_set
    if source.kind == "synthetic":
        if image_size is None:
            raise ValueError("synthetic proposals need an explicit image size")
        return synthetic_masks(image_id, image_size, seed=source.seed, layout=source.layout)
    if source.kind == "adapter":
        factory = PROPOSAL_ADAPTERS.get(source.adapter)
        if factory is None:
            raise ValueError(f"no proposal adapter registered as {source.adapter!r}")
        return factory(source.params)(image_id, image_size)
    raise ValueError(f"unknown proposal source kind {source.kind!r}")


# ---------------------------------------------------------------------------
# synthetic scenes (image + proposals + ground truth in one go)

@dataclass
class ShapeSpec:
    kind: str  # rect | ellipse | diamond
    center: tuple[float, float]  # (x, y)
    size: tuple[float, float]  # (width, height)
    color: tuple[int, int, int]
    category: str | None = None
    angle: float = 0.0


@dataclass
class SceneSpec:
    size: tuple[int, int]  # (H, W)
    background: tuple[int, int, int] = (96, 96, 96)
    shapes: list[ShapeSpec] = field(default_factory=list)
    distractors: list[ShapeSpec] = field(default_factory=list)
    allow_overlap: bool = False
    noise: float = 0.0
    seed: int = 0
    image_id: str = "scene"


def _rasterize(shape: ShapeSpec, size: tuple[int, int]) -> np.ndarray:
    h, w = size
    yy, xx = np.mgrid[0:h, 0:w]
    # pixel centers
    px = xx + 0.5
    py = yy + 0.5
    cx, cy = shape.center
    sw, sh = shape.size
    dx = px - cx
    dy = py - cy
    if shape.angle:
        a = math.radians(shape.angle)
        rx = dx * math.cos(a) + dy * math.sin(a)
        ry = -dx * math.sin(a) + dy * math.cos(a)
        dx, dy = rx, ry
    if shape.kind == "rect":
        member = (np.abs(dx) <= sw / 2.0) & (np.abs(dy) <= sh / 2.0)
    elif shape.kind == "ellipse":
        member = (dx / (sw / 2.0)) ** 2 + (dy / (sh / 2.0)) ** 2 <= 1.0
    elif shape.kind == "diamond":
        member = np.abs(dx) / (sw / 2.0) + np.abs(dy) / (sh / 2.0) <= 1.0
    else:
        raise ValueError(f"unknown shape kind {shape.kind!r}")
    return member.astype(np.uint8)


def synth_scene(spec: SceneSpec) -> tuple[np.ndarray, MaskSet, list[GtInstance]]:
    """Render the scene and derive proposals and ground truth from it.

    Every categorized shape becomes both a proposal and a ground-truth
    instance; distractors become proposals only. Output bytes depend only
    on the spec (the seed drives the optional noise), and overlapping
    ground-truth shapes are rejected unless explicitly allowed.
    """
    h, w = spec.size
    image = np.empty((h, w, 3), dtype=np.float64)
    image[:] = spec.background
    masks: list[MaskProposal] = []
    gt: list[GtInstance] = []
    occupied = np.zeros((h, w), dtype=bool)
    mask_id = 0
    for shape in spec.shapes:
        grid = _rasterize(shape, spec.size)
        if not grid.any():
            raise ValueError(f"shape {mask_id} ({shape.kind}) rasterizes to nothing")
        member = grid.astype(bool)
        if not spec.allow_overlap and (occupied & member).any():
            raise ValueError(f"shape {mask_id} ({shape.kind}) overlaps an earlier shape")
        occupied |= member
        image[member] = shape.color
        masks.append(MaskProposal(mask_id=mask_id, grid=grid))
        if shape.category is not None:
            gt.append(GtInstance(image_id=spec.image_id, category=shape.category, grid=grid))
        mask_id += 1
    for shape in spec.distractors:
        grid = _rasterize(shape, spec.size)
        if not grid.any():
            raise ValueError(f"distractor {mask_id} ({shape.kind}) rasterizes to nothing")
        masks.append(MaskProposal(mask_id=mask_id, grid=grid))
        mask_id += 1
    if spec.noise > 0:
        rng = np.random.Generator(np.random.PCG64(spec.seed))
        image = image + rng.normal(0.0, spec.noise, image.shape)
    image = np.clip(np.round(image), 0, 255).astype(np.uint8)
    mask_set = MaskSet(image_id=spec.image_id, image_size=spec.size, masks=masks)
    return image, mask_set, gt


def _shape_from_dict(raw: dict) -> ShapeSpec:
    return ShapeSpec(
        kind=str(raw["kind"]),
        center=tuple(float(v) for v in raw["center"]),
        size=tuple(float(v) for v in raw["size"]),
        color=tuple(int(v) for v in raw.get("color", (255, 255, 255))),
        category=raw.get("category"),
        angle=float(raw.get("angle", 0.0)),
    )


def scene_from_dict(raw: dict) -> SceneSpec:
    try:
        size = (int(raw["size"][0]), int(raw["size"][1]))
        shapes = [_shape_from_dict(s) for s in raw.get("shapes", [])]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed scene spec: {exc}") from exc
    return SceneSpec(
        size=size,
        background=tuple(int(v) for v in raw.get("background", (96, 96, 96))),
        shapes=shapes,
        distractors=[_shape_from_dict(s) for s in raw.get("distractors", [])],
        allow_overlap=bool(raw.get("allow_overlap", False)),
        noise=float(raw.get("noise", 0.0)),
        seed=int(raw.get("seed", 0)),
        image_id=str(raw.get("image_id", "scene")),
    )


def load_scene(path: str | Path) -> SceneSpec:
    return scene_from_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# ground truth and expression files

def load_gt(path: str | Path) -> list[GtInstance]:
    """Read ground-truth annotations ({"images": [...]} with RLE instances)."""
    raw = json.loads(Path(path).read_text())
    out = []
    for img in raw.get("images", []):
        image_id = str(img["image_id"])
        h, w = int(img["height"]), int(img["width"])
        for inst in img.get("instances", []):
            grid = rle.decode(inst["rle"], h, w)
            out.append(GtInstance(image_id=image_id, category=str(inst["category"]),
                                  grid=grid))
    return out


def save_gt(instances: list[GtInstance], path: str | Path) -> None:
    by_image: dict[str, list[GtInstance]] = {}
    for inst in instances:
        by_image.setdefault(inst.image_id, []).append(inst)
    images = []
    for image_id in sorted(by_image):
        insts = by_image[image_id]
        h, w = insts[0].grid.shape
        images.append({
            "image_id": image_id, "height": h, "width": w,
            "instances": [
                {"category": inst.category, "rle": rle.encode(inst.grid)}
                for inst in insts
            ],
        })
    Path(path).write_text(json.dumps({"images": images}, sort_keys=True) + "\n")


def load_expressions(path: str | Path) -> list[dict]:
    """Read the referring-expression records ({"expressions": [...]})."""
    raw = json.loads(Path(path).read_text())
    records = raw.get("expressions")
    if records is None:
        raise ValueError(f"{path}: expected a top-level 'expressions' list")
    for i, rec in enumerate(records):
        if "image_id" not in rec or "text" not in rec:
            raise ValueError(f"{path}: expressions[{i}] needs image_id and text")
    return records
