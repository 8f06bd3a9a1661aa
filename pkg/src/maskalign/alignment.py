"""Label mask proposals by aligning their patches with the class text bank.

Each proposal is cropped, embedded, and scored against every rendered
prompt; a class's score is the best over its prompt entries (name,
synonyms, description), so any one matching surface form is enough.
Probabilities are a temperature-scaled softmax over those per-class bests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cropping import CropConfig, crop_patch
from .encoders import EmbeddingEncoder, embed_images, l2_normalize_rows, softmax
from .masks import MaskProposal, MaskSet
from .prompts import BACKGROUND, ClassTextBank, PromptEntry, render_prompts

DEFAULT_TAU = 0.01


@dataclass
class LabeledMask:
    """Classification outcome for one proposal."""

    mask_id: int
    class_id: str
    probability: float
    scores: dict[str, float] = field(default_factory=dict)


@dataclass
class SegmentationResult:
    """Per-image labeling outcome: every proposal with its label, plus the
    mask set it refers to."""

    image_id: str
    image_size: tuple[int, int]
    labels: list[LabeledMask]
    mask_set: MaskSet

    def __post_init__(self):
        ids = [lm.mask_id for lm in self.labels]
        if sorted(ids) != sorted(self.mask_set.ids()):
            raise ValueError(
                f"labels cover mask ids {sorted(ids)}, mask set has {sorted(self.mask_set.ids())}"
            )
        self._by_id = {lm.mask_id: lm for lm in self.labels}

    def label_of(self, mask_id: int) -> str:
        return self._by_id[mask_id].class_id

    def foreground(self) -> list[LabeledMask]:
        """Labeled masks minus the background sink."""
        return [lm for lm in self.labels if lm.class_id != BACKGROUND]

    def masks_by_class(self) -> dict[str, list[MaskProposal]]:
        out: dict[str, list[MaskProposal]] = {}
        for lm in self.foreground():
            out.setdefault(lm.class_id, []).append(self.mask_set.get(lm.mask_id))
        return out

    def label_map(self) -> tuple[np.ndarray, list[str]]:
        """Flatten to one label index per pixel.

        Contested pixels go to the mask with the higher probability (lower
        mask id on exact ties); uncovered pixels are -1. Returns the index
        grid and the class list the indices point into.
        """
        classes = sorted({lm.class_id for lm in self.foreground()})
        index_of = {c: i for i, c in enumerate(classes)}
        grid = np.full(self.image_size, -1, dtype=np.int32)
        order = sorted(self.foreground(), key=lambda lm: (lm.probability, -lm.mask_id))
        for lm in order:
            member = self.mask_set.get(lm.mask_id).grid.astype(bool)
            grid[member] = index_of[lm.class_id]
        return grid, classes


def extract_local_features(image: np.ndarray, mask_set: MaskSet,
                           crop_config: CropConfig,
                           encoder: EmbeddingEncoder) -> np.ndarray:
    """Crop and embed every proposal; row order follows the mask set."""
    patches = []
    for mask in mask_set:
        try:
            patches.append(crop_patch(image, mask, crop_config))
        except Exception as exc:
            raise ValueError(f"cropping mask {mask.mask_id} failed: {exc}") from exc
    if not patches:
        return np.zeros((0, getattr(encoder, "dim", 0)))
    try:
        return embed_images(patches, encoder)
    except ValueError as exc:
        raise ValueError(
            f"embedding patches for image {mask_set.image_id} failed: {exc}"
        ) from exc


def classify_masks(local_feats: np.ndarray, bank: ClassTextBank,
                   text_feats: np.ndarray, tau: float = DEFAULT_TAU,
                   mask_ids: list[int] | None = None,
                   entries: list[PromptEntry] | None = None) -> list[LabeledMask]:
    """Assign one bank class per feature row.

    text_feats rows must be aligned with `entries` (the bank's rendered
    prompts by default). Each class takes the maximum cosine similarity
    over its entries, and the softmax over classes uses temperature tau.
    """
    if tau <= 0:
        raise ValueError(f"temperature must be positive, got {tau}")
    entries = render_prompts(bank) if entries is None else entries
    if len(entries) != text_feats.shape[0]:
        raise ValueError(
            f"{len(entries)} prompt entries but {text_feats.shape[0]} text feature rows"
        )
    local_feats = np.atleast_2d(np.asarray(local_feats, dtype=np.float64))
    if local_feats.shape[0] == 0:
        return []
    if mask_ids is None:
        mask_ids = list(range(local_feats.shape[0]))
    if len(mask_ids) != local_feats.shape[0]:
        raise ValueError(f"{len(mask_ids)} mask ids for {local_feats.shape[0]} feature rows")

    norms = np.linalg.norm(local_feats, axis=1)
    bad = np.flatnonzero(norms < 1e-12)
    if bad.size:
        raise ValueError(f"mask {mask_ids[int(bad[0])]} has a zero-norm feature")
    img = local_feats / norms[:, None]
    txt = l2_normalize_rows(np.asarray(text_feats, dtype=np.float64), "text feature")
    sims = img @ txt.T  # (M, E)

    classes = sorted({c.class_id for c in bank.classes})
    if bank.backgrounds:
        classes.append(BACKGROUND)
    col_of = {c: i for i, c in enumerate(classes)}
    per_class = np.full((sims.shape[0], len(classes)), -np.inf)
    for e, entry in enumerate(entries):
        col = col_of.get(entry.class_id)
        if col is None:
            raise ValueError(f"prompt entry {e} names unknown class {entry.class_id!r}")
        np.maximum(per_class[:, col], sims[:, e], out=per_class[:, col])
    if np.isneginf(per_class).any():
        missing = classes[int(np.argwhere(np.isneginf(per_class).any(axis=0))[0][0])]
        raise ValueError(f"class {missing!r} has no prompt entries")

    probs = softmax(per_class / tau, axis=1)
    out = []
    for row, mask_id in enumerate(mask_ids):
        winner = int(probs[row].argmax())
        out.append(LabeledMask(
            mask_id=mask_id,
            class_id=classes[winner],
            probability=float(probs[row, winner]),
            scores={c: float(probs[row, col_of[c]]) for c in classes},
        ))
    return out


def assemble_ovss(mask_set: MaskSet, labels: list[LabeledMask]) -> SegmentationResult:
    """Bundle per-mask labels into the per-image result."""
    return SegmentationResult(
        image_id=mask_set.image_id,
        image_size=mask_set.image_size,
        labels=list(labels),
        mask_set=mask_set,
    )
