"""Pick the referred proposal from the fused scene saliency.

Activation is cheap: a proposal is in the running iff it covers at least
one saliency peak. Activated proposals are ranked by mean saliency over
their own pixels (computed as 1 + mean so an all-zero map still ranks by
existence), and the winner must name the expression's class; a fallback
ladder handles the disagreeing and degenerate cases explicitly so every
outcome is auditable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .alignment import SegmentationResult
from .masks import MaskProposal, MaskSet
from .saliency import PeakSet, SaliencyMap

# Fallback ladder steps: prefer a label-consistent activated mask, then the
# global candidate regardless of label.
DEFAULT_POLICY = ("label", "global")

# How a selection was reached, recorded on the result for auditing.
PATH_CONSISTENT = "consistent"
PATH_LABEL_FALLBACK = "label_fallback"
PATH_GLOBAL_FALLBACK = "global_fallback"
PATH_NO_ACTIVATION = "no_activation"
PATH_EMPTY = "empty"


@dataclass
class ScoredMask:
    """A proposal's saliency evidence: raw_score sums membership plus
    saliency, normalized_score divides by area."""

    mask_id: int
    raw_score: float
    normalized_score: float
    area: int


@dataclass
class SelectionResult:
    """Outcome for one expression: the chosen mask (or none), its label,
    its score, and which ladder path produced it."""

    mask_id: int | None
    class_id: str | None
    score: float | None
    path: str


def activated_masks(mask_set: MaskSet, peaks: PeakSet) -> list[MaskProposal]:
    """Proposals covering at least one peak coordinate, in set order."""
    if not peaks.coords:
        return []
    h, w = mask_set.image_size
    for x, y in peaks.coords:
        if not (0 <= x < w and 0 <= y < h):
            raise ValueError(f"peak ({x}, {y}) is outside the {h}x{w} image")
    return [m for m in mask_set if any(m.grid[y, x] for x, y in peaks.coords)]


def score_masks(masks: list[MaskProposal], saliency: SaliencyMap) -> list[ScoredMask]:
    """Score each mask by area + saliency mass, and per-pixel by area.

    The normalized score equals 1 + (mean saliency over member pixels), so
    ranking is by how salient the mask is on average, not by its size.
    """
    grid = saliency.grid
    out = []
    for m in masks:
        if m.shape != grid.shape:
            raise ValueError(
                f"mask {m.mask_id} shape {m.shape} does not match saliency {grid.shape}"
            )
        member = m.grid.astype(bool)
        raw = float(m.area + grid[member].sum())
        out.append(ScoredMask(
            mask_id=m.mask_id,
            raw_score=raw,
            normalized_score=raw / m.area,
            area=m.area,
        ))
    return out


def select_global(scored: list[ScoredMask]) -> int | None:
    """Best normalized score wins; lowest mask id on exact ties; None when
    nothing was activated."""
    if not scored:
        return None
    best = max(scored, key=lambda s: (s.normalized_score, -s.mask_id))
    return best.mask_id


def _mean_saliency_fallback(mask_set: MaskSet, saliency: SaliencyMap) -> int | None:
    best_id, best_val = None, -np.inf
    for m in mask_set:
        val = float(saliency.grid[m.grid.astype(bool)].mean())
        if val > best_val or (val == best_val and best_id is not None and m.mask_id < best_id):
            best_id, best_val = m.mask_id, val
    return best_id


def intersect_candidates(global_id: int | None, ovss: SegmentationResult,
                         target_classes: set[str],
                         scored: list[ScoredMask],
                         policy=DEFAULT_POLICY,
                         saliency: SaliencyMap | None = None,
                         known_classes: set[str] | None = None) -> SelectionResult:
    """Reconcile the saliency choice with the per-mask labels.

    The global candidate is kept when its label names a target class.
    Otherwise the ladder runs in `policy` order: "label" promotes the
    best-scored activated mask with a target label, "global" accepts the
    candidate regardless of label; an exhausted ladder yields an empty
    result. With no activation at all, the mask with the highest mean
    saliency substitutes (requires `saliency`).

    When `known_classes` is given (normally the bank's class ids), a target
    outside it is an error rather than a silent never-matches filter.
    """
    if not target_classes:
        raise ValueError("target class set is empty")
    if known_classes is not None:
        unknown = sorted(set(target_classes) - set(known_classes))
        if unknown:
            raise ValueError(f"unknown target class {unknown[0]!r}")
    by_id = {s.mask_id: s for s in scored}

    if global_id is None:
        if not scored:
            if saliency is not None and len(ovss.mask_set):
                fallback_id = _mean_saliency_fallback(ovss.mask_set, saliency)
                return SelectionResult(
                    mask_id=fallback_id,
                    class_id=ovss.label_of(fallback_id),
                    score=None,
                    path=PATH_NO_ACTIVATION,
                )
            return SelectionResult(mask_id=None, class_id=None, score=None, path=PATH_EMPTY)
        raise ValueError("no global candidate despite non-empty activation")

    label = ovss.label_of(global_id)
    if label in target_classes:
        return SelectionResult(
            mask_id=global_id, class_id=label,
            score=by_id[global_id].normalized_score, path=PATH_CONSISTENT,
        )

    for step in policy:
        if step == "label":
            consistent = [s for s in scored if ovss.label_of(s.mask_id) in target_classes]
            if consistent:
                best = max(consistent, key=lambda s: (s.normalized_score, -s.mask_id))
                return SelectionResult(
                    mask_id=best.mask_id,
                    class_id=ovss.label_of(best.mask_id),
                    score=best.normalized_score, path=PATH_LABEL_FALLBACK,
                )
        elif step == "global":
            return SelectionResult(
                mask_id=global_id, class_id=label,
                score=by_id[global_id].normalized_score, path=PATH_GLOBAL_FALLBACK,
            )
        else:
            raise ValueError(f"unknown fallback step {step!r}")
    return SelectionResult(mask_id=None, class_id=None, score=None, path=PATH_EMPTY)


def select_referred(ovss: SegmentationResult, saliency: SaliencyMap,
                    peaks: PeakSet, target_classes: set[str],
                    policy=DEFAULT_POLICY,
                    known_classes: set[str] | None = None
                    ) -> tuple[SelectionResult, list[ScoredMask]]:
    """Activation, scoring, global choice, and label reconciliation in one
    call. Returns the outcome plus the scored activation set for auditing."""
    active = activated_masks(ovss.mask_set, peaks)
    scored = score_masks(active, saliency)
    global_id = select_global(scored)
    result = intersect_candidates(global_id, ovss, target_classes, scored,
                                  policy=policy, saliency=saliency,
                                  known_classes=known_classes)
    return result, scored
