"""Mean-IoU evaluation with per-category aggregation and seen/unseen splits.

Two protocols:

* proposal quality: each ground-truth instance takes the best IoU over the
  image's class-agnostic proposals (its ceiling under any labeling).
* image-level: per image and category, the union of predicted masks
  against the union of ground-truth masks.

Category means are unweighted; the overall number is the mean over
categories with at least one sample. Predicting into an image with no
ground truth for that category counts as a zero; predicting nothing where
there is nothing is skipped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .masks import MaskProposal, MaskSet, mask_iou, merge_masks


@dataclass
class GtInstance:
    image_id: str
    category: str
    grid: np.ndarray

    def __post_init__(self):
        self.grid = np.asarray(self.grid)
        if self.grid.ndim != 2:
            raise ValueError(
                f"ground truth for {self.image_id}/{self.category} must be 2-d"
            )


@dataclass
class SplitAggregates:
    seen: float | None
    unseen: float | None
    all: float


@dataclass
class EvalReport:
    per_category_iou: dict[str, float]
    counts: dict[str, int]
    overall_miou: float
    protocol: str
    splits: SplitAggregates | None = None

    def to_dict(self) -> dict:
        out = {
            "protocol": self.protocol,
            "overall_miou": self.overall_miou,
            "per_category": {
                c: {"miou": self.per_category_iou[c], "count": self.counts[c]}
                for c in sorted(self.per_category_iou)
            },
        }
        if self.splits is not None:
            out["splits"] = {
                "seen": self.splits.seen,
                "unseen": self.splits.unseen,
                "all": self.splits.all,
            }
        return out


def _finish(samples: dict[str, list[float]], protocol: str) -> EvalReport:
    per_cat = {c: float(np.mean(v)) for c, v in samples.items() if v}
    counts = {c: len(v) for c, v in samples.items() if v}
    overall = float(np.mean(list(per_cat.values()))) if per_cat else 0.0
    return EvalReport(per_category_iou=per_cat, counts=counts,
                      overall_miou=overall, protocol=protocol)


def proposal_miou(gt: list[GtInstance], proposals: dict[str, MaskSet]) -> EvalReport:
    """Best-proposal IoU per ground-truth instance, averaged per category.

    Every ground-truth image must have a proposal set (an empty one is
    fine and scores zero for its instances).
    """
    samples: dict[str, list[float]] = {}
    for inst in gt:
        if inst.image_id not in proposals:
            raise KeyError(f"no proposal set for image {inst.image_id!r}")
        mask_set = proposals[inst.image_id]
        if len(mask_set) and inst.grid.shape != mask_set.image_size:
            raise ValueError(
                f"image {inst.image_id}: ground truth shape {inst.grid.shape} "
                f"does not match proposals {mask_set.image_size}"
            )
        best = max((mask_iou(inst.grid, m) for m in mask_set), default=0.0)
        samples.setdefault(inst.category, []).append(best)
    return _finish(samples, "proposal")


def image_level_miou(
    predictions: dict[tuple[str, str], list[np.ndarray | MaskProposal]],
    gt: list[GtInstance],
) -> EvalReport:
    """Merged-prediction vs merged-ground-truth IoU per (image, category).

    predictions is keyed by (image_id, category). Images where a category
    has ground truth always contribute a sample; images where it has only
    predictions contribute 0; images with neither are skipped.
    """
    gt_by_key: dict[tuple[str, str], list[np.ndarray]] = {}
    for inst in gt:
        gt_by_key.setdefault((inst.image_id, inst.category), []).append(inst.grid)

    samples: dict[str, list[float]] = {}
    for key in sorted(set(gt_by_key) | set(predictions), key=lambda k: (str(k[0]), str(k[1]))):
        _, category = key
        gt_grids = gt_by_key.get(key, [])
        pred = predictions.get(key, [])
        gt_merged = merge_masks(gt_grids) if gt_grids else None
        pred_merged = merge_masks(pred) if pred else None
        gt_any = gt_merged is not None and bool(gt_merged.any())
        pred_any = pred_merged is not None and bool(pred_merged.any())
        if not gt_any and not pred_any:
            continue
        if not gt_any or not pred_any:
            samples.setdefault(category, []).append(0.0)
            continue
        samples.setdefault(category, []).append(mask_iou(gt_merged, pred_merged))
    return _finish(samples, "image_level")


def split_report(report: EvalReport, unseen: list[str]) -> EvalReport:
    """Attach seen/unseen aggregates, partitioning the report's categories.

    Categories absent from the report (zero samples) may not be listed as
    unseen; that is a config error, not a zero.
    """
    present = set(report.per_category_iou)
    unknown = sorted(set(unseen) - present)
    if unknown:
        raise ValueError(f"unseen category {unknown[0]!r} has no evaluated samples")
    unseen_set = set(unseen)
    seen_vals = [v for c, v in report.per_category_iou.items() if c not in unseen_set]
    unseen_vals = [v for c, v in report.per_category_iou.items() if c in unseen_set]
    report.splits = SplitAggregates(
        seen=float(np.mean(seen_vals)) if seen_vals else None,
        unseen=float(np.mean(unseen_vals)) if unseen_vals else None,
        all=report.overall_miou,
    )
    return report


def format_report(report: EvalReport) -> str:
    """Fixed-width text table, categories alphabetical."""
    lines = [f"protocol: {report.protocol}"]
    width = max([len(c) for c in report.per_category_iou] + [8])
    lines.append(f"{'category':<{width}}  {'n':>5}  {'mIoU':>7}")
    for c in sorted(report.per_category_iou):
        lines.append(f"{c:<{width}}  {report.counts[c]:>5}  {report.per_category_iou[c]:>7.4f}")
    lines.append(f"{'overall':<{width}}  {sum(report.counts.values()):>5}  {report.overall_miou:>7.4f}")
    if report.splits is not None:
        seen = "n/a" if report.splits.seen is None else f"{report.splits.seen:.4f}"
        unseen = "n/a" if report.splits.unseen is None else f"{report.splits.unseen:.4f}"
        lines.append(f"seen {seen}  unseen {unseen}  all {report.splits.all:.4f}")
    return "\n".join(lines)
