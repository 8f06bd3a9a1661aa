"""Evaluation protocols and split aggregation."""

from __future__ import annotations

import numpy as np
import pytest

from maskalign.evaluation import (
    EvalReport,
    GtInstance,
    format_report,
    image_level_miou,
    proposal_miou,
    split_report,
)
from maskalign.masks import MaskProposal, MaskSet


def rect(h, w, r0, c0, hh, ww):
    g = np.zeros((h, w), dtype=np.uint8)
    g[r0:r0 + hh, c0:c0 + ww] = 1
    return g


def test_self_evaluation_is_perfect():
    g = rect(8, 8, 1, 1, 4, 4)
    gt = [GtInstance("img", "ship", g)]
    report = image_level_miou({("img", "ship"): [g]}, gt)
    assert report.overall_miou == pytest.approx(1.0)
    assert report.per_category_iou == {"ship": pytest.approx(1.0)}
    assert report.counts == {"ship": 1}


def test_half_overlap_fixture():
    # 4x4 squares offset by 2: intersection 8, union 24
    a = rect(8, 8, 0, 0, 4, 4)
    b = rect(8, 8, 0, 2, 4, 4)
    report = image_level_miou({("img", "ship"): [b]}, [GtInstance("img", "ship", a)])
    assert report.overall_miou == pytest.approx(1 / 3)


def test_category_means_are_unweighted():
    # ship gets two samples (0.25, 0.75), tank one (0.5):
    # per-category means 0.5 and 0.5, overall 0.5 regardless of counts
    full = rect(8, 8, 0, 0, 4, 4)

    def with_iou(target_iou):
        # nested rectangle with the desired IoU against `full`
        for hh in range(1, 5):
            for ww in range(1, 5):
                cand = rect(8, 8, 0, 0, hh, ww)
                inter = np.logical_and(full, cand).sum()
                union = np.logical_or(full, cand).sum()
                if inter / union == pytest.approx(target_iou):
                    return cand
        raise AssertionError(f"no fixture for IoU {target_iou}")

    preds = {
        ("a", "ship"): [with_iou(0.25)],
        ("b", "ship"): [with_iou(0.75)],
        ("a", "tank"): [with_iou(0.5)],
    }
    gt = [
        GtInstance("a", "ship", full),
        GtInstance("b", "ship", full),
        GtInstance("a", "tank", full),
    ]
    report = image_level_miou(preds, gt)
    assert report.per_category_iou["ship"] == pytest.approx(0.5)
    assert report.per_category_iou["tank"] == pytest.approx(0.5)
    assert report.overall_miou == pytest.approx(0.5)
    assert report.counts == {"ship": 2, "tank": 1}


def test_prediction_without_gt_scores_zero():
    g = rect(8, 8, 0, 0, 3, 3)
    report = image_level_miou({("img", "ship"): [g]}, [])
    assert report.per_category_iou == {"ship": 0.0}


def test_gt_without_prediction_scores_zero():
    g = rect(8, 8, 0, 0, 3, 3)
    report = image_level_miou({}, [GtInstance("img", "ship", g)])
    assert report.per_category_iou == {"ship": 0.0}


def test_both_empty_skipped():
    report = image_level_miou({("img", "ship"): []}, [])
    assert report.per_category_iou == {}
    assert report.overall_miou == 0.0


def test_merged_unions_within_category():
    a = rect(8, 8, 0, 0, 2, 2)
    b = rect(8, 8, 4, 4, 2, 2)
    gt = [GtInstance("img", "ship", a), GtInstance("img", "ship", b)]
    report = image_level_miou({("img", "ship"): [a, b]}, gt)
    assert report.overall_miou == pytest.approx(1.0)


def test_split_fixture():
    report = EvalReport(
        per_category_iou={"a": 0.2, "b": 0.4, "c": 0.6},
        counts={"a": 1, "b": 1, "c": 1},
        overall_miou=0.4,
        protocol="image_level",
    )
    out = split_report(report, unseen=["c"])
    assert out.splits.seen == pytest.approx(0.3)
    assert out.splits.unseen == pytest.approx(0.6)
    assert out.splits.all == pytest.approx(0.4)


def test_split_unknown_unseen_raises():
    report = EvalReport(per_category_iou={"a": 0.5}, counts={"a": 1},
                        overall_miou=0.5, protocol="image_level")
    with pytest.raises(ValueError) as err:
        split_report(report, unseen=["ghost"])
    assert "ghost" in str(err.value)


def test_split_all_unseen_leaves_seen_none():
    report = EvalReport(per_category_iou={"a": 0.5}, counts={"a": 1},
                        overall_miou=0.5, protocol="image_level")
    out = split_report(report, unseen=["a"])
    assert out.splits.seen is None
    assert out.splits.unseen == pytest.approx(0.5)


def test_proposal_protocol_takes_best_iou():
    gt_grid = rect(16, 16, 4, 4, 8, 8)
    good = MaskProposal(1, rect(16, 16, 4, 4, 8, 8))
    bad = MaskProposal(2, rect(16, 16, 0, 0, 2, 2))
    proposals = {"img": MaskSet("img", (16, 16), [bad, good])}
    report = proposal_miou([GtInstance("img", "ship", gt_grid)], proposals)
    assert report.overall_miou == pytest.approx(1.0)


def test_proposal_protocol_fixture_two_categories():
    # ship instances best 0.8 and 0.6 -> 0.7; tank best 0.7 -> overall 0.7
    def prop_with_iou(gt_grid, iou):
        area = int(gt_grid.sum())
        keep = int(round(area * iou / 1.0))
        # shrink the rectangle row by row until IoU hits the target
        rows, cols = np.nonzero(gt_grid)
        g = np.zeros_like(gt_grid)
        count = 0
        for r, c in zip(rows, cols):
            if count / area >= iou:
                break
            g[r, c] = 1
            count += 1
        return MaskProposal(99, g)

    gt_a = rect(20, 20, 0, 0, 5, 4)   # area 20
    gt_b = rect(20, 20, 10, 10, 5, 4)
    # subset proposals give IoU = kept/area exactly
    p_a = MaskProposal(1, np.where(np.cumsum(gt_a.flatten()).reshape(gt_a.shape) <= 16, gt_a, 0))
    p_b = MaskProposal(2, np.where(np.cumsum(gt_b.flatten()).reshape(gt_b.shape) <= 12, gt_b, 0))
    proposals = {
        "a": MaskSet("a", (20, 20), [p_a]),
        "b": MaskSet("b", (20, 20), [p_b]),
    }
    gt = [GtInstance("a", "ship", gt_a), GtInstance("b", "ship", gt_b)]
    report = proposal_miou(gt, proposals)
    assert report.per_category_iou["ship"] == pytest.approx((0.8 + 0.6) / 2)


def test_proposal_protocol_missing_image_raises():
    gt = [GtInstance("ghost", "ship", rect(4, 4, 0, 0, 2, 2))]
    with pytest.raises(KeyError) as err:
        proposal_miou(gt, {})
    assert "ghost" in str(err.value)


def test_proposal_protocol_empty_set_scores_zero():
    gt = [GtInstance("img", "ship", rect(4, 4, 0, 0, 2, 2))]
    report = proposal_miou(gt, {"img": MaskSet("img", (4, 4), [])})
    assert report.per_category_iou["ship"] == 0.0


def test_report_serialization_and_format():
    report = EvalReport(
        per_category_iou={"ship": 0.5, "tank": 0.75},
        counts={"ship": 2, "tank": 1},
        overall_miou=0.625,
        protocol="image_level",
    )
    split_report(report, unseen=["tank"])
    d = report.to_dict()
    assert d["overall_miou"] == pytest.approx(0.625)
    assert d["per_category"]["ship"]["count"] == 2
    assert d["splits"]["unseen"] == pytest.approx(0.75)
    text = format_report(report)
    assert "ship" in text and "overall" in text and "unseen" in text
