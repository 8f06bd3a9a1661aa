"""Proposal containers, synthetic layouts, and scene generation."""

from __future__ import annotations

import json
import logging

import numpy as np
import pytest

from maskalign.evaluation import GtInstance
from maskalign.masks import MaskProposal, MaskSet
from maskalign.proposals import (
    SceneSpec,
    ShapeSpec,
    container_to_mask_set,
    load_container_file,
    load_expressions,
    load_gt,
    mask_set_to_container,
    save_gt,
    save_proposals,
    scene_from_dict,
    synth_scene,
    synthetic_masks,
)

from conftest import random_mask_grid, rng_for


def small_set():
    g1 = np.zeros((6, 8), dtype=np.uint8)
    g1[0:2, 0:2] = 1
    g2 = np.zeros((6, 8), dtype=np.uint8)
    g2[3:6, 4:8] = 1
    return MaskSet("scene_a", (6, 8), [MaskProposal(1, g1), MaskProposal(2, g2)])


def test_container_round_trip():
    ms = small_set()
    container = mask_set_to_container(ms)
    back = container_to_mask_set(container)
    assert back.image_id == ms.image_id
    assert back.image_size == ms.image_size
    assert back.ids() == ms.ids()
    for mid in ms.ids():
        assert np.array_equal(back.get(mid).grid, ms.get(mid).grid)


def test_container_file_bytes_stable(tmp_path):
    ms = small_set()
    p1 = tmp_path / "a.json"
    p2 = tmp_path / "b.json"
    save_proposals(ms, p1)
    save_proposals(load_container_file(p1), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_container_random_round_trip():
    rng = rng_for(51)
    for trial in range(30):
        h = int(rng.integers(2, 20))
        w = int(rng.integers(2, 20))
        masks = [MaskProposal(i, random_mask_grid(rng, h, w)) for i in range(3)]
        ms = MaskSet(f"t{trial}", (h, w), masks)
        back = container_to_mask_set(mask_set_to_container(ms))
        for mid in ms.ids():
            assert np.array_equal(back.get(mid).grid, ms.get(mid).grid)


def test_empty_mask_rejected_and_logged(caplog):
    container = {
        "image_id": "x", "height": 2, "width": 2,
        "masks": [
            {"id": 1, "rle": [0, 1, 3]},  # one pixel
            {"id": 2, "rle": [4]},        # empty
        ],
    }
    with caplog.at_level(logging.WARNING):
        ms = container_to_mask_set(container)
    assert ms.ids() == [1]
    assert any("empty mask" in rec.getMessage() for rec in caplog.records)


def test_duplicate_ids_raise():
    container = {
        "image_id": "x", "height": 2, "width": 2,
        "masks": [
            {"id": 1, "rle": [0, 1, 3]},
            {"id": 1, "rle": [1, 1, 2]},
        ],
    }
    with pytest.raises(ValueError):
        container_to_mask_set(container)


def test_bad_rle_names_source_and_mask():
    container = {
        "image_id": "x", "height": 2, "width": 2,
        "masks": [{"id": 7, "rle": [0, 99]}],
    }
    with pytest.raises(ValueError) as err:
        container_to_mask_set(container, source="input.json")
    msg = str(err.value)
    assert "input.json" in msg and "7" in msg


def test_malformed_container():
    with pytest.raises(ValueError):
        container_to_mask_set({"height": 2, "width": 2, "masks": []})


def test_grid_layout_tiles_disjoint():
    ms = synthetic_masks("img", (32, 32), layout="grid2x2")
    assert len(ms) == 4
    total = np.zeros((32, 32), dtype=int)
    for m in ms:
        assert m.area == 16 * 16
        total += m.grid
    assert np.all(total == 1)  # tiles partition the frame


def test_grid_layout_uneven_sizes():
    ms = synthetic_masks("img", (10, 9), layout="grid3x2")
    assert len(ms) == 6
    total = sum(m.area for m in ms)
    assert total == 90


def test_blob_layout_deterministic():
    a = synthetic_masks("img", (24, 24), seed=5, layout="blobs:4")
    b = synthetic_masks("img", (24, 24), seed=5, layout="blobs:4")
    assert len(a) == 4
    for mid in a.ids():
        assert np.array_equal(a.get(mid).grid, b.get(mid).grid)
    c = synthetic_masks("img", (24, 24), seed=6, layout="blobs:4")
    assert any(not np.array_equal(a.get(m).grid, c.get(m).grid) for m in a.ids())


def test_blob_layout_keyed_by_image_id():
    a = synthetic_masks("img_a", (24, 24), seed=5, layout="blobs:3")
    b = synthetic_masks("img_b", (24, 24), seed=5, layout="blobs:3")
    assert any(not np.array_equal(a.get(m).grid, b.get(m).grid) for m in a.ids())


def test_bad_layouts():
    with pytest.raises(ValueError):
        synthetic_masks("img", (8, 8), layout="gridAxB")
    with pytest.raises(ValueError):
        synthetic_masks("img", (8, 8), layout="spiral")
    with pytest.raises(ValueError):
        synthetic_masks("img", (2, 2), layout="grid4x4")


def scene_spec():
    return SceneSpec(
        size=(32, 32),
        shapes=[
            ShapeSpec(kind="rect", center=(8.0, 8.0), size=(8.0, 6.0),
                      color=(200, 40, 40), category="ship"),
            ShapeSpec(kind="ellipse", center=(22.0, 22.0), size=(10.0, 8.0),
                      color=(40, 200, 40), category="tank"),
        ],
        distractors=[
            ShapeSpec(kind="diamond", center=(8.0, 24.0), size=(6.0, 6.0),
                      color=(40, 40, 200)),
        ],
    )


def test_synth_scene_outputs():
    image, mask_set, gt = synth_scene(scene_spec())
    assert image.shape == (32, 32, 3)
    assert image.dtype == np.uint8
    assert len(mask_set) == 3  # two shapes + one distractor
    assert [g.category for g in gt] == ["ship", "tank"]
    # proposal 0 is exactly the ship ground truth
    assert np.array_equal(mask_set.get(0).grid, gt[0].grid)
    # the painted region matches the mask
    member = mask_set.get(0).grid.astype(bool)
    assert np.all(image[member] == (200, 40, 40))


def test_synth_scene_deterministic():
    spec = scene_spec()
    spec.noise = 2.0
    a, _, _ = synth_scene(spec)
    b, _, _ = synth_scene(scene_from_dict(json.loads(json.dumps({
        "size": [32, 32],
        "shapes": [
            {"kind": "rect", "center": [8.0, 8.0], "size": [8.0, 6.0],
             "color": [200, 40, 40], "category": "ship"},
            {"kind": "ellipse", "center": [22.0, 22.0], "size": [10.0, 8.0],
             "color": [40, 200, 40], "category": "tank"},
        ],
        "distractors": [
            {"kind": "diamond", "center": [8.0, 24.0], "size": [6.0, 6.0],
             "color": [40, 40, 200]},
        ],
        "noise": 2.0,
    }))))
    assert np.array_equal(a, b)


def test_synth_scene_overlap_rejected():
    spec = scene_spec()
    spec.shapes[1] = ShapeSpec(kind="rect", center=(9.0, 9.0), size=(8.0, 8.0),
                               color=(1, 2, 3), category="tank")
    with pytest.raises(ValueError) as err:
        synth_scene(spec)
    assert "overlap" in str(err.value)
    spec.allow_overlap = True
    image, mask_set, gt = synth_scene(spec)
    assert len(gt) == 2


def test_synth_scene_rotated_rect():
    spec = SceneSpec(size=(48, 48), shapes=[
        ShapeSpec(kind="rect", center=(24.0, 24.0), size=(20.0, 8.0),
                  color=(255, 0, 0), category="ship", angle=45.0),
    ])
    _, mask_set, _ = synth_scene(spec)
    grid = mask_set.get(0).grid
    # rotating must preserve the area approximately
    assert abs(int(grid.sum()) - 160) <= 24


def test_gt_round_trip(tmp_path):
    g1 = np.zeros((6, 6), dtype=np.uint8)
    g1[0:2, 0:2] = 1
    g2 = np.zeros((6, 6), dtype=np.uint8)
    g2[3:5, 3:5] = 1
    instances = [
        GtInstance("b_img", "ship", g1),
        GtInstance("a_img", "tank", g2),
    ]
    path = tmp_path / "gt.json"
    save_gt(instances, path)
    back = load_gt(path)
    # images are sorted on save
    assert [(i.image_id, i.category) for i in back] == [
        ("a_img", "tank"), ("b_img", "ship")]
    assert np.array_equal(back[0].grid, g2)
    assert np.array_equal(back[1].grid, g1)


def test_load_expressions_validation(tmp_path):
    path = tmp_path / "expr.json"
    path.write_text(json.dumps({"expressions": [
        {"image_id": "a", "text": "the red ship"},
    ]}))
    records = load_expressions(path)
    assert records[0]["text"] == "the red ship"

    path.write_text(json.dumps({"expressions": [{"image_id": "a"}]}))
    with pytest.raises(ValueError):
        load_expressions(path)

    path.write_text(json.dumps({"nope": []}))
    with pytest.raises(ValueError):
        load_expressions(path)
