"""Walkthrough: pick the one mask a referring expression talks about.

Shows the saliency machinery on a toy grid first, then runs the full
pipeline on a synthetic scene with injected encoder tensors so the
decisions are easy to follow.

Run with:  python3 demos/demo_res.py
The CLI equivalent of step 3 is:
  maskalign res run --config config.json
"""

import json
import pathlib

import numpy as np
from PIL import Image

from maskalign.encoders import write_tensor_file
from maskalign.pipeline import config_from_dict, export_scene, run_res
from maskalign.proposals import SceneSpec, ShapeSpec
from maskalign.saliency import (
    SaliencyMap,
    activation_difference,
    enhance_global,
    find_local_maxima,
    fuse,
)

out_dir = pathlib.Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

# ---------------------------------------------------------------
# 1. the fusion chain on a toy grid
# ---------------------------------------------------------------
# two attention maps: the class word looks at the left blob, the
# modifier sharpens onto the lower-right corner of it
yy, xx = np.mgrid[0:12, 0:12]
cls_attn = np.exp(-((xx - 3) ** 2 + (yy - 5) ** 2) / 6.0)
mod_attn = np.exp(-((xx - 4) ** 2 + (yy - 7) ** 2) / 3.0)

a_dif = activation_difference(mod_attn, cls_attn)
print("difference map is unit-norm:", round(float(np.linalg.norm(a_dif.grid)), 6))

l_mod = SaliencyMap(mod_attn, "l_mod")
l_global = enhance_global(a_dif, np.ones_like(mod_attn), l_mod)
l_cs = fuse(l_global, SaliencyMap(cls_attn, "l_ref"))
print("fused map spans [%.2f, %.2f]" % (l_cs.grid.min(), l_cs.grid.max()))

peaks = find_local_maxima(l_cs, threshold=0.5)
print("fused peaks (x, y):", peaks.coords)

# ---------------------------------------------------------------
# 2. a scene plus injected tensors that make the story unambiguous
# ---------------------------------------------------------------
dataset = out_dir / "res_data"
spec = SceneSpec(
    size=(32, 32),
    image_id="quay",
    shapes=[
        ShapeSpec(kind="rect", center=(8.0, 8.0), size=(8.0, 6.0),
                  color=(200, 40, 40), category="ship"),
        ShapeSpec(kind="ellipse", center=(22.0, 22.0), size=(10.0, 8.0),
                  color=(40, 200, 40), category="storage tank"),
    ],
    distractors=[
        ShapeSpec(kind="diamond", center=(8.0, 24.0), size=(6.0, 6.0),
                  color=(40, 40, 200)),
    ],
)
export_scene(spec, dataset)

def axis(i):
    v = np.zeros(8, dtype=np.float32)
    v[i] = 1.0
    return v

g_yy, g_xx = np.mgrid[0:32, 0:32]

def bump(cx, cy, sigma):
    return np.exp(-((g_xx - cx) ** 2 + (g_yy - cy) ** 2) / (2 * sigma ** 2))

features = dataset / "features"
features.mkdir(exist_ok=True)
write_tensor_file(
    features / "quay.npz",
    # proposals 0..2 (ship, tank, distractor) on separate class axes
    patch_features=np.stack([axis(0), axis(1), axis(2)]),
    # prompt order: ship, storage tank, background water
    text_features=np.stack([axis(0), axis(1), axis(2)]),
    # every expression word needs a map: ship words point at the ship,
    # tank words at the tank
    attn={"ship": bump(8, 8, 3.0), "red": bump(8, 8, 5.0),
          "storage": bump(22, 22, 3.0), "tank": bump(22, 22, 3.0),
          "round": bump(22, 22, 5.0)},
    grad={word: np.ones((32, 32))
          for word in ("ship", "red", "storage", "tank", "round")},
    itm_score=1.0,
)
bank_file = out_dir / "res_bank.json"
bank_file.write_text(json.dumps({
    "classes": [
        {"id": "ship", "name": "ship"},
        {"id": "storage tank", "name": "storage tank"},
    ],
    "backgrounds": ["water"],
    "unseen": [],
}))

gt = json.loads((dataset / "proposals" / "quay.json").read_text())
ship_rle = [m for m in gt["masks"] if m["id"] == 0][0]["rle"]
(dataset / "expressions.json").write_text(json.dumps({"expressions": [
    {"image_id": "quay", "text": "the red ship",
     "gt_rle": ship_rle, "category": "ship"},
    {"image_id": "quay", "text": "the round storage tank"},
]}))

# ---------------------------------------------------------------
# 3. run selection and read the decisions back
# ---------------------------------------------------------------
summary = run_res(config_from_dict({
    "bank": str(bank_file),
    "encoder": {"kind": "tensor-file"},
    "proposals": {"kind": "file", "path": str(dataset / "proposals")},
    "dataset": str(dataset),
    "out": str(out_dir / "res_run"),
}))
results = json.loads(
    (pathlib.Path(summary["out"]) / "results.json").read_text())["results"]
for res in results:
    print(f"\n{res['text']!r}")
    print("  class tokens:", res["class_tokens"],
          "| modifiers:", res["modifier_tokens"])
    print("  chose mask", res["mask_id"], "labeled", res["label"],
          "via the", res["path"], "path")
if summary["report"] is not None:
    print("\nIoU against ground truth:", summary["report"]["overall_miou"])

# render the chosen mask over the image for the first expression
image = np.asarray(Image.open(dataset / "images" / "quay.png")).copy()
from maskalign import rle as rle_codec

chosen = rle_codec.decode(results[0]["rle"], results[0]["height"],
                          results[0]["width"]).astype(bool)
image[chosen] = (0.5 * image[chosen] + 0.5 * np.array([255, 255, 0])).astype(np.uint8)
panel = out_dir / "res_chosen_mask.png"
Image.fromarray(image).save(panel)
print("overlay written to", panel)
