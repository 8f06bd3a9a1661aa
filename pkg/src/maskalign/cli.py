"""Command-line entry points.

Subcommands wrap the programmatic API one-to-one, so anything the CLI does
can be scripted. Run commands exit 0 only when every item succeeded.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np
from PIL import Image

from . import __version__, rle
from .alignment import LabeledMask, SegmentationResult
from .errors import ConfigError
from .evaluation import format_report, image_level_miou, proposal_miou, split_report
from .masks import MaskProposal, MaskSet
from .overlay import save_overlay
from .pipeline import (ADAPTER_PATH_ENV, ABLATION_PRESETS, BANK_PRESETS,
                       PipelineConfig, config_from_dict, export_scene,
                       load_adapter_plugins, load_config, paint_image,
                       run_ablation, run_ovss, run_res)
from .prompts import bank_to_dict, load_bank, load_packaged_bank, render_prompts
from .proposals import load_container_file, load_gt, load_scene, save_proposals

logger = logging.getLogger("maskalign")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="pipeline config (JSON)")
    parser.add_argument("--workers", type=int, help="worker thread count")
    parser.add_argument("--out", type=Path, help="output directory")
    parser.add_argument("--seed", type=int, help="seed override")


def _resolve_config(args: argparse.Namespace) -> PipelineConfig:
    config = load_config(args.config) if args.config else PipelineConfig()
    overrides = {}
    if getattr(args, "workers", None) is not None:
        overrides["workers"] = args.workers
    if getattr(args, "out", None) is not None:
        overrides["out"] = str(args.out)
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if overrides:
        config = config_from_dict(overrides, base=config)
    return config


def _load_any_bank(spec: str):
    if spec in BANK_PRESETS:
        return load_packaged_bank(spec)
    return load_bank(spec)


def cmd_bank_build(args) -> int:
    bank = _load_any_bank(str(args.bank))
    out = args.out or Path(f"{Path(str(args.bank)).stem}.normalized.json")
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(bank_to_dict(bank), indent=2, sort_keys=True) + "\n")
    entries = render_prompts(bank)
    print(f"bank: {len(bank.classes)} classes, {len(bank.backgrounds)} backgrounds, "
          f"{len(entries)} prompts -> {out}")
    return 0


def cmd_bank_validate(args) -> int:
    bank = _load_any_bank(str(args.bank))
    print(f"ok: {len(bank.classes)} classes, {len(bank.backgrounds)} backgrounds, "
          f"{len(bank.unseen)} unseen")
    return 0


def cmd_proposals_import(args) -> int:
    src = Path(args.src)
    out = Path(args.dest)
    out.mkdir(parents=True, exist_ok=True)
    files = sorted(src.glob("*.json")) if src.is_dir() else [src]
    failures = 0
    for path in files:
        try:
            mask_set = load_container_file(path)
        except ValueError as exc:
            logger.error("%s", exc)
            failures += 1
            continue
        save_proposals(mask_set, out / f"{mask_set.image_id}.json")
        print(f"{path} -> {mask_set.image_id}: {len(mask_set)} masks")
    return 1 if failures else 0


def cmd_proposals_synth(args) -> int:
    scene = load_scene(args.scene)
    if args.seed is not None:
        scene.seed = args.seed
    info = export_scene(scene, args.dest)
    print(f"scene {info['image_id']}: {info['masks']} proposals, "
          f"{info['gt_instances']} gt instances -> {info['dataset']}")
    return 0


def _print_summary(summary: dict) -> None:
    for key in ("images", "expressions"):
        if key in summary:
            print(f"{key}: {summary[key]}")
    report = summary.get("report")
    if report:
        print(f"mIoU: {report['overall_miou']:.4f}")
        splits = report.get("splits")
        if splits:
            seen = "n/a" if splits["seen"] is None else f"{splits['seen']:.4f}"
            unseen = "n/a" if splits["unseen"] is None else f"{splits['unseen']:.4f}"
            print(f"seen: {seen}  unseen: {unseen}")
    for failure in summary["failures"]:
        print(f"FAILED {failure['item']}: {failure['error']}", file=sys.stderr)
    print(f"failures: {len(summary['failures'])} -> {summary['out']}")


def cmd_ovss_run(args) -> int:
    summary = run_ovss(_resolve_config(args))
    _print_summary(summary)
    return 1 if summary["failures"] else 0


def cmd_res_run(args) -> int:
    summary = run_res(_resolve_config(args))
    _print_summary(summary)
    return 1 if summary["failures"] else 0


def _load_run_records(results_dir: Path) -> list[dict]:
    records = []
    for path in sorted(results_dir.glob("*.json")):
        if path.name in ("report.json", "manifest.json"):
            continue
        records.append(json.loads(path.read_text()))
    return records


def _record_to_result(record: dict) -> SegmentationResult:
    h, w = int(record["height"]), int(record["width"])
    masks, labels = [], []
    for m in record["masks"]:
        grid = rle.decode(m["rle"], h, w)
        masks.append(MaskProposal(mask_id=int(m["mask_id"]), grid=grid))
        labels.append(LabeledMask(mask_id=int(m["mask_id"]), class_id=str(m["class"]),
                                  probability=float(m["probability"])))
    mask_set = MaskSet(image_id=str(record["image_id"]), image_size=(h, w), masks=masks)
    return SegmentationResult(image_id=mask_set.image_id, image_size=(h, w),
                              labels=labels, mask_set=mask_set)


def cmd_eval(args) -> int:
    records = _load_run_records(Path(args.results))
    if not records:
        logger.error("no result records under %s", args.results)
        return 2
    gt = load_gt(args.gt)
    results = [_record_to_result(r) for r in records]
    unseen = list(args.unseen or [])

    if args.protocol in ("proposal", "both"):
        proposals = {r.image_id: r.mask_set for r in results}
        report = proposal_miou(gt, proposals)
        if unseen:
            report = split_report(report, unseen)
        print(format_report(report))
    if args.protocol in ("image", "both"):
        predictions = {}
        for r in results:
            for class_id, ms in r.masks_by_class().items():
                predictions[(r.image_id, class_id)] = [m.grid for m in ms]
        report = image_level_miou(predictions, gt)
        if unseen:
            report = split_report(report, unseen)
        print(format_report(report))
    return 0


def cmd_overlay(args) -> int:
    records = _load_run_records(Path(args.results))
    if not records:
        logger.error("no result records under %s", args.results)
        return 2
    out = Path(args.dest)
    out.mkdir(parents=True, exist_ok=True)
    for record in records:
        result = _record_to_result(record)
        image = None
        if args.dataset:
            for suffix in (".png", ".jpg", ".jpeg"):
                path = Path(args.dataset) / "images" / f"{result.image_id}{suffix}"
                if path.exists():
                    image = np.asarray(Image.open(path).convert("RGB"))
                    break
        if image is None:
            image = paint_image(result.mask_set)
        target = out / f"{result.image_id}.png"
        save_overlay(target, image, result.mask_set, result)
        print(f"{result.image_id} -> {target}")
    return 0


def cmd_ablate(args) -> int:
    summary = run_ablation(args.preset, _resolve_config(args))
    width = max(len(name) for name in summary["runs"])
    for name, run in summary["runs"].items():
        miou = "n/a" if run["miou"] is None else f"{run['miou']:.4f}"
        print(f"{name:<{width}}  mIoU {miou}  failures {run['failures']}")
    failures = sum(run["failures"] for run in summary["runs"].values())
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maskalign",
        description="Training-free open-vocabulary and referring segmentation "
                    "over mask proposals.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    bank = sub.add_parser("bank", help="class text bank tools")
    bank_sub = bank.add_subparsers(dest="subcommand", required=True)
    b_build = bank_sub.add_parser("build", help="normalize and write a bank")
    b_build.add_argument("bank", help="bank config path or preset name")
    b_build.add_argument("--out", type=Path, help="output path")
    b_build.set_defaults(func=cmd_bank_build)
    b_val = bank_sub.add_parser("validate", help="check a bank config")
    b_val.add_argument("bank", help="bank config path or preset name")
    b_val.set_defaults(func=cmd_bank_validate)

    props = sub.add_parser("proposals", help="proposal containers")
    props_sub = props.add_subparsers(dest="subcommand", required=True)
    p_imp = props_sub.add_parser("import", help="validate and normalize containers")
    p_imp.add_argument("src", help="container file or directory")
    p_imp.add_argument("dest", help="output directory")
    p_imp.set_defaults(func=cmd_proposals_import)
    p_syn = props_sub.add_parser("synth", help="materialize a synthetic scene")
    p_syn.add_argument("scene", help="scene spec (JSON)")
    p_syn.add_argument("dest", help="dataset directory to create")
    p_syn.add_argument("--seed", type=int, help="override the scene seed")
    p_syn.set_defaults(func=cmd_proposals_synth)

    ovss = sub.add_parser("ovss", help="open-vocabulary labeling")
    ovss_sub = ovss.add_subparsers(dest="subcommand", required=True)
    o_run = ovss_sub.add_parser("run", help="label every image in the config")
    _add_common(o_run)
    o_run.set_defaults(func=cmd_ovss_run)

    res = sub.add_parser("res", help="referring-expression selection")
    res_sub = res.add_subparsers(dest="subcommand", required=True)
    r_run = res_sub.add_parser("run", help="select masks for every expression")
    _add_common(r_run)
    r_run.set_defaults(func=cmd_res_run)

    ev = sub.add_parser("eval", help="re-evaluate exported records")
    ev.add_argument("--results", required=True, help="run output directory")
    ev.add_argument("--gt", required=True, help="ground-truth annotations (JSON)")
    ev.add_argument("--unseen", nargs="*", help="categories for the unseen split")
    ev.add_argument("--protocol", choices=("proposal", "image", "both"), default="both")
    ev.set_defaults(func=cmd_eval)

    ov = sub.add_parser("overlay", help="render overlay panels for a run")
    ov.add_argument("--results", required=True, help="run output directory")
    ov.add_argument("--dataset", help="dataset directory with images/")
    ov.add_argument("--dest", required=True, help="directory for the rendered panels")
    ov.set_defaults(func=cmd_overlay)

    ab = sub.add_parser("ablate", help="run a preset ablation grid")
    ab.add_argument("preset", choices=ABLATION_PRESETS)
    _add_common(ab)
    ab.set_defaults(func=cmd_ablate)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    plugin_dir = os.environ.get(ADAPTER_PATH_ENV)
    try:
        if plugin_dir:
            loaded = load_adapter_plugins(plugin_dir)
            if loaded:
                logger.info("loaded adapter plugins: %s", ", ".join(loaded))
        args = build_parser().parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        logger.error("%s", exc)
        return 2
    except (ValueError, OSError, KeyError) as exc:
        logger.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
