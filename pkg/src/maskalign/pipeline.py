"""End-to-end runs: config resolution, batch labeling, referring selection.

A run is driven by one JSON config (plus CLI overrides), processes images
through a worker pool, writes one record file per unit of work plus an
evaluation report when ground truth is available, and leaves behind a
manifest from which the identical run can be replayed byte for byte:
records carry no timestamps and all randomness is seeded.
"""

from __future__ import annotations

import importlib.util
import json
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
from PIL import Image

from . import __version__
from . import rle
from .alignment import (DEFAULT_TAU, SegmentationResult, assemble_ovss,
                        classify_masks, extract_local_features)
from .cropping import CROP_VARIANTS, CropConfig
from .encoders import (MockEmbeddingEncoder, MockSaliencyEncoder,
                       TensorFileAdapter, embed_texts, token_saliency)
from .errors import ConfigError
from .evaluation import EvalReport, GtInstance, image_level_miou, split_report
from .masks import MaskSet
from .overlay import stable_color
from .prompts import (BACKGROUND, ClassTextBank, TEMPLATE_PRESETS, load_bank,
                      load_packaged_bank, render_prompts)
from .proposals import (ProposalSource, load_expressions, load_gt,
                        load_proposals, register_adapter, save_proposals)
from .saliency import SaliencyMap, find_local_maxima, fuse_expression_maps, group_gradcam, minmax_normalize
from .selection import DEFAULT_POLICY, select_referred
from .text import RuleBasedTagger, decouple_expression, derive_target_classes

logger = logging.getLogger(__name__)

ADAPTER_PATH_ENV = "MASKALIGN_ADAPTERS"

BANK_PRESETS = ("isaid", "rrsisd")

SALIENCY_MODES = ("cross", "single")

ENCODER_ADAPTERS: dict[str, object] = {}


def register_encoder_adapter(name: str, factory) -> None:
    """factory(params: dict) -> callable(image_id) -> encoder object"""
    ENCODER_ADAPTERS[name] = factory


def load_adapter_plugins(directory: str | Path) -> list[str]:
    """Import every .py file in `directory`; each must expose
    register(registry) and may register proposal and encoder adapters."""
    registry = {"proposal": register_adapter, "encoder": register_encoder_adapter}
    directory = Path(directory)
    loaded = []
    for path in sorted(directory.glob("*.py")):
        spec = importlib.util.spec_from_file_location(f"maskalign_plugin_{path.stem}", path)
        module = importlib.util.module_from_spec(spec)
        spec.loader.exec_module(module)
        hook = getattr(module, "register", None)
        if hook is None:
            raise ConfigError(f"plugin {path} defines no register() hook")
        hook(registry)
        loaded.append(path.stem)
    return loaded


@dataclass
class SaliencyConfig:
    theta: float = 0.5
    smooth_radius: int = 1
    normalize: bool = True
    mode: str = "cross"
    selection: bool = True

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise ConfigError(f"saliency.theta must lie in [0, 1], got {self.theta}")
        if self.smooth_radius < 0:
            raise ConfigError(f"saliency.smooth_radius must be >= 0, got {self.smooth_radius}")
        if self.mode not in SALIENCY_MODES:
            raise ConfigError(f"saliency.mode must be one of {SALIENCY_MODES}, got {self.mode!r}")


@dataclass
class EncoderConfig:
    kind: str = "mock"
    dim: int = 32
    tables: str | None = None
    features_dir: str | None = None
    params: dict = field(default_factory=dict)


@dataclass
class PipelineConfig:
    bank: str = "isaid"
    crop: CropConfig = field(default_factory=CropConfig)
    tau: float = DEFAULT_TAU
    saliency: SaliencyConfig = field(default_factory=SaliencyConfig)
    fallback_policy: tuple = DEFAULT_POLICY
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    proposals: ProposalSource = field(default_factory=lambda: ProposalSource(kind="synthetic"))
    dataset: str | None = None
    images: list[str] | None = None
    image_size: tuple[int, int] | None = None
    expressions: str | None = None
    gt: str | None = None
    out: str = "out"
    workers: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.tau <= 0:
            raise ConfigError(f"tau must be positive, got {self.tau}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        for step in self.fallback_policy:
            if step not in ("label", "global"):
                raise ConfigError(f"fallback_policy step {step!r} unknown")


def config_to_dict(config: PipelineConfig) -> dict:
    out = asdict(config)
    out["fallback_policy"] = list(config.fallback_policy)
    out["image_size"] = list(config.image_size) if config.image_size else None
    return out


def config_from_dict(raw: dict, base: PipelineConfig | None = None) -> PipelineConfig:
    """Build a config from a parsed mapping, reporting bad keys by name."""
    raw = dict(raw)
    known = {
        "bank", "crop", "tau", "saliency", "fallback_policy", "encoder",
        "proposals", "dataset", "images", "image_size", "expressions", "gt",
        "out", "workers", "seed",
    }
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"unknown config key {unknown[0]!r}")
    kwargs = {}
    try:
        if "crop" in raw:
            kwargs["crop"] = CropConfig(**raw["crop"])
        if "saliency" in raw:
            kwargs["saliency"] = SaliencyConfig(**raw["saliency"])
        if "encoder" in raw:
            kwargs["encoder"] = EncoderConfig(**raw["encoder"])
        if "proposals" in raw:
            kwargs["proposals"] = ProposalSource(**raw["proposals"])
    except TypeError as exc:
        raise ConfigError(f"bad config section: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    for key in ("bank", "tau", "dataset", "images", "expressions", "gt", "out",
                "workers", "seed"):
        if key in raw:
            kwargs[key] = raw[key]
    if "fallback_policy" in raw:
        kwargs["fallback_policy"] = tuple(raw["fallback_policy"])
    if raw.get("image_size") is not None:
        kwargs["image_size"] = (int(raw["image_size"][0]), int(raw["image_size"][1]))
    if base is not None:
        merged = replace(base)
        for k, v in kwargs.items():
            setattr(merged, k, v)
        merged.__post_init__()
        return merged
    return PipelineConfig(**kwargs)


def load_config(path: str | Path) -> PipelineConfig:
    """Read a config file; a run manifest is accepted and replays its
    resolved config."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if "config" in raw and "command" in raw:
        raw = raw["config"]
    return config_from_dict(raw)


def resolve_bank(config: PipelineConfig) -> ClassTextBank:
    if config.bank in BANK_PRESETS:
        return load_packaged_bank(config.bank)
    return load_bank(config.bank)


# ---------------------------------------------------------------------------
# encoders and inputs

class _LockedEncoder:
    """Serializes calls into an adapter that declares itself non-concurrent."""

    def __init__(self, inner, lock: threading.Lock):
        self._inner = inner
        self._lock = lock
        self.concurrent = True
        self.dim = getattr(inner, "dim", 0)

    def embed_images(self, patches):
        with self._lock:
            return self._inner.embed_images(patches)

    def embed_texts(self, texts):
        with self._lock:
            return self._inner.embed_texts(texts)

    def token_maps(self, image, tokens):
        with self._lock:
            return self._inner.token_maps(image, tokens)


class EncoderHub:
    """Hands out per-image embedding and saliency encoders per the config."""

    def __init__(self, config: EncoderConfig, dataset: str | None):
        self.config = config
        self.dataset = dataset
        self._lock = threading.Lock()
        self._shared = None
        if config.kind == "mock":
            if config.tables:
                self._shared = MockEmbeddingEncoder.load_tables(config.tables)
            else:
                self._shared = MockEmbeddingEncoder(dim=config.dim)
            self._shared_saliency = MockSaliencyEncoder()
        elif config.kind == "tensor-file":
            self._shared_saliency = None
        elif config.kind in ENCODER_ADAPTERS:
            self._factory = ENCODER_ADAPTERS[config.kind](dict(config.params))
            self._shared_saliency = None
        else:
            raise ConfigError(f"unknown encoder kind {config.kind!r}")

    def _features_path(self, image_id: str) -> Path:
        root = self.config.features_dir or (
            str(Path(self.dataset) / "features") if self.dataset else None)
        if root is None:
            raise ConfigError("encoder.features_dir is required for tensor-file runs")
        return Path(root) / f"{image_id}.npz"

    def _wrap(self, enc):
        if getattr(enc, "concurrent", True):
            return enc
        return _LockedEncoder(enc, self._lock)

    def embedding(self, image_id: str):
        if self.config.kind == "mock":
            return self._wrap(self._shared)
        if self.config.kind == "tensor-file":
            return self._wrap(TensorFileAdapter(self._features_path(image_id)))
        return self._wrap(self._factory(image_id))

    def saliency(self, image_id: str):
        if self.config.kind == "mock":
            return self._wrap(self._shared_saliency)
        if self.config.kind == "tensor-file":
            return self._wrap(TensorFileAdapter(self._features_path(image_id)))
        return self._wrap(self._factory(image_id))


def paint_image(mask_set: MaskSet) -> np.ndarray:
    """Deterministic stand-in image when no file exists: flat background
    with each proposal painted in its stable id color."""
    h, w = mask_set.image_size
    image = np.full((h, w, 3), 32, dtype=np.float64)
    for m in mask_set:
        image[m.grid.astype(bool)] = stable_color(f"paint:{mask_set.image_id}:{m.mask_id}")
    return image.astype(np.uint8)


def load_image(config: PipelineConfig, image_id: str, mask_set: MaskSet) -> np.ndarray:
    if config.dataset:
        for suffix in (".png", ".jpg", ".jpeg"):
            path = Path(config.dataset) / "images" / f"{image_id}{suffix}"
            if path.exists():
                return np.asarray(Image.open(path).convert("RGB"))
    logger.info("no image file for %s, painting from proposals", image_id)
    return paint_image(mask_set)


def discover_images(config: PipelineConfig) -> list[str]:
    if config.images:
        return sorted(config.images)
    if config.proposals.kind == "file" and config.proposals.path:
        path = Path(config.proposals.path)
        if path.is_dir():
            ids = sorted(p.stem for p in path.glob("*.json"))
            if ids:
                return ids
        elif path.exists():
            return [json.loads(path.read_text())["image_id"]]
    if config.dataset:
        images_dir = Path(config.dataset) / "images"
        if images_dir.is_dir():
            return sorted({p.stem for p in images_dir.iterdir() if p.is_file()})
    raise ConfigError("no images to process: set 'images' or a proposal directory")


def _gt_path(config: PipelineConfig) -> Path | None:
    if config.gt:
        return Path(config.gt)
    if config.dataset:
        candidate = Path(config.dataset) / "gt.json"
        if candidate.exists():
            return candidate
    return None


def write_manifest(config: PipelineConfig, command: str, out_dir: Path) -> Path:
    manifest = {
        "command": command,
        "version": __version__,
        "seed": config.seed,
        "config": config_to_dict(config),
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


# ---------------------------------------------------------------------------
# batch open-vocabulary labeling

def label_image(config: PipelineConfig, bank: ClassTextBank, hub: EncoderHub,
                image_id: str) -> SegmentationResult:
    """Proposals -> patches -> features -> labels for one image."""
    mask_set = load_proposals(config.proposals, image_id, config.image_size)
    image = load_image(config, image_id, mask_set)
    encoder = hub.embedding(image_id)
    entries = render_prompts(bank)
    text_feats = embed_texts(entries, encoder)
    feats = extract_local_features(image, mask_set, config.crop, encoder)
    labeled = classify_masks(feats, bank, text_feats, tau=config.tau,
                             mask_ids=mask_set.ids(), entries=entries)
    return assemble_ovss(mask_set, labeled)


def result_to_record(result: SegmentationResult) -> dict:
    h, w = result.image_size
    return {
        "image_id": result.image_id,
        "height": h,
        "width": w,
        "masks": [
            {
                "mask_id": lm.mask_id,
                "class": lm.class_id,
                "probability": lm.probability,
                "rle": rle.encode(result.mask_set.get(lm.mask_id).grid),
            }
            for lm in result.labels
        ],
    }


def _evaluate_labelings(results: list[SegmentationResult], gt: list[GtInstance],
                        bank: ClassTextBank) -> EvalReport:
    predictions = {}
    for result in results:
        for class_id, masks in result.masks_by_class().items():
            predictions[(result.image_id, class_id)] = [m.grid for m in masks]
    report = image_level_miou(predictions, gt)
    unseen = [u for u in bank.unseen if u in report.per_category_iou]
    if unseen:
        report = split_report(report, unseen)
    return report


def run_ovss(config: PipelineConfig, bank: ClassTextBank | None = None) -> dict:
    """Label every image and export one record file each, plus a report
    when ground truth exists. Returns the run summary."""
    bank = bank or resolve_bank(config)
    hub = EncoderHub(config.encoder, config.dataset)
    out_dir = Path(config.out)
    run_dir = out_dir / "ovss"
    run_dir.mkdir(parents=True, exist_ok=True)
    image_ids = discover_images(config)

    results: dict[str, SegmentationResult] = {}
    failures: list[dict] = []

    def job(image_id: str):
        return image_id, label_image(config, bank, hub, image_id)

    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        futures = [pool.submit(job, image_id) for image_id in image_ids]
        for image_id, future in zip(image_ids, futures):
            try:
                _, result = future.result()
                results[image_id] = result
            except Exception as exc:
                logger.error("image %s failed: %s", image_id, exc)
                failures.append({"item": image_id, "error": str(exc)})

    for image_id in sorted(results):
        record = result_to_record(results[image_id])
        (run_dir / f"{image_id}.json").write_text(
            json.dumps(record, indent=2, sort_keys=True) + "\n")

    report_dict = None
    gt_path = _gt_path(config)
    if gt_path is not None and results:
        report = _evaluate_labelings(list(results.values()), load_gt(gt_path), bank)
        report_dict = report.to_dict()
        (run_dir / "report.json").write_text(
            json.dumps(report_dict, indent=2, sort_keys=True) + "\n")

    write_manifest(config, "ovss", out_dir)
    return {
        "command": "ovss",
        "out": str(run_dir),
        "images": len(results),
        "failures": failures,
        "report": report_dict,
    }


# ---------------------------------------------------------------------------
# referring-expression runs

def _expressions_path(config: PipelineConfig) -> Path:
    if config.expressions:
        return Path(config.expressions)
    if config.dataset:
        candidate = Path(config.dataset) / "expressions.json"
        if candidate.exists():
            return candidate
    raise ConfigError("no expressions file: set 'expressions' or add one to the dataset")


def scene_saliency(config: PipelineConfig, hub: EncoderHub, image_id: str,
                   image: np.ndarray, expr) -> SaliencyMap:
    """Token maps -> group maps -> fused scene map for one expression."""
    encoder = hub.saliency(image_id)
    tokens = [t.text for t in expr.ref_tokens]
    sal, _ = token_saliency(image, tokens, encoder)
    groups = group_gradcam(sal, expr)
    if config.saliency.mode == "single":
        grid = groups.l_ref.grid
        if config.saliency.normalize:
            grid = minmax_normalize(grid)
        return SaliencyMap(grid, "l_cs", normalized=config.saliency.normalize)
    return fuse_expression_maps(groups, normalize=config.saliency.normalize)


def refer_expression(config: PipelineConfig, bank: ClassTextBank, hub: EncoderHub,
                     ovss: SegmentationResult, image: np.ndarray,
                     record: dict, tagger: RuleBasedTagger) -> dict:
    """Select the referred mask for one expression record."""
    vocab = bank.vocabulary()
    expr = decouple_expression(record["text"], vocab, tagger)
    l_cs = scene_saliency(config, hub, ovss.image_id, image, expr)
    peaks = find_local_maxima(l_cs, threshold=config.saliency.theta,
                              smooth_radius=config.saliency.smooth_radius)
    h, w = ovss.image_size
    out = {
        "image_id": ovss.image_id,
        "height": h,
        "width": w,
        "text": record["text"],
        "class_tokens": [t.text for t in expr.cls_tokens],
        "modifier_tokens": [t.text for t in expr.mod_tokens],
        "peaks": len(peaks),
    }
    if not config.saliency.selection:
        member = l_cs.grid >= config.saliency.theta * l_cs.grid.max()
        out.update({
            "mask_id": None,
            "label": None,
            "score": None,
            "path": "heatmap",
            "rle": rle.encode(member.astype(np.uint8)),
        })
        return out
    targets = derive_target_classes(expr, vocab)
    known = set(bank.class_ids()) | {BACKGROUND}
    selection, _ = select_referred(ovss, l_cs, peaks, targets,
                                   policy=config.fallback_policy,
                                   known_classes=known)
    if selection.mask_id is None:
        member = np.zeros((h, w), dtype=np.uint8)
    else:
        member = ovss.mask_set.get(selection.mask_id).grid
    out.update({
        "mask_id": selection.mask_id,
        "label": selection.class_id,
        "score": selection.score,
        "path": selection.path,
        "target_classes": sorted(targets),
        "rle": rle.encode(member),
    })
    return out


def run_res(config: PipelineConfig, bank: ClassTextBank | None = None) -> dict:
    """Run referring-expression selection over the expressions file."""
    bank = bank or resolve_bank(config)
    hub = EncoderHub(config.encoder, config.dataset)
    tagger = RuleBasedTagger()
    out_dir = Path(config.out)
    run_dir = out_dir / "res"
    run_dir.mkdir(parents=True, exist_ok=True)
    records = load_expressions(_expressions_path(config))

    by_image: dict[str, list[tuple[int, dict]]] = {}
    for idx, record in enumerate(records):
        by_image.setdefault(str(record["image_id"]), []).append((idx, record))

    outputs: dict[int, dict] = {}
    failures: list[dict] = []
    lock = threading.Lock()

    def job(image_id: str, items: list[tuple[int, dict]]):
        ovss = label_image(config, bank, hub, image_id)
        image = load_image(config, image_id, ovss.mask_set)
        for idx, record in items:
            try:
                out = refer_expression(config, bank, hub, ovss, image, record, tagger)
                with lock:
                    outputs[idx] = out
            except Exception as exc:
                logger.error("expression %d (%s) failed: %s", idx, image_id, exc)
                with lock:
                    failures.append({"item": f"expression[{idx}]", "error": str(exc)})

    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        futures = {}
        for image_id in sorted(by_image):
            futures[image_id] = pool.submit(job, image_id, by_image[image_id])
        for image_id in sorted(futures):
            try:
                futures[image_id].result()
            except Exception as exc:
                logger.error("image %s failed: %s", image_id, exc)
                failures.append({"item": image_id, "error": str(exc)})

    ordered = [outputs[i] for i in sorted(outputs)]

    report_dict = None
    evaluated = [
        (i, rec) for i, rec in zip(sorted(outputs), ordered)
        if records[i].get("gt_rle") is not None
    ]
    if evaluated:
        gt_instances = []
        predictions = {}
        for i, rec in evaluated:
            source = records[i]
            category = str(source.get("category")
                           or (rec.get("target_classes") or ["unknown"])[0])
            h, w = rec["height"], rec["width"]
            key = (f"{rec['image_id']}#{i}", category)
            gt_instances.append(GtInstance(
                image_id=key[0], category=category,
                grid=rle.decode(source["gt_rle"], h, w)))
            pred_grid = rle.decode(rec["rle"], h, w)
            if pred_grid.any():
                predictions[key] = [pred_grid]
        report = image_level_miou(predictions, gt_instances)
        unseen = [u for u in bank.unseen if u in report.per_category_iou]
        if unseen:
            report = split_report(report, unseen)
        report_dict = report.to_dict()

    payload = {"results": ordered}
    if report_dict is not None:
        payload["report"] = report_dict
    (run_dir / "results.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n")

    write_manifest(config, "res", out_dir)
    return {
        "command": "res",
        "out": str(run_dir),
        "expressions": len(ordered),
        "failures": failures,
        "report": report_dict,
    }


# ---------------------------------------------------------------------------
# ablation grids

ABLATION_PRESETS = ("table2", "table3", "table4", "table5")


def _bank_variant(bank: ClassTextBank, synonyms: bool, descriptions: bool,
                  backgrounds: bool) -> ClassTextBank:
    classes = [replace(c,
                       synonyms=list(c.synonyms) if synonyms else [],
                       description=c.description if descriptions else None)
               for c in bank.classes]
    return replace(bank, classes=classes,
                   backgrounds=list(bank.backgrounds) if backgrounds else [])


def run_ablation(preset: str, config: PipelineConfig) -> dict:
    """Expand a preset into a run grid and execute it sequentially.

    table2 sweeps crop variants, table3 prompt templates, table4 text-bank
    augmentation, table5 saliency mode x selection. Each run lands in its
    own subdirectory of the configured output.
    """
    if preset not in ABLATION_PRESETS:
        raise ConfigError(f"unknown ablation preset {preset!r}")
    base_out = Path(config.out)
    runs: dict[str, dict] = {}

    def miou(summary):
        report = summary.get("report")
        return report["overall_miou"] if report else None

    if preset == "table2":
        for variant in CROP_VARIANTS:
            sub = replace(config, crop=replace(config.crop, variant=variant),
                          out=str(base_out / preset / variant))
            summary = run_ovss(sub)
            runs[variant] = {"miou": miou(summary), "failures": len(summary["failures"]),
                             "out": summary["out"]}
    elif preset == "table3":
        bank = resolve_bank(config)
        for name, template in TEMPLATE_PRESETS.items():
            sub = replace(config, out=str(base_out / preset / name))
            summary = run_ovss(sub, bank=replace(bank, template=template))
            runs[name] = {"miou": miou(summary), "failures": len(summary["failures"]),
                          "out": summary["out"], "template": template}
    elif preset == "table4":
        bank = resolve_bank(config)
        grid = {
            "original": (False, False, False),
            "synonyms": (True, False, False),
            "descriptions": (False, True, False),
            "backgrounds": (False, False, True),
            "full": (True, True, True),
        }
        for name, (syn, desc, bg) in grid.items():
            sub = replace(config, out=str(base_out / preset / name))
            summary = run_ovss(sub, bank=_bank_variant(bank, syn, desc, bg))
            runs[name] = {"miou": miou(summary), "failures": len(summary["failures"]),
                          "out": summary["out"]}
    else:  # table5
        grid = {
            "single": ("single", False),
            "single_selection": ("single", True),
            "cross": ("cross", False),
            "cross_selection": ("cross", True),
        }
        for name, (mode, selection) in grid.items():
            sub = replace(config,
                          saliency=replace(config.saliency, mode=mode, selection=selection),
                          out=str(base_out / preset / name))
            summary = run_res(sub)
            runs[name] = {"miou": miou(summary), "failures": len(summary["failures"]),
                          "out": summary["out"]}

    summary = {"preset": preset, "runs": runs}
    base_out.mkdir(parents=True, exist_ok=True)
    (base_out / f"{preset}_summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


# ---------------------------------------------------------------------------
# dataset synthesis helper shared by the CLI and tests

def export_scene(scene_spec, dataset_dir: str | Path) -> dict:
    """Materialize a synthetic scene as an on-disk dataset (image, proposal
    container, ground truth)."""
    from .proposals import save_gt, synth_scene

    dataset_dir = Path(dataset_dir)
    (dataset_dir / "images").mkdir(parents=True, exist_ok=True)
    (dataset_dir / "proposals").mkdir(parents=True, exist_ok=True)
    image, mask_set, gt = synth_scene(scene_spec)
    Image.fromarray(image).save(dataset_dir / "images" / f"{mask_set.image_id}.png")
    save_proposals(mask_set, dataset_dir / "proposals" / f"{mask_set.image_id}.json")
    gt_path = dataset_dir / "gt.json"
    existing = []
    if gt_path.exists():
        existing = load_gt(gt_path)
    save_gt(existing + gt, gt_path)
    return {
        "image_id": mask_set.image_id,
        "masks": len(mask_set),
        "gt_instances": len(gt),
        "dataset": str(dataset_dir),
    }
