"""Gateway between the pipeline and any vision-language backbone.

Everything upstream speaks in plain arrays: unit-normalized feature
vectors, temperature-scaled probability rows, and per-token saliency grids.
Real backbones plug in behind two small interfaces; the package ships
deterministic mocks (exact lookup tables with a hash-to-unit-vector
fallback) and a file adapter that replays precomputed tensors, so the whole
pipeline runs and tests offline.

Per-token saliency is resized to the image frame here, at the boundary, so
all downstream fusion and selection math shares one coordinate system.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage


def softmax(logits: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = logits - logits.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def resize_bilinear(grid: np.ndarray, size: tuple[int, int]) -> np.ndarray:
    """Resize a 2-d grid to (H, W) with bilinear sampling at pixel centers."""
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 2:
        raise ValueError(f"expected a 2-d grid, got shape {grid.shape}")
    h, w = grid.shape
    out_h, out_w = int(size[0]), int(size[1])
    if (h, w) == (out_h, out_w):
        return grid.copy()
    rows = (np.arange(out_h) + 0.5) * (h / out_h) - 0.5
    cols = (np.arange(out_w) + 0.5) * (w / out_w) - 0.5
    rr, cc = np.meshgrid(rows, cols, indexing="ij")
    return ndimage.map_coordinates(grid, [rr, cc], order=1, mode="nearest")


def l2_normalize_rows(matrix: np.ndarray, what: str) -> np.ndarray:
    """Normalize each row to unit length; a zero row is a caller bug."""
    matrix = np.asarray(matrix, dtype=np.float64)
    norms = np.linalg.norm(matrix, axis=1)
    bad = np.flatnonzero(norms < 1e-12)
    if bad.size:
        raise ValueError(f"{what} row {int(bad[0])} has zero norm")
    return matrix / norms[:, None]


@dataclass
class ProbabilityMatrix:
    """Per-item class probabilities (rows sum to 1) plus the temperature
    that produced them."""

    probs: np.ndarray
    temperature: float

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=np.float64)
        if self.probs.ndim != 2:
            raise ValueError(f"probabilities must be 2-d, got shape {self.probs.shape}")


@dataclass
class TokenSaliency:
    """Per-token attention and raw (unclamped) gradient grids for one image,
    all on a shared (h, w) frame, plus the image-text matching score."""

    tokens: list[str]
    attn: dict[str, np.ndarray]
    grad_raw: dict[str, np.ndarray]
    itm_score: float = 1.0

    def __post_init__(self):
        keys = set(self.tokens)
        if len(keys) != len(self.tokens):
            raise ValueError("token list contains duplicates")
        if set(self.attn) != keys or set(self.grad_raw) != keys:
            raise ValueError("attention/gradient maps must cover exactly the token list")
        shapes = {m.shape for m in self.attn.values()} | {m.shape for m in self.grad_raw.values()}
        if len(shapes) > 1:
            raise ValueError(f"saliency maps disagree on shape: {sorted(shapes)}")

    @property
    def map_shape(self) -> tuple[int, int]:
        return next(iter(self.attn.values())).shape


class EmbeddingEncoder:
    """Contract for the patch/text embedding backbone."""

    dim: int
    concurrent: bool = True

    def embed_images(self, patches: list[np.ndarray]) -> np.ndarray:
        raise NotImplementedError

    def embed_texts(self, texts: list[str]) -> np.ndarray:
        raise NotImplementedError


class SaliencyEncoder:
    """Contract for the per-token attention/gradient backbone."""

    concurrent: bool = True

    def token_maps(self, image: np.ndarray, tokens: list[str]) -> TokenSaliency:
        raise NotImplementedError


def embed_images(patches: list[np.ndarray], encoder: EmbeddingEncoder) -> np.ndarray:
    """Embed patches into an (N, d) matrix, one row per patch in order."""
    feats = np.asarray(encoder.embed_images(list(patches)), dtype=np.float64)
    if feats.ndim != 2 or feats.shape[0] != len(patches):
        raise ValueError(
            f"encoder returned shape {feats.shape} for {len(patches)} patches"
        )
    if not np.isfinite(feats).all():
        bad = int(np.argwhere(~np.isfinite(feats).all(axis=1))[0][0])
        raise ValueError(f"encoder returned non-finite features for patch {bad}")
    return feats


def embed_texts(prompts, encoder: EmbeddingEncoder) -> np.ndarray:
    """Embed prompt strings (or PromptEntry objects) into an (N, d) matrix."""
    texts = [p if isinstance(p, str) else p.text for p in prompts]
    feats = np.asarray(encoder.embed_texts(texts), dtype=np.float64)
    if feats.ndim != 2 or feats.shape[0] != len(texts):
        raise ValueError(f"encoder returned shape {feats.shape} for {len(texts)} texts")
    if not np.isfinite(feats).all():
        bad = int(np.argwhere(~np.isfinite(feats).all(axis=1))[0][0])
        raise ValueError(f"encoder returned non-finite features for text {bad}")
    return feats


def classify(image_feats: np.ndarray, text_feats: np.ndarray,
             tau: float = 0.01) -> tuple[ProbabilityMatrix, np.ndarray]:
    """Temperature-scaled cosine classification.

    Rows of both inputs are L2-normalized, logits are their dot products
    over tau, and each image row is softmaxed over the text entries. Labels
    are the per-row argmax (lowest index on exact ties).
    """
    if tau <= 0:
        raise ValueError(f"temperature must be positive, got {tau}")
    img = l2_normalize_rows(np.atleast_2d(image_feats), "image feature")
    txt = l2_normalize_rows(np.atleast_2d(text_feats), "text feature")
    if img.shape[1] != txt.shape[1]:
        raise ValueError(
            f"feature dimension mismatch: image {img.shape[1]} vs text {txt.shape[1]}"
        )
    probs = softmax((img @ txt.T) / tau, axis=1)
    labels = probs.argmax(axis=1)
    return ProbabilityMatrix(probs=probs, temperature=tau), labels


def token_saliency(image: np.ndarray, tokens: list[str],
                   encoder: SaliencyEncoder) -> tuple[TokenSaliency, dict[str, np.ndarray]]:
    """Fetch per-token maps and lift them to the image frame.

    Returns the resized TokenSaliency plus the per-token saliency grids
    attn * max(grad, 0), one per unique token.
    """
    image = np.asarray(image)
    size = image.shape[:2]
    unique = list(dict.fromkeys(tokens))
    raw = encoder.token_maps(image, unique)
    missing = [t for t in unique if t not in raw.attn]
    if missing:
        raise ValueError(f"saliency encoder returned no map for token {missing[0]!r}")
    attn = {t: resize_bilinear(raw.attn[t], size) for t in unique}
    grad = {t: resize_bilinear(raw.grad_raw[t], size) for t in unique}
    sal = TokenSaliency(tokens=unique, attn=attn, grad_raw=grad, itm_score=raw.itm_score)
    cams = {t: attn[t] * np.clip(grad[t], 0.0, None) for t in unique}
    return sal, cams


def patch_digest(patch: np.ndarray) -> str:
    """Stable content digest of an array (dtype, shape, and bytes)."""
    arr = np.ascontiguousarray(patch)
    h = hashlib.sha256()
    h.update(str(arr.dtype).encode())
    h.update(str(arr.shape).encode())
    h.update(arr.tobytes())
    return h.hexdigest()


def _vector_from_digest(digest: str, dim: int) -> np.ndarray:
    seed = int(digest[:16], 16)
    rng = np.random.Generator(np.random.PCG64(seed))
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


class MockEmbeddingEncoder(EmbeddingEncoder):
    """Exact lookup tables with a deterministic hash-to-unit-vector fallback.

    Texts are keyed by the exact prompt string, images by their content
    digest. Anything not registered still embeds deterministically, so
    end-to-end runs never depend on call order or wall clock.
    """

    def __init__(self, dim: int = 32, text_table: dict[str, np.ndarray] | None = None,
                 image_table: dict[str, np.ndarray] | None = None):
        if dim < 1:
            raise ValueError(f"embedding dim must be positive, got {dim}")
        self.dim = dim
        self.text_table = {k: np.asarray(v, dtype=np.float64)
                           for k, v in (text_table or {}).items()}
        self.image_table = {k: np.asarray(v, dtype=np.float64)
                            for k, v in (image_table or {}).items()}

    def register_text(self, text: str, vector) -> None:
        self.text_table[text] = np.asarray(vector, dtype=np.float64)

    def register_image(self, patch: np.ndarray, vector) -> None:
        self.image_table[patch_digest(patch)] = np.asarray(vector, dtype=np.float64)

    def embed_texts(self, texts: list[str]) -> np.ndarray:
        rows = []
        for t in texts:
            if t in self.text_table:
                rows.append(self.text_table[t])
            else:
                rows.append(_vector_from_digest(
                    hashlib.sha256(("text:" + t).encode()).hexdigest(), self.dim))
        return np.stack(rows) if rows else np.zeros((0, self.dim))

    def embed_images(self, patches: list[np.ndarray]) -> np.ndarray:
        rows = []
        for p in patches:
            key = patch_digest(p)
            if key in self.image_table:
                rows.append(self.image_table[key])
            else:
                rows.append(_vector_from_digest(key, self.dim))
        return np.stack(rows) if rows else np.zeros((0, self.dim))

    def save_tables(self, path: str | Path) -> None:
        payload = {
            "dim": self.dim,
            "texts": {k: v.tolist() for k, v in self.text_table.items()},
            "images": {k: v.tolist() for k, v in self.image_table.items()},
        }
        Path(path).write_text(json.dumps(payload, sort_keys=True))

    @classmethod
    def load_tables(cls, path: str | Path) -> "MockEmbeddingEncoder":
        payload = json.loads(Path(path).read_text())
        return cls(dim=int(payload["dim"]),
                   text_table=payload.get("texts", {}),
                   image_table=payload.get("images", {}))


def _bump(center_xy: tuple[float, float], shape: tuple[int, int],
          sigma: float) -> np.ndarray:
    h, w = shape
    yy, xx = np.mgrid[0:h, 0:w]
    cx, cy = center_xy
    return np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2.0 * sigma ** 2))


class MockSaliencyEncoder(SaliencyEncoder):
    """Injectable per-token map tables with a deterministic procedural
    fallback (a smooth bump whose position hashes off the token text)."""

    def __init__(self, maps: dict[str, tuple[np.ndarray, np.ndarray]] | None = None,
                 itm_score: float = 1.0, map_shape: tuple[int, int] = (16, 16),
                 strict: bool = False):
        self.maps = {}
        for token, (attn, grad) in (maps or {}).items():
            self.register(token, attn, grad)
        self.itm_score = float(itm_score)
        self.map_shape = (int(map_shape[0]), int(map_shape[1]))
        self.strict = strict

    def register(self, token: str, attn: np.ndarray, grad: np.ndarray) -> None:
        self.maps[token] = (np.asarray(attn, dtype=np.float64),
                            np.asarray(grad, dtype=np.float64))

    def _fallback(self, token: str) -> tuple[np.ndarray, np.ndarray]:
        h, w = self.map_shape
        d = hashlib.sha256(("saliency:" + token).encode()).hexdigest()
        cx = (int(d[:8], 16) % (w * 8)) / 8.0
        cy = (int(d[8:16], 16) % (h * 8)) / 8.0
        sigma = max(h, w) / 6.0
        attn = _bump((cx, cy), (h, w), sigma)
        grad = _bump((cx, cy), (h, w), sigma * 1.5) - 0.25
        return attn, grad

    def token_maps(self, image: np.ndarray, tokens: list[str]) -> TokenSaliency:
        attn, grad = {}, {}
        shape = None
        for t in tokens:
            if t in self.maps:
                attn[t], grad[t] = self.maps[t]
            elif self.strict:
                raise ValueError(f"no saliency maps registered for token {t!r}")
            else:
                attn[t], grad[t] = self._fallback(t)
            shape = attn[t].shape
        if shape is not None and any(m.shape != shape for m in attn.values()):
            raise ValueError("registered saliency maps disagree on shape")
        return TokenSaliency(tokens=list(tokens), attn=attn, grad_raw=grad,
                             itm_score=self.itm_score)


TENSOR_KEYS = ("patch_features", "text_features", "itm_score")


def write_tensor_file(path: str | Path, patch_features: np.ndarray | None = None,
                      text_features: np.ndarray | None = None,
                      attn: dict[str, np.ndarray] | None = None,
                      grad: dict[str, np.ndarray] | None = None,
                      itm_score: float | None = None) -> None:
    """Write a precomputed-tensor container (named float32 arrays)."""
    arrays: dict[str, np.ndarray] = {}
    if patch_features is not None:
        arrays["patch_features"] = np.asarray(patch_features, dtype="<f4")
    if text_features is not None:
        arrays["text_features"] = np.asarray(text_features, dtype="<f4")
    for t, m in (attn or {}).items():
        arrays[f"attn/{t}"] = np.asarray(m, dtype="<f4")
    for t, m in (grad or {}).items():
        arrays[f"grad/{t}"] = np.asarray(m, dtype="<f4")
    if itm_score is not None:
        arrays["itm_score"] = np.asarray(itm_score, dtype="<f4")
    if not arrays:
        raise ValueError("tensor file would be empty")
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


class TensorFileAdapter(EmbeddingEncoder, SaliencyEncoder):
    """Replay features and saliency maps precomputed for one image.

    Rows of patch_features follow the proposal order of the image's mask
    set; rows of text_features follow the rendered prompt order. Token maps
    are stored under attn/<token> and grad/<token>.
    """

    concurrent = True

    def __init__(self, path: str | Path):
        self.path = Path(path)
        try:
            with np.load(self.path) as z:
                self._arrays = {k: np.asarray(z[k], dtype=np.float64) for k in z.files}
        except (OSError, ValueError) as exc:
            raise ValueError(f"cannot read tensor file {self.path}: {exc}") from exc
        pf = self._arrays.get("patch_features")
        self.dim = int(pf.shape[1]) if pf is not None and pf.ndim == 2 else 0

    def _require(self, key: str) -> np.ndarray:
        if key not in self._arrays:
            raise ValueError(f"tensor file {self.path} has no array {key!r}")
        return self._arrays[key]

    def embed_images(self, patches: list[np.ndarray]) -> np.ndarray:
        feats = self._require("patch_features")
        if feats.shape[0] != len(patches):
            raise ValueError(
                f"tensor file {self.path} holds {feats.shape[0]} patch rows, "
                f"pipeline asked for {len(patches)}"
            )
        return feats

    def embed_texts(self, texts: list[str]) -> np.ndarray:
        feats = self._require("text_features")
        if feats.shape[0] != len(texts):
            raise ValueError(
                f"tensor file {self.path} holds {feats.shape[0]} text rows, "
                f"pipeline asked for {len(texts)}"
            )
        return feats

    def token_maps(self, image: np.ndarray, tokens: list[str]) -> TokenSaliency:
        attn, grad = {}, {}
        for t in tokens:
            attn[t] = self._require(f"attn/{t}")
            grad[t] = self._require(f"grad/{t}")
        score = self._arrays.get("itm_score")
        return TokenSaliency(
            tokens=list(tokens), attn=attn, grad_raw=grad,
            itm_score=float(score) if score is not None else 1.0,
        )
