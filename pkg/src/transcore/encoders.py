"""Embedding backends behind one interface.

Three kinds are supported:

* ``stub`` — a deterministic analytic encoder (per-patch orientation
  histograms) for desk-scale tests; no model weights involved.
* ``precomputed`` — embeddings read from a directory of
  ``<pair_id>.<role>.npy`` tensors produced elsewhere.
* ``onnx-model`` — an exported encoder graph run through onnxruntime;
  input "image" [1,3,Hs,Ws] float32 (already normalized), output
  "embedding" [1,C,H,W]. Preprocessing constants come from the sibling
  ``<model>.json`` metadata when present, else the segmentation-encoder
  defaults below.

Embeddings can be cached as NPY keyed by a content hash when the
``TRANSCORE_CACHE`` environment variable points at a directory.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BackendUnavailable,
    ImageTooSmall,
    MissingEmbedding,
    ShapeMismatch,
)
from .image_io import ImageBuffer, resize_bilinear
from .npy_io import TensorF32, read_tensor_file, write_tensor_file

# Pixel statistics published with the segmentation foundation model;
# applied after the square resize, on the [0, 255] float scale.
SAM_PIXEL_MEAN = (123.675, 116.28, 103.53)
SAM_PIXEL_STD = (58.395, 57.12, 57.375)
SAM_INPUT_SIZE = 1024
SAM_EMBED_SHAPE = (256, 64, 64)

STUB_PATCH = 16
STUB_BINS = 8

__all__ = [
    "EncoderSpec",
    "EmbeddingMap",
    "preprocess_for_sam",
    "preprocess",
    "embed",
    "stub_encode",
    "SAM_PIXEL_MEAN",
    "SAM_PIXEL_STD",
]


@dataclass(frozen=True)
class EmbeddingMap:
    """(C, H, W) float32 map of local content descriptors; always finite."""

    data: np.ndarray

    def __post_init__(self):
        arr = self.data
        if arr.ndim != 3:
            raise ValueError(f"embedding map must be (C, H, W), got shape {arr.shape}")
        if arr.dtype != np.float32:
            object.__setattr__(self, "data", arr.astype(np.float32))
        if not np.isfinite(self.data).all():
            raise ValueError("embedding map contains NaN/Inf")

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return tuple(self.data.shape)


@dataclass(frozen=True)
class EncoderSpec:
    """Which backend produces embeddings, and what shape to expect.

    ``expected_shape`` of None means "derived from the input" (stub) or
    "whatever the file holds" (precomputed).
    """

    kind: str
    model_path: Path | None = None
    embed_dir: Path | None = None
    expected_shape: tuple[int, int, int] | None = None

    def __post_init__(self):
        if self.kind == "stub":
            if self.model_path is not None or self.embed_dir is not None:
                raise ValueError("stub encoder takes no paths")
        elif self.kind == "onnx-model":
            if self.model_path is None or self.embed_dir is not None:
                raise ValueError("onnx-model encoder needs model_path only")
        elif self.kind == "precomputed":
            if self.embed_dir is None or self.model_path is not None:
                raise ValueError("precomputed encoder needs embed_dir only")
        else:
            raise ValueError(f"unknown encoder kind {self.kind!r}")
        if self.expected_shape is not None:
            if len(self.expected_shape) != 3 or any(d < 1 for d in self.expected_shape):
                raise ValueError(f"bad expected_shape {self.expected_shape}")

    @staticmethod
    def stub() -> "EncoderSpec":
        return EncoderSpec(kind="stub")

    @staticmethod
    def onnx(model_path: str | Path, expected_shape=SAM_EMBED_SHAPE) -> "EncoderSpec":
        shape = tuple(expected_shape) if expected_shape is not None else None
        return EncoderSpec(kind="onnx-model", model_path=Path(model_path), expected_shape=shape)

    @staticmethod
    def precomputed(embed_dir: str | Path, expected_shape=None) -> "EncoderSpec":
        shape = tuple(expected_shape) if expected_shape is not None else None
        return EncoderSpec(kind="precomputed", embed_dir=Path(embed_dir), expected_shape=shape)

    @staticmethod
    def parse(text: str) -> "EncoderSpec":
        """Parse the CLI syntax: ``stub`` | ``onnx:<path>`` | ``precomputed:<dir>``."""
        if text == "stub":
            return EncoderSpec.stub()
        if text.startswith("onnx:"):
            return EncoderSpec.onnx(text[len("onnx:"):])
        if text.startswith("precomputed:"):
            return EncoderSpec.precomputed(text[len("precomputed:"):])
        raise ValueError(f"unrecognized encoder spec {text!r}")

    def cache_id(self) -> str:
        """Stable string identifying this backend's preprocessing+model."""
        if self.kind == "stub":
            return "stub:v1"
        if self.kind == "onnx-model":
            digest = "absent"
            if self.model_path is not None and self.model_path.is_file():
                digest = hashlib.sha256(self.model_path.read_bytes()).hexdigest()[:16]
            return f"onnx:{digest}:{self.expected_shape}"
        return f"precomputed:{self.embed_dir}"


def _replicate_rgb(img: ImageBuffer) -> ImageBuffer:
    if img.channels == 3:
        return img
    return ImageBuffer(np.repeat(img.data, 3, axis=2))


def preprocess(
    img: ImageBuffer,
    size: int,
    mean: tuple[float, float, float],
    std: tuple[float, float, float],
    value_range: tuple[float, float] = (0.0, 255.0),
) -> TensorF32:
    """Resize, rescale, and standardize into a [1, 3, size, size] tensor."""
    rgb = _replicate_rgb(img)
    resized = resize_bilinear(rgb, size, size)
    lo, hi = value_range
    if resized.scale == "uint8":
        px = resized.data.astype(np.float64) / 255.0
    else:
        px = resized.data.astype(np.float64)
    px = lo + px * (hi - lo)
    px = (px - np.asarray(mean, dtype=np.float64)) / np.asarray(std, dtype=np.float64)
    chw = np.transpose(px, (2, 0, 1)).astype(np.float32)
    return TensorF32(chw[None, ...])


def preprocess_for_sam(img: ImageBuffer) -> TensorF32:
    """Standard preprocessing for the segmentation encoder.

    Grayscale is replicated to RGB, the image is resampled to
    1024x1024, scaled to [0, 255] floats, and standardized per channel
    with the published pixel mean/std. Output shape [1, 3, 1024, 1024].
    """
    return preprocess(img, SAM_INPUT_SIZE, SAM_PIXEL_MEAN, SAM_PIXEL_STD)


def _stub_luminance(img: ImageBuffer) -> np.ndarray:
    # 1000x-scaled Rec.601 weights: integer products cancel global offsets
    # exactly on 8-bit images, and the patch-wise L2 normalization below
    # makes the uniform scale factor irrelevant.
    data = img.data.astype(np.float64)
    if img.channels == 1:
        return data[:, :, 0] * 1000.0
    return data[:, :, 0] * 299.0 + data[:, :, 1] * 587.0 + data[:, :, 2] * 114.0


def _orientation_bins(gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Quantize gradient directions into 8 octants without trigonometry.

    Bin k covers angle [-pi + k*pi/4, -pi + (k+1)*pi/4) for
    atan2(gy, gx); boundaries resolve by sign/magnitude comparisons, so
    the result is exact (no floating-point wobble on axis-aligned or
    diagonal edges) and 90-degree image rotations shift bins by exactly 2.
    """
    ax = np.abs(gx)
    ay = np.abs(gy)
    neg_y = gy < 0
    pos_y = gy > 0
    conds = [
        (neg_y & (gx < 0) & (ay < ax)) | ((gy == 0) & (gx < 0)),
        neg_y & (gx < 0) & (ay >= ax),
        neg_y & ((gx == 0) | ((gx > 0) & (ay > ax))),
        neg_y & (gx > 0) & (ay <= ax),
        ~neg_y & (gx > 0) & (ay < ax),
        pos_y & (gx > 0) & (ay >= ax),
        pos_y & ((gx == 0) | ((gx < 0) & (ay > ax))),
        pos_y & (gx < 0) & (ay <= ax),
    ]
    return np.select(conds, list(range(STUB_BINS)), default=4).astype(np.intp)


def stub_encode(img: ImageBuffer) -> EmbeddingMap:
    """Analytic surrogate encoder: per-patch gradient-orientation histograms.

    Luminance gradients (central differences with edge replication) are
    quantized into 8 orientation octants and accumulated, weighted by
    gradient magnitude, over non-overlapping 16x16 patches; each patch
    vector is L2-normalized with a 1e-12 guard that leaves all-zero
    vectors untouched. Output is (8, floor(H/16), floor(W/16)).

    Bit-exactly invariant to global additive luminance offsets on 8-bit
    images, and equivariant under 90-degree rotation (bins permute by 2).
    """
    if min(img.height, img.width) < STUB_PATCH:
        raise ImageTooSmall(f"stub encoder needs >= {STUB_PATCH}px per side")
    lum = _stub_luminance(img)
    h, w = lum.shape
    gh = h // STUB_PATCH
    gw = w // STUB_PATCH
    lum = lum[: gh * STUB_PATCH, : gw * STUB_PATCH]

    padded = np.pad(lum, 1, mode="edge")
    gx = (padded[1:-1, 2:] - padded[1:-1, :-2]) * 0.5
    gy = (padded[2:, 1:-1] - padded[:-2, 1:-1]) * 0.5
    mag = np.hypot(gx, gy)
    bins = _orientation_bins(gx, gy)

    patch_row = np.arange(gh * STUB_PATCH) // STUB_PATCH
    patch_col = np.arange(gw * STUB_PATCH) // STUB_PATCH
    patch_idx = patch_row[:, None] * gw + patch_col[None, :]
    flat_idx = patch_idx * STUB_BINS + bins
    hist = np.bincount(flat_idx.ravel(), weights=mag.ravel(), minlength=gh * gw * STUB_BINS)
    hist = hist.reshape(gh, gw, STUB_BINS)

    norms = np.sqrt((hist * hist).sum(axis=2, keepdims=True))
    hist = hist / np.maximum(norms, 1e-12)
    return EmbeddingMap(np.transpose(hist, (2, 0, 1)).astype(np.float32))


class _OnnxEncoder:
    """One loaded onnxruntime session; serialized inference per session."""

    def __init__(self, model_path: Path):
        if not model_path.is_file():
            raise BackendUnavailable(f"model file not found: {model_path}")
        try:
            import onnxruntime  # noqa: PLC0415 - optional backend
        except ImportError as exc:
            raise BackendUnavailable(
                "onnxruntime is not installed; install the 'onnx' extra to run model backends"
            ) from exc
        self._session = onnxruntime.InferenceSession(
            str(model_path), providers=["CPUExecutionProvider"]
        )
        self._lock = threading.Lock()
        self.metadata = _load_metadata(model_path)

    def run(self, tensor: TensorF32, output_name: str = "embedding", input_name: str = "image") -> np.ndarray:
        with self._lock:
            (out,) = self._session.run([output_name], {input_name: tensor.data})
        return np.asarray(out)


def _load_metadata(model_path: Path) -> dict:
    meta_path = model_path.with_suffix(".json")
    if meta_path.is_file():
        return json.loads(meta_path.read_text())
    return {
        "input_size": SAM_INPUT_SIZE,
        "mean": list(SAM_PIXEL_MEAN),
        "std": list(SAM_PIXEL_STD),
        "value_range": [0.0, 255.0],
    }


_session_cache: dict[str, _OnnxEncoder] = {}
_session_lock = threading.Lock()


def _get_session(model_path: Path) -> _OnnxEncoder:
    key = str(model_path.resolve())
    with _session_lock:
        if key not in _session_cache:
            _session_cache[key] = _OnnxEncoder(model_path)
        return _session_cache[key]


def _cache_path(spec: EncoderSpec, img: ImageBuffer) -> Path | None:
    cache_dir = os.environ.get("TRANSCORE_CACHE")
    if not cache_dir:
        return None
    digest = hashlib.sha256(img.pixel_bytes() + b"|" + spec.cache_id().encode()).hexdigest()
    return Path(cache_dir) / f"{digest}.npy"


def embed(spec: EncoderSpec, img: ImageBuffer, key: str | None = None) -> EmbeddingMap:
    """Produce the embedding map for an image under the given backend.

    ``key`` names the ``<pair_id>.<role>`` entry for precomputed
    backends and is ignored otherwise. The output shape is checked
    against ``spec.expected_shape`` when set — never silently reshaped.
    """
    if spec.kind == "stub":
        emb = stub_encode(img)
    elif spec.kind == "precomputed":
        if key is None:
            raise MissingEmbedding("precomputed backend needs a '<pair_id>.<role>' key")
        path = spec.embed_dir / f"{key}.npy"
        if not path.is_file():
            raise MissingEmbedding(f"no precomputed embedding at {path}")
        tensor = read_tensor_file(path)
        if len(tensor.shape) != 3:
            raise ShapeMismatch(f"{path}: expected a (C, H, W) tensor, got {tensor.shape}")
        emb = EmbeddingMap(tensor.data)
    elif spec.kind == "onnx-model":
        cache_file = _cache_path(spec, img)
        if cache_file is not None and cache_file.is_file():
            emb = EmbeddingMap(read_tensor_file(cache_file).data)
        else:
            session = _get_session(spec.model_path)
            meta = session.metadata
            tensor = preprocess(
                img,
                int(meta.get("input_size", SAM_INPUT_SIZE)),
                tuple(meta.get("mean", SAM_PIXEL_MEAN)),
                tuple(meta.get("std", SAM_PIXEL_STD)),
                tuple(meta.get("value_range", (0.0, 255.0))),
            )
            out = session.run(tensor)
            if out.ndim != 4 or out.shape[0] != 1:
                raise ShapeMismatch(f"model emitted shape {out.shape}, want [1, C, H, W]")
            emb = EmbeddingMap(out[0].astype(np.float32))
            if cache_file is not None:
                cache_file.parent.mkdir(parents=True, exist_ok=True)
                write_tensor_file(cache_file, TensorF32(emb.data))
    else:
        raise ValueError(f"unknown encoder kind {spec.kind!r}")

    if spec.expected_shape is not None and emb.shape != tuple(spec.expected_shape):
        raise ShapeMismatch(
            f"backend produced {emb.shape}, expected {tuple(spec.expected_shape)}"
        )
    return emb
