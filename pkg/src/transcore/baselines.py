"""Comparison metrics: L2/MSE, PSNR, SSIM, LPIPS, ViTScore, and
segmentation-based scoring (per-pixel accuracy + class IoU).

Pixel metrics work in the image's native units (0-255 for 8-bit, 0-1
for float-tagged). LPIPS and the segmenter are consumed as exported
model graphs through the onnx backend; ViTScore reuses the spatial
cosine machinery on a classifier encoder's patch grid.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .encoders import EncoderSpec, embed, preprocess
from .errors import (
    BackendUnavailable,
    ClassCountMismatch,
    EmptyMatrix,
    ImageTooSmall,
    ShapeMismatch,
)
from .image_io import ImageBuffer, load_image, resize_bilinear, save_image
from .samscore import ScoreResult, samscore

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03

VIT_EMBED_SHAPE = (768, 14, 14)

__all__ = [
    "LabelMap",
    "ConfusionMatrix",
    "l2_distance",
    "mse",
    "psnr",
    "ssim",
    "lpips",
    "vitscore",
    "confusion",
    "fcn_scores",
    "segment_labels",
    "load_label_map",
    "save_label_map",
]


@dataclass(frozen=True)
class LabelMap:
    """Per-pixel class ids with an optional ignored id."""

    labels: np.ndarray
    num_classes: int
    ignore_id: int | None = None

    def __post_init__(self):
        lab = self.labels
        if lab.ndim != 2:
            raise ValueError(f"labels must be 2-D, got shape {lab.shape}")
        if not np.issubdtype(lab.dtype, np.integer):
            raise ValueError(f"labels must be integers, got {lab.dtype}")
        if self.num_classes < 1:
            raise ValueError("num_classes must be positive")
        scored = lab if self.ignore_id is None else lab[lab != self.ignore_id]
        if scored.size and (scored.min() < 0 or scored.max() >= self.num_classes):
            raise ValueError("label outside [0, num_classes) and not ignore_id")

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]


@dataclass(frozen=True)
class ConfusionMatrix:
    """counts[r][p] = pixels with reference class r predicted as p."""

    counts: np.ndarray

    def __post_init__(self):
        c = self.counts
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError(f"counts must be square, got {c.shape}")
        if c.min() < 0:
            raise ValueError("negative counts")

    @property
    def num_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def _check_same_shape(a: ImageBuffer, b: ImageBuffer) -> None:
    if a.data.shape != b.data.shape:
        raise ShapeMismatch(f"image shapes differ: {a.data.shape} vs {b.data.shape}")
    if a.scale != b.scale:
        raise ShapeMismatch(f"scale tags differ: {a.scale} vs {b.scale}")


def mse(a: ImageBuffer, b: ImageBuffer) -> float:
    """Mean squared pixel difference in native units."""
    _check_same_shape(a, b)
    diff = a.data.astype(np.float64) - b.data.astype(np.float64)
    return float(np.mean(diff * diff, dtype=np.float64))


def l2_distance(a: ImageBuffer, b: ImageBuffer) -> float:
    """Root-mean-square pixel difference in native units."""
    return math.sqrt(mse(a, b))


def psnr(a: ImageBuffer, b: ImageBuffer, peak: float | None = None) -> float:
    """10*log10(peak^2 / mse); +inf when the images are identical."""
    if peak is None:
        peak = 255.0 if a.scale == "uint8" else 1.0
    if peak <= 0:
        raise ValueError("peak must be positive")
    err = mse(a, b)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / err)


def _gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    half = size // 2
    g = np.exp(-((np.arange(size, dtype=np.float64) - half) ** 2) / (2.0 * sigma * sigma))
    return g / g.sum()


def _valid_windowed(plane: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Separable valid-mode correlation of a 2-D plane with kernel x kernel."""
    size = kernel.size
    win_rows = np.lib.stride_tricks.sliding_window_view(plane, size, axis=0)
    rows = win_rows @ kernel
    win_cols = np.lib.stride_tricks.sliding_window_view(rows, size, axis=1)
    return win_cols @ kernel


def ssim(a: ImageBuffer, b: ImageBuffer) -> float:
    """Mean structural similarity over valid 11x11 Gaussian windows.

    Computed per channel and averaged; the dynamic range follows the
    scale tag (255 or 1.0).
    """
    _check_same_shape(a, b)
    if min(a.height, a.width) < SSIM_WINDOW:
        raise ImageTooSmall(f"ssim needs at least {SSIM_WINDOW}px per side")
    dynamic_range = 255.0 if a.scale == "uint8" else 1.0
    c1 = (SSIM_K1 * dynamic_range) ** 2
    c2 = (SSIM_K2 * dynamic_range) ** 2
    kernel = _gaussian_kernel(SSIM_WINDOW, SSIM_SIGMA)

    channel_means = []
    for c in range(a.channels):
        x = a.data[:, :, c].astype(np.float64)
        y = b.data[:, :, c].astype(np.float64)
        mu_x = _valid_windowed(x, kernel)
        mu_y = _valid_windowed(y, kernel)
        var_x = _valid_windowed(x * x, kernel) - mu_x * mu_x
        var_y = _valid_windowed(y * y, kernel) - mu_y * mu_y
        cov = _valid_windowed(x * y, kernel) - mu_x * mu_y
        num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
        den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
        channel_means.append(float(np.mean(num / den, dtype=np.float64)))
    return float(np.mean(channel_means, dtype=np.float64))


# --- model-backed metrics ---------------------------------------------------

_lpips_sessions: dict[str, object] = {}
_lpips_lock = threading.Lock()


def _lpips_session(model_path: Path):
    try:
        import onnxruntime  # noqa: PLC0415 - optional backend
    except ImportError as exc:
        raise BackendUnavailable(
            "onnxruntime is not installed; install the 'onnx' extra to run LPIPS"
        ) from exc
    if not model_path.is_file():
        raise BackendUnavailable(f"model file not found: {model_path}")
    key = str(model_path.resolve())
    with _lpips_lock:
        if key not in _lpips_sessions:
            _lpips_sessions[key] = onnxruntime.InferenceSession(
                key, providers=["CPUExecutionProvider"]
            )
        return _lpips_sessions[key]


def _to_pm1_tensor(img: ImageBuffer, size: int = 256) -> np.ndarray:
    resized = resize_bilinear(img if img.channels == 3 else ImageBuffer(
        np.repeat(img.data, 3, axis=2)
    ), size, size)
    if resized.scale == "uint8":
        px = resized.data.astype(np.float32) / 255.0
    else:
        px = resized.data.astype(np.float32)
    px = px * 2.0 - 1.0
    return np.transpose(px, (2, 0, 1))[None, ...]


def lpips(spec: EncoderSpec, a: ImageBuffer, b: ImageBuffer) -> float:
    """Perceptual distance from an exported two-image distance graph.

    Contract: inputs "image_a"/"image_b" float32 [1,3,256,256] in
    [-1, 1]; output "distance" float32 [1].
    """
    if spec.kind != "onnx-model":
        raise BackendUnavailable("lpips requires an onnx-model encoder spec")
    _check_same_shape(a, b)
    session = _lpips_session(spec.model_path)
    (out,) = session.run(
        ["distance"], {"image_a": _to_pm1_tensor(a), "image_b": _to_pm1_tensor(b)}
    )
    out = np.asarray(out).reshape(-1)
    if out.shape != (1,):
        raise ShapeMismatch(f"lpips graph emitted shape {np.asarray(out).shape}, want [1]")
    return float(out[0])


def vitscore(spec: EncoderSpec, a: ImageBuffer, b: ImageBuffer) -> ScoreResult:
    """Spatial cosine similarity over a classifier encoder's patch grid.

    Identical math to the segmentation-encoder score; only the backend
    differs (expected grid 768x14x14 for the exported classifier).
    """
    ea = embed(spec, a)
    eb = embed(spec, b)
    return samscore(ea, eb, meta={"metric": "vitscore", "encoder": spec.kind})


# --- segmentation scoring ---------------------------------------------------


def confusion(gt: LabelMap, pred: LabelMap) -> ConfusionMatrix:
    """Pixel confusion counts, skipping gt pixels labeled ignore_id."""
    if gt.labels.shape != pred.labels.shape:
        raise ShapeMismatch(f"label shapes differ: {gt.labels.shape} vs {pred.labels.shape}")
    if gt.num_classes != pred.num_classes:
        raise ClassCountMismatch(f"{gt.num_classes} vs {pred.num_classes} classes")
    k = gt.num_classes
    g = gt.labels.ravel().astype(np.int64)
    p = pred.labels.ravel().astype(np.int64)
    if gt.ignore_id is not None:
        keep = g != gt.ignore_id
        g = g[keep]
        p = p[keep]
    counts = np.bincount(g * k + p, minlength=k * k).reshape(k, k)
    return ConfusionMatrix(counts)


def fcn_scores(cm: ConfusionMatrix) -> tuple[float, float]:
    """(per-pixel accuracy, mean class IoU) from a confusion matrix.

    IoU is averaged over classes present in reference or prediction;
    classes absent from both are excluded rather than counted as free
    wins.
    """
    if cm.total == 0:
        raise EmptyMatrix("confusion matrix holds no scorable pixels")
    counts = cm.counts.astype(np.float64)
    diag = np.diag(counts)
    acc = float(diag.sum() / counts.sum())
    union = counts.sum(axis=0) + counts.sum(axis=1) - diag
    present = union > 0
    iou = float(np.mean(diag[present] / union[present]))
    return acc, iou


def segment_labels(spec: EncoderSpec, img: ImageBuffer, num_classes: int | None = None,
                   ignore_id: int | None = None) -> LabelMap:
    """Run an exported segmenter graph and argmax its logits.

    Contract: input "image" float32 [1,3,Hs,Ws] normalized per the
    exporter's metadata; output "logits" float32 [1,K,Hs,Ws].
    """
    if spec.kind != "onnx-model":
        raise BackendUnavailable("segmenter requires an onnx-model encoder spec")
    from .encoders import _get_session  # shared session cache

    session = _get_session(spec.model_path)
    meta = session.metadata
    from .encoders import SAM_INPUT_SIZE, SAM_PIXEL_MEAN, SAM_PIXEL_STD

    tensor = preprocess(
        img,
        int(meta.get("input_size", SAM_INPUT_SIZE)),
        tuple(meta.get("mean", SAM_PIXEL_MEAN)),
        tuple(meta.get("std", SAM_PIXEL_STD)),
        tuple(meta.get("value_range", (0.0, 255.0))),
    )
    logits = session.run(tensor, output_name="logits")
    if logits.ndim != 4 or logits.shape[0] != 1:
        raise ShapeMismatch(f"segmenter emitted shape {logits.shape}, want [1,K,H,W]")
    if num_classes is not None and logits.shape[1] != num_classes:
        raise ClassCountMismatch(f"segmenter has {logits.shape[1]} classes, expected {num_classes}")
    labels = np.argmax(logits[0], axis=0).astype(np.int32)
    return LabelMap(labels, num_classes=logits.shape[1], ignore_id=ignore_id)


def load_label_map(path, num_classes: int, ignore_id: int | None = None) -> LabelMap:
    """Read a single-channel PNG whose pixel values are class ids."""
    img = load_image(path)
    if img.channels != 1:
        raise ShapeMismatch(f"{path}: label maps must be single-channel")
    return LabelMap(img.data[:, :, 0].astype(np.int32), num_classes, ignore_id)


def save_label_map(labels: LabelMap, path) -> None:
    if labels.num_classes > 256:
        raise ValueError("PNG label maps support at most 256 classes")
    save_image(ImageBuffer(labels.labels.astype(np.uint8)[:, :, None]), path)
