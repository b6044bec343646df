"""Spatial cosine similarity between encoder embedding maps.

Two (C, H, W) embedding maps are compared fiber-wise: the score at grid
position (h, w) is the cosine of the angle between the two C-vectors
there, and the overall score is the arithmetic mean over all positions.
Zero-norm fibers get fixed semantics: two blank fibers count as a
perfect match (1.0), a blank against structure counts as a full
mismatch (0.0), so an image scored against itself is exactly 1 even in
featureless regions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .encoders import EmbeddingMap
from .errors import IoError, LengthMismatch, ShapeMismatch
from .image_io import ImageBuffer, save_image

DEFAULT_EPS = 1e-12

__all__ = ["SimilarityMap", "ScoreResult", "cosine", "similarity_map", "samscore", "render_heatmap"]


@dataclass(frozen=True)
class SimilarityMap:
    """H x W grid of per-position cosine similarities in [-1, 1]."""

    values: np.ndarray

    def __post_init__(self):
        v = self.values
        if v.ndim != 2:
            raise ValueError(f"similarity map must be 2-D, got shape {v.shape}")
        if v.dtype != np.float32:
            object.__setattr__(self, "values", v.astype(np.float32))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class ScoreResult:
    score: float
    map: SimilarityMap
    meta: dict = field(default_factory=dict)


def cosine(u, v, eps: float = DEFAULT_EPS) -> float:
    """Cosine similarity of two equal-length vectors.

    Both norms below eps -> 1.0; exactly one below eps -> 0.0.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    ua = np.asarray(u, dtype=np.float64).ravel()
    va = np.asarray(v, dtype=np.float64).ravel()
    if ua.size != va.size:
        raise LengthMismatch(f"vector lengths differ: {ua.size} vs {va.size}")
    if ua.size == 0:
        raise LengthMismatch("vectors must have length >= 1")
    nu = math.sqrt(float(np.dot(ua, ua)))
    nv = math.sqrt(float(np.dot(va, va)))
    if nu < eps and nv < eps:
        return 1.0
    if nu < eps or nv < eps:
        return 0.0
    return float(np.dot(ua, va)) / (nu * nv)


def _similarity_values(x: EmbeddingMap, y: EmbeddingMap, eps: float) -> np.ndarray:
    if x.shape != y.shape:
        raise ShapeMismatch(f"embedding shapes differ: {x.shape} vs {y.shape}")
    xd = x.data.astype(np.float64)
    yd = y.data.astype(np.float64)
    num = np.einsum("chw,chw->hw", xd, yd)
    nx = np.sqrt(np.einsum("chw,chw->hw", xd, xd))
    ny = np.sqrt(np.einsum("chw,chw->hw", yd, yd))
    x_blank = nx < eps
    y_blank = ny < eps
    denom = nx * ny
    denom[x_blank | y_blank] = 1.0  # placeholder, overwritten below
    values = num / denom
    values[x_blank | y_blank] = 0.0
    values[x_blank & y_blank] = 1.0
    return values


def similarity_map(x: EmbeddingMap, y: EmbeddingMap, eps: float = DEFAULT_EPS) -> SimilarityMap:
    """Per-position cosine similarity of two (C, H, W) embedding maps."""
    return SimilarityMap(_similarity_values(x, y, eps).astype(np.float32))


def samscore(
    x: EmbeddingMap,
    y: EmbeddingMap,
    eps: float = DEFAULT_EPS,
    meta: dict | None = None,
) -> ScoreResult:
    """Mean spatial cosine similarity plus the underlying map.

    The mean is accumulated in float64 so it is reproducible to ~1e-12
    regardless of how the per-position work was scheduled.
    """
    values = _similarity_values(x, y, eps)
    score = float(values.sum(dtype=np.float64) / values.size)
    return ScoreResult(score=score, map=SimilarityMap(values.astype(np.float32)), meta=dict(meta or {}))


def render_heatmap(sim: SimilarityMap, out_path: str | Path) -> None:
    """Write the map as a grayscale PNG, [-1, 1] mapped linearly to [0, 255].

    Brighter pixels mean higher similarity; the midpoint 0 rounds
    half-up to 128.
    """
    v = np.clip(sim.values.astype(np.float64), -1.0, 1.0)
    gray = np.floor((v + 1.0) * 0.5 * 255.0 + 0.5).astype(np.uint8)
    try:
        save_image(ImageBuffer(gray[:, :, None]), out_path)
    except OSError as exc:
        raise IoError(f"cannot write heatmap {out_path}: {exc}") from exc
