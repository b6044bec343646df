"""Seeded, controlled image perturbations for sensitivity sweeps.

Three families, all bit-reproducible from (input, spec):

* piecewise affine — a rows x cols control grid at cell centers is
  jittered with i.i.d. Gaussian displacements (sigma = degree * min
  dimension); each grid cell splits into two fixed triangles and every
  output pixel samples the input at the exact affine image of its
  position under its triangle's (regular -> displaced) vertex map.
* gaussian noise — additive zero-mean N(0, variance) per pixel on the
  0-255 scale, clamped and rounded half-up.
* color jitter — brightness, contrast, saturation factors plus hue
  rotation applied in the fixed order B -> C -> S -> H, each stage
  clamped to the valid range.

Degree 0 short-circuits to a bit-identical copy for every family.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GrayscaleUnsupported, ImageTooSmall
from .image_io import ImageBuffer, sample_bilinear
from .rng import RngStream

KINDS = ("piecewise-affine", "gaussian-noise", "color-jitter")

_LUMA = np.array([0.299, 0.587, 0.114], dtype=np.float64)

__all__ = ["DistortionSpec", "apply_distortion", "piecewise_affine", "gaussian_noise", "color_jitter", "KINDS"]


@dataclass(frozen=True)
class DistortionSpec:
    kind: str
    degree: float
    seed: int
    grid_rows: int = 4
    grid_cols: int = 4

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown distortion kind {self.kind!r}")
        if self.degree < 0:
            raise ValueError("degree must be non-negative")
        if self.kind == "piecewise-affine" and self.degree > 0.1:
            raise ValueError("piecewise-affine degree must lie in [0, 0.1]")
        if self.kind == "gaussian-noise" and self.degree > 10000:
            raise ValueError("noise variance must lie in [0, 10000]")
        if self.grid_rows < 2 or self.grid_cols < 2:
            raise ValueError("grid must have at least 2 rows and 2 cols")


def apply_distortion(img: ImageBuffer, spec: DistortionSpec, deterministic: bool = False) -> ImageBuffer:
    if spec.kind == "piecewise-affine":
        return piecewise_affine(img, spec.degree, spec.seed, spec.grid_rows, spec.grid_cols)
    if spec.kind == "gaussian-noise":
        return gaussian_noise(img, spec.degree, spec.seed)
    return color_jitter(img, spec.degree, spec.seed, deterministic=deterministic)


def _quantize_like(img: ImageBuffer, values: np.ndarray) -> ImageBuffer:
    if img.scale == "uint8":
        return ImageBuffer(np.clip(np.floor(values + 0.5), 0, 255).astype(np.uint8))
    return ImageBuffer(np.clip(values, 0.0, 1.0).astype(np.float32))


def piecewise_affine(
    img: ImageBuffer, degree: float, seed: int, rows: int = 4, cols: int = 4
) -> ImageBuffer:
    """Warp by jittering a rows x cols control grid of cell centers.

    Displacements are drawn row-major, (dy, dx) per point, from a fresh
    seeded stream with sigma = degree * min(H, W). Each grid quad is
    split along its TL-BR diagonal; an output pixel picks its triangle
    by position in the regular grid (clamped to the border cells beyond
    it) and samples the input bilinearly at the affine image of its
    coordinates, replicating edges for out-of-bounds samples.
    """
    h, w = img.height, img.width
    if h < rows or w < cols:
        raise ImageTooSmall(f"need at least {rows}x{cols} pixels, got {h}x{w}")
    if degree == 0.0:
        return ImageBuffer(img.data.copy())

    sigma = degree * min(h, w)
    disp = RngStream(seed).normals(rows * cols * 2).reshape(rows, cols, 2) * sigma

    cell_h = h / rows
    cell_w = w / cols
    centers_y = -0.5 + (np.arange(rows) + 0.5) * cell_h
    centers_x = -0.5 + (np.arange(cols) + 0.5) * cell_w

    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    ci = np.clip(np.floor((yy - centers_y[0]) / cell_h), 0, rows - 2).astype(np.intp)
    cj = np.clip(np.floor((xx - centers_x[0]) / cell_w), 0, cols - 2).astype(np.intp)
    fy = (yy - centers_y[ci]) / cell_h
    fx = (xx - centers_x[cj]) / cell_w
    upper = fx >= fy  # TL-TR-BR triangle; else TL-BR-BL

    src_y = np.empty((h, w), dtype=np.float64)
    src_x = np.empty((h, w), dtype=np.float64)
    data = img.data.astype(np.float64)

    for i in range(rows - 1):
        for j in range(cols - 1):
            in_cell = (ci == i) & (cj == j)
            if not in_cell.any():
                continue
            for is_upper in (True, False):
                mask = in_cell & (upper if is_upper else ~upper)
                if not mask.any():
                    continue
                if is_upper:
                    tri = ((i, j), (i, j + 1), (i + 1, j + 1))
                else:
                    tri = ((i, j), (i + 1, j + 1), (i + 1, j))
                src_pts = np.array([(centers_y[r], centers_x[c]) for r, c in tri])
                dst_pts = np.array(
                    [
                        (centers_y[r] + disp[r, c, 0], centers_x[c] + disp[r, c, 1])
                        for r, c in tri
                    ]
                )
                # Affine (y, x, 1) @ M = (y', x') sending regular vertices
                # onto their displaced positions.
                a = np.column_stack([src_pts, np.ones(3)])
                m = np.linalg.solve(a, dst_pts)
                py = yy[mask]
                px = xx[mask]
                src_y[mask] = py * m[0, 0] + px * m[1, 0] + m[2, 0]
                src_x[mask] = py * m[0, 1] + px * m[1, 1] + m[2, 1]

    warped = sample_bilinear(data, src_y, src_x)
    return _quantize_like(img, warped)


def gaussian_noise(img: ImageBuffer, variance: float, seed: int) -> ImageBuffer:
    """Additive i.i.d. N(0, variance) on the 0-255 scale of an 8-bit image.

    The noise field is drawn in one call, flat C-order over (H, W, C);
    the sum is clamped to [0, 255] and rounded half-up.
    """
    if img.scale != "uint8":
        raise ValueError("gaussian_noise operates on 8-bit images")
    if variance < 0:
        raise ValueError("variance must be non-negative")
    if variance == 0.0:
        return ImageBuffer(img.data.copy())
    noise = RngStream(seed).normals(img.data.size).reshape(img.data.shape)
    noisy = img.data.astype(np.float64) + noise * np.sqrt(variance)
    return ImageBuffer(np.floor(np.clip(noisy, 0.0, 255.0) + 0.5).astype(np.uint8))


def _rgb_to_hsv(rgb: np.ndarray) -> np.ndarray:
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    maxc = np.max(rgb, axis=-1)
    minc = np.min(rgb, axis=-1)
    spread = maxc - minc
    v = maxc
    s = np.where(maxc > 0, spread / np.where(maxc > 0, maxc, 1.0), 0.0)

    safe = np.where(spread > 0, spread, 1.0)
    rc = (maxc - r) / safe
    gc = (maxc - g) / safe
    bc = (maxc - b) / safe
    h = np.where(r == maxc, bc - gc, np.where(g == maxc, 2.0 + rc - bc, 4.0 + gc - rc))
    h = np.where(spread > 0, (h / 6.0) % 1.0, 0.0)
    return np.stack([h, s, v], axis=-1)


def _hsv_to_rgb(hsv: np.ndarray) -> np.ndarray:
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    i = np.floor(h * 6.0)
    f = h * 6.0 - i
    i = i.astype(np.intp) % 6
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    choices = np.stack(
        [
            np.stack([v, t, p], axis=-1),
            np.stack([q, v, p], axis=-1),
            np.stack([p, v, t], axis=-1),
            np.stack([p, q, v], axis=-1),
            np.stack([t, p, v], axis=-1),
            np.stack([v, p, q], axis=-1),
        ],
        axis=0,
    )
    return np.take_along_axis(choices, i[None, ..., None], axis=0)[0]


def color_jitter(
    img: ImageBuffer, degree: float, seed: int, deterministic: bool = False
) -> ImageBuffer:
    """Brightness, contrast, saturation, and hue perturbation.

    Random mode draws four uniforms (order: brightness, contrast,
    saturation, hue): multiplicative factors ~ U[1-degree, 1+degree]
    and a hue rotation of 0.5*degree*u turns with u ~ U[-1, 1].
    Deterministic mode pins factors to 1+degree and the hue rotation to
    0.5*degree*0.5 turns, for single-valued comparison tables.

    Contrast pivots on the image's mean luminance, saturation on the
    per-pixel luminance, so constant images pass through the two stages
    unchanged. Each stage clamps to the valid range.
    """
    if img.channels != 3:
        raise GrayscaleUnsupported("color jitter requires a 3-channel image")
    if not 0.0 <= degree < 1.0:
        raise ValueError("degree must lie in [0, 1)")
    if degree == 0.0:
        return ImageBuffer(img.data.copy())

    if deterministic:
        f_b = f_c = f_s = 1.0 + degree
        hue_shift = 0.5 * degree * 0.5
    else:
        u = RngStream(seed).uniforms(4)
        f_b = 1.0 - degree + 2.0 * degree * u[0]
        f_c = 1.0 - degree + 2.0 * degree * u[1]
        f_s = 1.0 - degree + 2.0 * degree * u[2]
        hue_shift = 0.5 * degree * (2.0 * u[3] - 1.0)

    max_value = 255.0 if img.scale == "uint8" else 1.0
    px = img.data.astype(np.float64)

    px = np.clip(px * f_b, 0.0, max_value)

    mean_lum = float((px @ _LUMA).mean(dtype=np.float64))
    px = np.clip(mean_lum + (px - mean_lum) * f_c, 0.0, max_value)

    lum = (px @ _LUMA)[..., None]
    px = np.clip(lum + (px - lum) * f_s, 0.0, max_value)

    hsv = _rgb_to_hsv(px / max_value)
    hsv[..., 0] = (hsv[..., 0] + hue_shift) % 1.0
    px = np.clip(_hsv_to_rgb(hsv) * max_value, 0.0, max_value)

    return _quantize_like(img, px)
