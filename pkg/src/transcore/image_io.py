"""Raster image decoding, encoding, and resampling.

Images are carried as ``ImageBuffer``: an (H, W, C) array that is either
8-bit integer in [0, 255] or float32 in [0, 1], with the dtype acting as
the scale tag. Decoding is PNG-only and lossless; resampling is plain
bilinear with half-pixel-centered sampling (align_corners=false) and
edge replication, so a scalar reference implementation can check it
pixel for pixel.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import IoError, MalformedFile, UnsupportedPixelFormat

__all__ = [
    "ImageBuffer",
    "decode_png",
    "encode_png",
    "load_image",
    "save_image",
    "resize_bilinear",
    "sample_bilinear",
]


@dataclass(frozen=True)
class ImageBuffer:
    """Decoded raster image, (H, W, C) with C in {1, 3}."""

    data: np.ndarray

    def __post_init__(self):
        arr = self.data
        if arr.ndim != 3 or arr.shape[2] not in (1, 3):
            raise ValueError(f"expected (H, W, 1|3) array, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"empty image: shape {arr.shape}")
        if arr.dtype == np.uint8:
            pass
        elif arr.dtype == np.float32:
            if arr.size and (float(arr.min()) < 0.0 or float(arr.max()) > 1.0):
                raise ValueError("float-tagged pixels must lie in [0, 1]")
        else:
            raise ValueError(f"pixel dtype must be uint8 or float32, got {arr.dtype}")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def scale(self) -> str:
        """Scale tag: "uint8" for [0,255] integers, "float" for [0,1] floats."""
        return "uint8" if self.data.dtype == np.uint8 else "float"

    def to_float(self) -> "ImageBuffer":
        """Same pixels rescaled to the float [0, 1] tag."""
        if self.scale == "float":
            return self
        return ImageBuffer((self.data.astype(np.float32) / 255.0).clip(0.0, 1.0))

    def to_uint8(self) -> "ImageBuffer":
        """Same pixels quantized to the 8-bit tag (round half-up)."""
        if self.scale == "uint8":
            return self
        scaled = np.floor(self.data.astype(np.float64) * 255.0 + 0.5)
        return ImageBuffer(np.clip(scaled, 0, 255).astype(np.uint8))

    def pixel_bytes(self) -> bytes:
        """Canonical byte view of (dims, tag, pixels), used for cache keys."""
        head = f"{self.height}x{self.width}x{self.channels}:{self.scale}:".encode()
        return head + np.ascontiguousarray(self.data).tobytes()


def _from_pil(img: Image.Image) -> ImageBuffer:
    mode = img.mode
    if mode in ("L", "RGB"):
        converted = img
    elif mode == "LA":
        converted = img.convert("L")
    elif mode == "RGBA":
        converted = img.convert("RGB")
    elif mode == "P":
        if "transparency" in img.info:
            raise UnsupportedPixelFormat("palette PNG with transparency chunk")
        converted = img.convert("RGB")
    else:
        raise UnsupportedPixelFormat(f"unsupported PNG mode {mode!r} (want 8-bit gray/RGB)")
    arr = np.asarray(converted, dtype=np.uint8)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    return ImageBuffer(arr)


def decode_png(data: bytes) -> ImageBuffer:
    """Decode a PNG byte stream into an integer-tagged buffer.

    Grayscale stays single-channel; alpha channels are dropped. Raises
    MalformedFile for undecodable streams and UnsupportedPixelFormat
    for depths/modes outside 8-bit gray/RGB.
    """
    try:
        img = Image.open(io.BytesIO(data))
        if img.format != "PNG":
            raise MalformedFile(f"not a PNG stream (decoded as {img.format})")
        img.load()
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise MalformedFile(f"undecodable PNG stream: {exc}") from exc
    return _from_pil(img)


def encode_png(img: ImageBuffer) -> bytes:
    """Encode an integer-tagged buffer as a PNG byte stream (lossless)."""
    if img.scale != "uint8":
        raise ValueError("encode_png expects an 8-bit buffer; call to_uint8() first")
    arr = img.data[:, :, 0] if img.channels == 1 else img.data
    pil = Image.fromarray(arr, mode="L" if img.channels == 1 else "RGB")
    buf = io.BytesIO()
    pil.save(buf, format="PNG")
    return buf.getvalue()


def load_image(path: str | Path) -> ImageBuffer:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    return decode_png(data)


def save_image(img: ImageBuffer, path: str | Path) -> None:
    try:
        Path(path).write_bytes(encode_png(img))
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _axis_weights(n_in: int, n_out: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Half-pixel-centered source indices and fractional weights for one axis."""
    centers = (np.arange(n_out, dtype=np.float64) + 0.5) * (n_in / n_out) - 0.5
    lo = np.floor(centers)
    frac = centers - lo
    i0 = np.clip(lo, 0, n_in - 1).astype(np.intp)
    i1 = np.clip(lo + 1, 0, n_in - 1).astype(np.intp)
    return i0, i1, frac


def resize_bilinear(img: ImageBuffer, out_h: int, out_w: int) -> ImageBuffer:
    """Resample to (out_h, out_w) with half-pixel-centered bilinear weights.

    Weights are convex, so output values never overshoot the input range.
    The output carries the input's scale tag; 8-bit results are rounded
    half-up.
    """
    if out_h < 1 or out_w < 1:
        raise ValueError(f"output size must be positive, got {out_h}x{out_w}")
    if (out_h, out_w) == (img.height, img.width):
        return ImageBuffer(img.data.copy())

    src = img.data.astype(np.float64)
    y0, y1, wy = _axis_weights(img.height, out_h)
    x0, x1, wx = _axis_weights(img.width, out_w)

    rows0 = src[y0]
    rows1 = src[y1]
    wy = wy[:, None, None]
    wx = wx[None, :, None]
    top = rows0[:, x0] * (1.0 - wx) + rows0[:, x1] * wx
    bot = rows1[:, x0] * (1.0 - wx) + rows1[:, x1] * wx
    out = top * (1.0 - wy) + bot * wy

    if img.scale == "uint8":
        return ImageBuffer(np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8))
    return ImageBuffer(np.clip(out, 0.0, 1.0).astype(np.float32))


def sample_bilinear(data: np.ndarray, ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Bilinear samples of an (H, W, C) float array at scattered points.

    Out-of-bounds coordinates replicate the nearest edge value. ``ys``
    and ``xs`` may have any (matching) shape; the result gains a
    trailing channel axis.
    """
    h, w = data.shape[:2]
    y0 = np.floor(ys)
    x0 = np.floor(xs)
    wy = (ys - y0)[..., None]
    wx = (xs - x0)[..., None]
    y0i = np.clip(y0, 0, h - 1).astype(np.intp)
    y1i = np.clip(y0 + 1, 0, h - 1).astype(np.intp)
    x0i = np.clip(x0, 0, w - 1).astype(np.intp)
    x1i = np.clip(x0 + 1, 0, w - 1).astype(np.intp)
    top = data[y0i, x0i] * (1.0 - wx) + data[y0i, x1i] * wx
    bot = data[y1i, x0i] * (1.0 - wx) + data[y1i, x1i] * wx
    return top * (1.0 - wy) + bot * wy
