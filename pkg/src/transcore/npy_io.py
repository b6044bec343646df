"""Portable float32 tensor interchange in the NPY v1.0 container.

Only the strict subset the toolkit exchanges is accepted: magic
``\\x93NUMPY`` + version 1.0, dtype descriptor ``'<f4'``,
``fortran_order: False``, and a payload whose length matches the header
shape exactly. Anything else raises a typed error instead of being
coerced, so embeddings and golden fixtures survive a round trip
bit-exactly on every platform.
"""

from __future__ import annotations

import ast
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import IoError, MalformedFile, UnsupportedByteOrder, UnsupportedDtype

_MAGIC = b"\x93NUMPY"
_VERSION = b"\x01\x00"
_HEADER_ALIGN = 64

__all__ = ["TensorF32", "read_tensor_file", "write_tensor_file"]


@dataclass(frozen=True)
class TensorF32:
    """Dense row-major float32 tensor."""

    data: np.ndarray

    def __post_init__(self):
        arr = self.data
        if arr.dtype != np.float32:
            raise ValueError(f"TensorF32 requires float32 data, got {arr.dtype}")
        if arr.ndim < 1 or any(d < 1 for d in arr.shape):
            raise ValueError(f"shape must be non-empty with positive dims, got {arr.shape}")
        if not arr.flags.c_contiguous:
            object.__setattr__(self, "data", np.ascontiguousarray(arr))

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.data.shape)


def _build_header(shape: tuple[int, ...]) -> bytes:
    dict_src = "{'descr': '<f4', 'fortran_order': False, 'shape': %s, }" % (
        repr(tuple(int(d) for d in shape)),
    )
    base = len(_MAGIC) + len(_VERSION) + 2  # magic + version + u16 header length
    pad = _HEADER_ALIGN - ((base + len(dict_src) + 1) % _HEADER_ALIGN)
    header = dict_src + " " * (pad % _HEADER_ALIGN) + "\n"
    return _MAGIC + _VERSION + struct.pack("<H", len(header)) + header.encode("ascii")


def write_tensor_file(path: str | Path, tensor: TensorF32) -> None:
    """Write a tensor as NPY v1.0 (little-endian float32, C order)."""
    payload = tensor.data.astype("<f4", copy=False).tobytes(order="C")
    try:
        Path(path).write_bytes(_build_header(tensor.shape) + payload)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def read_tensor_file(path: str | Path) -> TensorF32:
    """Read an NPY v1.0 little-endian float32 tensor, validating strictly."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc

    if len(raw) < len(_MAGIC) + 2 + 2 or raw[: len(_MAGIC)] != _MAGIC:
        raise MalformedFile(f"{path}: missing NPY magic")
    version = raw[6:8]
    if version != _VERSION:
        raise MalformedFile(f"{path}: unsupported NPY version {version!r} (want 1.0)")
    (header_len,) = struct.unpack("<H", raw[8:10])
    header_end = 10 + header_len
    if len(raw) < header_end:
        raise MalformedFile(f"{path}: truncated header")
    try:
        header = ast.literal_eval(raw[10:header_end].decode("ascii").strip())
    except (ValueError, SyntaxError, UnicodeDecodeError) as exc:
        raise MalformedFile(f"{path}: unparseable header: {exc}") from exc
    if not isinstance(header, dict) or set(header) != {"descr", "fortran_order", "shape"}:
        raise MalformedFile(f"{path}: header keys {sorted(header) if isinstance(header, dict) else header}")

    descr = header["descr"]
    if not isinstance(descr, str):
        raise MalformedFile(f"{path}: non-string dtype descriptor")
    if descr != "<f4":
        if descr.endswith("f4") and descr[:1] in (">", "=", "|"):
            raise UnsupportedByteOrder(f"{path}: dtype {descr!r} is not little-endian")
        raise UnsupportedDtype(f"{path}: dtype {descr!r} (only '<f4' is supported)")
    if header["fortran_order"] is not False:
        raise MalformedFile(f"{path}: fortran_order must be False")
    shape = header["shape"]
    if (
        not isinstance(shape, tuple)
        or len(shape) < 1
        or not all(isinstance(d, int) and d >= 1 for d in shape)
    ):
        raise MalformedFile(f"{path}: bad shape {shape!r}")

    expected = 4 * int(np.prod(shape))
    payload = raw[header_end:]
    if len(payload) != expected:
        raise MalformedFile(
            f"{path}: payload is {len(payload)} bytes but shape {shape} needs {expected}"
        )
    arr = np.frombuffer(payload, dtype="<f4").reshape(shape).astype(np.float32, copy=True)
    return TensorF32(arr)
