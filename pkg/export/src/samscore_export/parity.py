"""Golden parity fixtures and the dual-forward check.

A fixture is a directory holding the graph-contract input tensors, the
source-framework (torch) output, and a small JSON descriptor:

    <model_id>/
      input.npy | input_a.npy, input_b.npy
      expected.npy
      fixture.json      {model_id, tolerance, input_files, parity_checked}

Tensors are NPY v1.0 little-endian float32, so the scoring toolkit
reads them bit-exactly. The dual-forward check compares the exported
graph's output against expected.npy with a max-abs tolerance; it runs
whenever onnxruntime is importable and raises ParityFailure on
divergence.
"""

from __future__ import annotations

import importlib.util
import json
from pathlib import Path

import numpy as np
import torch

from .errors import ParityFailure
from .recipes import ExportRecipe

DEFAULT_TOLERANCE = 1e-3


def runtime_available() -> bool:
    return importlib.util.find_spec("onnxruntime") is not None


def synthetic_input(recipe: ExportRecipe, index: int = 0) -> np.ndarray:
    """Deterministic image-like tensor matching one graph input.

    A closed-form pattern (crossed waves plus a soft disk), scaled to the
    recipe's value range and standardized with its mean/std, so fixtures
    are reproducible without any RNG state.
    """
    _, c, h, w = recipe.input_shapes[index]
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    base = 0.5 + 0.2 * np.sin(2.0 * np.pi * (xx / 17.0 + index * 0.25))
    base += 0.15 * np.cos(2.0 * np.pi * yy / 23.0)
    disk = ((yy - h / 3.0) ** 2 + (xx - w / 2.5) ** 2) < (min(h, w) / 4.0) ** 2
    base = np.where(disk, base * 0.4 + 0.5, base)
    base = np.clip(base, 0.0, 1.0)
    channels = [np.clip(base * (0.8 + 0.2 * k), 0.0, 1.0) for k in range(c)]
    img = np.stack(channels, axis=0)

    lo, hi = recipe.value_range
    img = lo + img * (hi - lo)
    mean = np.asarray(recipe.mean, dtype=np.float64).reshape(c, 1, 1)
    std = np.asarray(recipe.std, dtype=np.float64).reshape(c, 1, 1)
    return ((img - mean) / std)[None, ...].astype(np.float32)


def max_abs_divergence(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ParityFailure(f"output shapes differ: {a.shape} vs {b.shape}")
    return float(np.max(np.abs(a - b))) if a.size else 0.0


def assert_parity(expected: np.ndarray, actual: np.ndarray, tolerance: float, what: str) -> float:
    divergence = max_abs_divergence(expected, actual)
    if not np.isfinite(divergence) or divergence > tolerance:
        raise ParityFailure(f"{what}: max-abs divergence {divergence:.3e} exceeds {tolerance:.1e}")
    return divergence


def _input_file_names(recipe: ExportRecipe) -> list[str]:
    if len(recipe.input_names) == 1:
        return ["input.npy"]
    return [f"input_{name.split('_')[-1]}.npy" for name in recipe.input_names]


def emit_parity_fixture(
    recipe: ExportRecipe,
    model: torch.nn.Module,
    out_dir: str | Path,
    onnx_path: str | Path | None = None,
    tolerance: float = DEFAULT_TOLERANCE,
) -> Path:
    """Write a fixture from the source-framework forward pass.

    When ``onnx_path`` is given and onnxruntime is importable, the
    exported graph is run on the same inputs and must agree within
    ``tolerance``; the fixture records whether that check ran.
    """
    fixture_dir = Path(out_dir) / recipe.model_id
    fixture_dir.mkdir(parents=True, exist_ok=True)

    inputs = [synthetic_input(recipe, i) for i in range(len(recipe.input_names))]
    with torch.no_grad():
        out = model(*[torch.from_numpy(arr) for arr in inputs])
    expected = out.numpy().astype(np.float32)
    if expected.ndim == 1:
        expected = expected.reshape(-1)

    input_files = _input_file_names(recipe)
    for file_name, arr in zip(input_files, inputs):
        np.save(fixture_dir / file_name, arr)
    np.save(fixture_dir / "expected.npy", expected)

    parity_checked = False
    divergence = None
    if onnx_path is not None and runtime_available():
        divergence = check_parity(fixture_dir, onnx_path, recipe, tolerance)
        parity_checked = True

    (fixture_dir / "fixture.json").write_text(
        json.dumps(
            {
                "model_id": recipe.model_id,
                "tolerance": tolerance,
                "input_names": list(recipe.input_names),
                "input_files": input_files,
                "expected_file": "expected.npy",
                "parity_checked": parity_checked,
                "max_abs_divergence": divergence,
            },
            indent=2,
            sort_keys=True,
        )
        + "\n"
    )
    return fixture_dir


def check_parity(
    fixture_dir: str | Path,
    onnx_path: str | Path,
    recipe: ExportRecipe,
    tolerance: float = DEFAULT_TOLERANCE,
) -> float:
    """Run the exported graph on the fixture inputs; ParityFailure on divergence."""
    try:
        import onnxruntime
    except ImportError as exc:
        raise ParityFailure("onnxruntime is not installed; cannot run the exported graph") from exc

    fixture_dir = Path(fixture_dir)
    inputs = {
        name: np.load(fixture_dir / file_name)
        for name, file_name in zip(recipe.input_names, _input_file_names(recipe))
    }
    expected = np.load(fixture_dir / "expected.npy")
    session = onnxruntime.InferenceSession(str(onnx_path), providers=["CPUExecutionProvider"])
    (actual,) = session.run([recipe.output_names[0]], inputs)
    return assert_parity(expected, np.asarray(actual).reshape(expected.shape), tolerance, recipe.model_id)
