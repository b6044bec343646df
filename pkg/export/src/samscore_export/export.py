"""ONNX graph export with pinned opsets and sidecar metadata.

``export_model`` writes ``<model_id>.onnx`` plus ``<model_id>.json``
(preprocessing constants, I/O names, opset) next to it. Any exporter
problem, including a missing onnx/onnxscript installation or an invalid
opset, surfaces as ExportFailure with the underlying diagnostic.
"""

from __future__ import annotations

import importlib.util
import json
from pathlib import Path

import torch

from .errors import ExportFailure
from .models import build_model
from .recipes import ExportRecipe


def exporter_available() -> bool:
    """True when torch.onnx can serialize graphs in this environment."""
    return importlib.util.find_spec("onnx") is not None


def export_model(recipe: ExportRecipe, out_dir: str | Path, model: torch.nn.Module | None = None) -> Path:
    """Export the recipe's model; returns the .onnx path.

    The graph is checked with onnx.checker when the onnx package is
    importable. Metadata JSON is written only after a successful export.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    onnx_path = out_dir / f"{recipe.model_id}.onnx"

    if model is None:
        model = build_model(recipe)
    dummies = tuple(torch.zeros(shape) for shape in recipe.input_shapes)
    try:
        torch.onnx.export(
            model,
            dummies if len(dummies) > 1 else dummies[0],
            str(onnx_path),
            input_names=list(recipe.input_names),
            output_names=list(recipe.output_names),
            opset_version=recipe.opset,
            do_constant_folding=True,
            dynamo=False,
        )
    except Exception as exc:
        raise ExportFailure(f"{recipe.model_id}: torch.onnx export failed: {exc}") from exc

    try:
        import onnx

        onnx.checker.check_model(str(onnx_path))
    except ImportError:
        pass  # runtime-gated; the parity check still guards correctness
    except Exception as exc:
        raise ExportFailure(f"{recipe.model_id}: exported graph failed validation: {exc}") from exc

    (out_dir / f"{recipe.model_id}.json").write_text(
        json.dumps(recipe.metadata(), indent=2, sort_keys=True) + "\n"
    )
    return onnx_path
