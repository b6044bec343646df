"""Exporters producing the ONNX graphs and golden fixtures the scoring
toolkit consumes: the segmentation-foundation-model image encoder, a
classifier ViT patch-grid encoder, an LPIPS distance graph, and a
semantic segmenter."""

from .errors import ExportError, ExportFailure, ParityFailure
from .export import export_model, exporter_available
from .models import build_model
from .parity import (
    assert_parity,
    check_parity,
    emit_parity_fixture,
    max_abs_divergence,
    runtime_available,
    synthetic_input,
)
from .recipes import (
    ALL_RECIPES,
    ExportRecipe,
    lpips_recipe,
    sam_vitl_recipe,
    segmenter_recipe,
    vit_recipe,
)

__all__ = [
    "ALL_RECIPES",
    "ExportError",
    "ExportFailure",
    "ExportRecipe",
    "ParityFailure",
    "assert_parity",
    "build_model",
    "check_parity",
    "emit_parity_fixture",
    "export_model",
    "exporter_available",
    "lpips_recipe",
    "max_abs_divergence",
    "runtime_available",
    "sam_vitl_recipe",
    "segmenter_recipe",
    "synthetic_input",
    "vit_recipe",
]
