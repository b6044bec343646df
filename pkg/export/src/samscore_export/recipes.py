"""Export recipes: everything needed to build, export, and verify one model.

A recipe pins the graph's I/O contract (names and shapes), the opset,
and the preprocessing constants that downstream consumers read from the
sibling metadata JSON. ``tiny=True`` swaps the full architecture for a
width/depth-reduced variant with the same I/O contract, so the export
and parity machinery can be exercised without pretrained weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

DEFAULT_OPSET = 17

# Pixel statistics published with the segmentation foundation model.
SAM_MEAN = (123.675, 116.28, 103.53)
SAM_STD = (58.395, 57.12, 57.375)

IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)


@dataclass(frozen=True)
class ExportRecipe:
    model_id: str
    input_names: tuple[str, ...]
    output_names: tuple[str, ...]
    input_shapes: tuple[tuple[int, ...], ...]
    output_shape: tuple[int, ...]
    mean: tuple[float, float, float]
    std: tuple[float, float, float]
    value_range: tuple[float, float]
    opset: int = DEFAULT_OPSET
    weights: Path | None = None
    tiny: bool = False
    extra: dict = field(default_factory=dict)

    @property
    def input_size(self) -> int:
        return self.input_shapes[0][-1]

    def metadata(self) -> dict:
        return {
            "model_id": self.model_id,
            "opset": self.opset,
            "mean": list(self.mean),
            "std": list(self.std),
            "value_range": list(self.value_range),
            "input_names": list(self.input_names),
            "output_names": list(self.output_names),
            "input_size": self.input_size,
            "output_shape": list(self.output_shape),
            "tiny": self.tiny,
        }


def sam_vitl_recipe(weights: Path | None = None, tiny: bool = False, opset: int = DEFAULT_OPSET) -> ExportRecipe:
    """Segmentation-foundation-model image encoder: 1024px in, 256x64x64 out."""
    return ExportRecipe(
        model_id="sam_vitl" if not tiny else "sam_tiny",
        input_names=("image",),
        output_names=("embedding",),
        input_shapes=((1, 3, 1024, 1024),),
        output_shape=(1, 256, 64, 64),
        mean=SAM_MEAN,
        std=SAM_STD,
        value_range=(0.0, 255.0),
        opset=opset,
        weights=weights,
        tiny=tiny,
    )


def vit_recipe(weights: Path | None = None, tiny: bool = False, opset: int = DEFAULT_OPSET) -> ExportRecipe:
    """Classifier ViT encoder: patch tokens reshaped to a 768x14x14 grid."""
    return ExportRecipe(
        model_id="vit_b16" if not tiny else "vit_tiny",
        input_names=("image",),
        output_names=("embedding",),
        input_shapes=((1, 3, 224, 224),),
        output_shape=(1, 768, 14, 14),
        mean=(0.5, 0.5, 0.5),
        std=(0.5, 0.5, 0.5),
        value_range=(0.0, 1.0),
        opset=opset,
        weights=weights,
        tiny=tiny,
    )


def lpips_recipe(weights: Path | None = None, tiny: bool = False, opset: int = DEFAULT_OPSET) -> ExportRecipe:
    """Two-image perceptual distance graph over AlexNet features."""
    return ExportRecipe(
        model_id="lpips_alex" if not tiny else "lpips_tiny",
        input_names=("image_a", "image_b"),
        output_names=("distance",),
        input_shapes=((1, 3, 256, 256), (1, 3, 256, 256)),
        output_shape=(1,),
        mean=(0.0, 0.0, 0.0),
        std=(1.0, 1.0, 1.0),
        value_range=(-1.0, 1.0),
        opset=opset,
        weights=weights,
        tiny=tiny,
    )


def segmenter_recipe(
    weights: Path | None = None,
    tiny: bool = False,
    num_classes: int = 19,
    input_size: int = 256,
    opset: int = DEFAULT_OPSET,
) -> ExportRecipe:
    """Semantic segmenter: normalized image in, per-class logits out."""
    return ExportRecipe(
        model_id="segmenter_deeplab" if not tiny else "segmenter_tiny",
        input_names=("image",),
        output_names=("logits",),
        input_shapes=((1, 3, input_size, input_size),),
        output_shape=(1, num_classes, input_size, input_size),
        mean=IMAGENET_MEAN,
        std=IMAGENET_STD,
        value_range=(0.0, 1.0),
        opset=opset,
        weights=weights,
        tiny=tiny,
        extra={"num_classes": num_classes},
    )


ALL_RECIPES = {
    "sam_vitl": sam_vitl_recipe,
    "vit_b16": vit_recipe,
    "lpips_alex": lpips_recipe,
    "segmenter_deeplab": segmenter_recipe,
}
