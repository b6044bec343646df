"""Torch model construction behind each recipe's I/O contract.

Every builder returns an eval-mode module whose forward signature
matches the recipe exactly (tensor in -> tensor out, names fixed at
export time). Full-size variants load weights from a local path;
``tiny`` variants shrink width/depth but keep the contract shapes.
"""

from __future__ import annotations

import torch
from torch import nn

from .errors import ExportFailure
from .recipes import ExportRecipe

LPIPS_FEATURE_SLICES = (1, 4, 7, 9, 11)  # AlexNet ReLU outputs
LPIPS_CHANNELS = (64, 192, 384, 256, 256)

# LPIPS input conditioning applied to [-1, 1] pixels.
LPIPS_SHIFT = (-0.030, -0.088, -0.188)
LPIPS_SCALE = (0.458, 0.448, 0.450)


class VisionEncoderWrapper(nn.Module):
    """Adapts the foundation-model vision tower to tensor-in/tensor-out."""

    def __init__(self, encoder: nn.Module):
        super().__init__()
        self.encoder = encoder

    def forward(self, image: torch.Tensor) -> torch.Tensor:
        return self.encoder(image).last_hidden_state


class PatchGridWrapper(nn.Module):
    """Drops the class token and reshapes ViT tokens to (C, grid, grid)."""

    def __init__(self, vit: nn.Module, grid: int):
        super().__init__()
        self.vit = vit
        self.grid = grid

    def forward(self, image: torch.Tensor) -> torch.Tensor:
        tokens = self.vit(image).last_hidden_state[:, 1:, :]
        b, n, c = tokens.shape
        return tokens.transpose(1, 2).reshape(b, c, self.grid, self.grid)


class LpipsDistance(nn.Module):
    """Perceptual distance over unit-normalized backbone features.

    d(a, b) = sum over layers of mean_hw( w_l * (norm(f_l(a)) - norm(f_l(b)))^2 ),
    with non-negative 1x1 heads w_l, so the distance is >= 0, symmetric,
    and exactly 0 for identical inputs.
    """

    def __init__(self, features: nn.Module, head_weights: list[torch.Tensor]):
        super().__init__()
        self.features = features
        self.heads = nn.ParameterList(nn.Parameter(w.clamp(min=0.0)) for w in head_weights)
        self.register_buffer("shift", torch.tensor(LPIPS_SHIFT).view(1, 3, 1, 1))
        self.register_buffer("scale", torch.tensor(LPIPS_SCALE).view(1, 3, 1, 1))

    def _layer_features(self, x: torch.Tensor) -> list[torch.Tensor]:
        x = (x - self.shift) / self.scale
        outs = []
        for i, layer in enumerate(self.features):
            x = layer(x)
            if i in LPIPS_FEATURE_SLICES:
                outs.append(x / torch.sqrt((x * x).sum(dim=1, keepdim=True) + 1e-10))
        return outs

    def forward(self, image_a: torch.Tensor, image_b: torch.Tensor) -> torch.Tensor:
        total = None
        for head, fa, fb in zip(self.heads, self._layer_features(image_a), self._layer_features(image_b)):
            diff = (fa - fb) ** 2
            term = (diff * head).sum(dim=1).mean(dim=(1, 2))
            total = term if total is None else total + term
        return total  # shape [B]


class SegmenterWrapper(nn.Module):
    """Unwraps torchvision segmentation dict output to a logits tensor."""

    def __init__(self, net: nn.Module):
        super().__init__()
        self.net = net

    def forward(self, image: torch.Tensor) -> torch.Tensor:
        return self.net(image)["out"]


def _build_sam(recipe: ExportRecipe) -> nn.Module:
    from transformers import SamVisionConfig, SamVisionModel

    if recipe.tiny:
        config = SamVisionConfig(
            hidden_size=32,
            num_hidden_layers=2,
            num_attention_heads=2,
            intermediate_size=64,
            output_channels=recipe.output_shape[1],
            image_size=recipe.input_size,
            patch_size=16,
        )
        torch.manual_seed(0)
        encoder = SamVisionModel(config)
    elif recipe.weights is not None:
        from transformers import SamModel

        encoder = SamModel.from_pretrained(str(recipe.weights)).vision_encoder
    else:
        raise ExportFailure("sam export needs --weights (local checkpoint dir) or tiny mode")
    return VisionEncoderWrapper(encoder.eval())


def _build_vit(recipe: ExportRecipe) -> nn.Module:
    from transformers import ViTConfig, ViTModel

    grid = recipe.input_size // 16
    if recipe.tiny:
        config = ViTConfig(
            hidden_size=recipe.output_shape[1],
            num_hidden_layers=1,
            num_attention_heads=4,
            intermediate_size=1024,
            image_size=recipe.input_size,
            patch_size=16,
        )
        torch.manual_seed(1)
        vit = ViTModel(config, add_pooling_layer=False)
    elif recipe.weights is not None:
        vit = ViTModel.from_pretrained(str(recipe.weights), add_pooling_layer=False)
    else:
        raise ExportFailure("vit export needs --weights (local checkpoint dir) or tiny mode")
    return PatchGridWrapper(vit.eval(), grid)


def _build_lpips(recipe: ExportRecipe) -> nn.Module:
    from torchvision.models import alexnet

    torch.manual_seed(2)
    backbone = alexnet(weights=None).features
    if recipe.tiny or recipe.weights is None:
        heads = [0.01 * torch.rand(1, ch, 1, 1) for ch in LPIPS_CHANNELS]
        model = LpipsDistance(backbone, heads)
        if recipe.weights is not None:
            raise ExportFailure("lpips weights given but tiny mode requested")
    else:
        state = torch.load(recipe.weights, map_location="cpu", weights_only=True)
        heads = [state[f"lin{i}"].clamp(min=0.0) for i in range(len(LPIPS_CHANNELS))]
        model = LpipsDistance(backbone, heads)
        model.features.load_state_dict(state["features"])
    return model.eval()


def _build_segmenter(recipe: ExportRecipe) -> nn.Module:
    num_classes = recipe.extra.get("num_classes", 19)
    if recipe.weights is not None and not recipe.tiny:
        scripted = torch.jit.load(str(recipe.weights), map_location="cpu")
        return scripted.eval()
    from torchvision.models.segmentation import deeplabv3_mobilenet_v3_large

    torch.manual_seed(3)
    net = deeplabv3_mobilenet_v3_large(weights=None, weights_backbone=None, num_classes=num_classes)
    return SegmenterWrapper(net.eval())


_BUILDERS = {
    "sam": _build_sam,
    "vit": _build_vit,
    "lpips": _build_lpips,
    "segmenter": _build_segmenter,
}


def build_model(recipe: ExportRecipe) -> nn.Module:
    """Construct the eval-mode torch module for a recipe."""
    for prefix, builder in _BUILDERS.items():
        if recipe.model_id.startswith(prefix):
            model = builder(recipe)
            for p in model.parameters():
                p.requires_grad_(False)
            return model
    raise ExportFailure(f"no builder for model id {recipe.model_id!r}")
