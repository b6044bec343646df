import numpy as np
import pytest
import torch

from samscore_export import build_model, sam_vitl_recipe, segmenter_recipe, synthetic_input, vit_recipe
from samscore_export.errors import ExportFailure
from samscore_export.recipes import lpips_recipe


@pytest.fixture(scope="module")
def sam_tiny():
    recipe = sam_vitl_recipe(tiny=True)
    return recipe, build_model(recipe)


@pytest.fixture(scope="module")
def vit_tiny():
    recipe = vit_recipe(tiny=True)
    return recipe, build_model(recipe)


@pytest.fixture(scope="module")
def lpips_tiny():
    recipe = lpips_recipe(tiny=True)
    return recipe, build_model(recipe)


def test_sam_contract_shape(sam_tiny):
    recipe, model = sam_tiny
    with torch.no_grad():
        out = model(torch.from_numpy(synthetic_input(recipe)))
    assert tuple(out.shape) == recipe.output_shape  # (1, 256, 64, 64)


def test_vit_contract_shape_and_cls_dropped(vit_tiny):
    recipe, model = vit_tiny
    x = torch.from_numpy(synthetic_input(recipe))
    with torch.no_grad():
        out = model(x)
        tokens = model.vit(x).last_hidden_state
    assert tuple(out.shape) == recipe.output_shape  # (1, 768, 14, 14)
    # grid position (r, c) must be patch token r*14+c (class token skipped)
    want = tokens[0, 1:, :].transpose(0, 1).reshape(768, 14, 14)
    assert torch.equal(out[0], want)


def test_lpips_identity_zero_symmetry_nonneg(lpips_tiny):
    recipe, model = lpips_tiny
    a = torch.from_numpy(synthetic_input(recipe, 0))
    b = torch.from_numpy(synthetic_input(recipe, 1))
    with torch.no_grad():
        self_dist = model(a, a)
        ab = model(a, b)
        ba = model(b, a)
    assert float(self_dist.abs().max()) < 1e-6
    assert float(ab) >= 0.0
    assert abs(float(ab) - float(ba)) < 1e-6
    assert float(ab) > 0.0


def test_segmenter_contract_shape():
    recipe = segmenter_recipe(tiny=True, num_classes=7, input_size=64)
    model = build_model(recipe)
    with torch.no_grad():
        out = model(torch.from_numpy(synthetic_input(recipe)))
    assert tuple(out.shape) == (1, 7, 64, 64)


def test_full_size_recipes_require_weights():
    with pytest.raises(ExportFailure):
        build_model(sam_vitl_recipe(tiny=False))
    with pytest.raises(ExportFailure):
        build_model(vit_recipe(tiny=False))


def test_synthetic_input_is_deterministic_and_standardized():
    recipe = vit_recipe(tiny=True)
    a = synthetic_input(recipe)
    b = synthetic_input(recipe)
    assert np.array_equal(a, b)
    assert a.dtype == np.float32
    assert a.shape == recipe.input_shapes[0]
    # value_range [0,1] with mean/std 0.5 maps into [-1, 1]
    assert float(a.min()) >= -1.0 - 1e-6 and float(a.max()) <= 1.0 + 1e-6
