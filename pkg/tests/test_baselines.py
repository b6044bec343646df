import math

import numpy as np
import pytest

from reference import ref_confusion, ref_fcn_scores, ref_ssim_single_channel
from transcore.baselines import (
    ConfusionMatrix,
    LabelMap,
    confusion,
    fcn_scores,
    l2_distance,
    load_label_map,
    mse,
    psnr,
    save_label_map,
    ssim,
    vitscore,
)
from transcore.encoders import EncoderSpec
from transcore.errors import (
    ClassCountMismatch,
    EmptyMatrix,
    ImageTooSmall,
    ShapeMismatch,
)
from transcore.image_io import ImageBuffer
from transcore.samscore import samscore
from transcore.encoders import stub_encode


def u8(arr):
    return ImageBuffer(np.asarray(arr, dtype=np.uint8))


def rand_u8(seed, h, w, c=3):
    return ImageBuffer(np.random.default_rng(seed).integers(0, 256, size=(h, w, c), dtype=np.uint8))


# --- L2 / MSE / PSNR --------------------------------------------------------


def test_l2_identity_zero():
    img = rand_u8(0, 6, 6)
    assert l2_distance(img, img) == 0.0
    assert mse(img, img) == 0.0


def test_l2_constant_difference():
    a = u8(np.full((4, 4, 3), 100))
    b = u8(np.full((4, 4, 3), 116))
    assert mse(a, b) == 256.0
    assert l2_distance(a, b) == 16.0


def test_l2_matches_double_loop():
    rng = np.random.default_rng(1)
    a = rng.integers(0, 256, size=(4, 4, 3), dtype=np.uint8)
    b = rng.integers(0, 256, size=(4, 4, 3), dtype=np.uint8)
    total = 0.0
    for y in range(4):
        for x in range(4):
            for c in range(3):
                total += (float(a[y, x, c]) - float(b[y, x, c])) ** 2
    want = total / 48.0
    assert abs(mse(u8(a), u8(b)) - want) < 1e-12
    assert abs(l2_distance(u8(a), u8(b)) - math.sqrt(want)) < 1e-12


def test_l2_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        l2_distance(rand_u8(2, 4, 4), rand_u8(2, 4, 5))
    with pytest.raises(ShapeMismatch):
        l2_distance(rand_u8(2, 4, 4), rand_u8(2, 4, 4).to_float())


def test_psnr_identity_is_infinite():
    img = rand_u8(3, 5, 5)
    assert psnr(img, img) == math.inf


def test_psnr_constant_difference_closed_form():
    a = u8(np.full((8, 8, 3), 10))
    b = u8(np.full((8, 8, 3), 26))
    want = 10.0 * math.log10(255.0**2 / 256.0)
    assert abs(psnr(a, b) - want) < 1e-12
    assert abs(want - 24.0485) < 1e-3


def test_psnr_symmetry():
    a, b = rand_u8(4, 6, 6), rand_u8(5, 6, 6)
    assert psnr(a, b) == psnr(b, a)


def test_psnr_float_peak_default():
    a = ImageBuffer(np.zeros((4, 4, 1), dtype=np.float32))
    b = ImageBuffer(np.full((4, 4, 1), 0.5, dtype=np.float32))
    assert abs(psnr(a, b) - 10.0 * math.log10(1.0 / 0.25)) < 1e-12


# --- SSIM --------------------------------------------------------------------


def test_ssim_identity():
    img = rand_u8(6, 16, 16)
    assert abs(ssim(img, img) - 1.0) < 1e-12


def test_ssim_black_vs_white_closed_form():
    a = u8(np.zeros((11, 11, 1)))
    b = u8(np.full((11, 11, 1), 255))
    c1 = (0.01 * 255) ** 2
    want = c1 / (255.0**2 + c1)
    got = ssim(a, b)
    assert abs(got - want) < 1e-12
    assert abs(got - 1.000e-4) < 1e-6


def test_ssim_matches_window_oracle():
    rng = np.random.default_rng(7)
    for trial in range(3):
        a = rng.integers(0, 256, size=(16, 16, 1), dtype=np.uint8)
        b = rng.integers(0, 256, size=(16, 16, 1), dtype=np.uint8)
        want = ref_ssim_single_channel(a[:, :, 0].astype(float).tolist(),
                                       b[:, :, 0].astype(float).tolist(), 255.0)
        assert abs(ssim(u8(a), u8(b)) - want) < 1e-6


def test_ssim_multichannel_is_channel_mean():
    rng = np.random.default_rng(8)
    a = rng.integers(0, 256, size=(12, 12, 3), dtype=np.uint8)
    b = rng.integers(0, 256, size=(12, 12, 3), dtype=np.uint8)
    per_channel = [
        ssim(u8(a[:, :, c : c + 1]), u8(b[:, :, c : c + 1])) for c in range(3)
    ]
    assert abs(ssim(u8(a), u8(b)) - np.mean(per_channel)) < 1e-12


def test_ssim_symmetry_and_small_image():
    a, b = rand_u8(9, 14, 14), rand_u8(10, 14, 14)
    assert abs(ssim(a, b) - ssim(b, a)) < 1e-12
    with pytest.raises(ImageTooSmall):
        ssim(rand_u8(11, 10, 14), rand_u8(12, 10, 14))


def test_ssim_float_tag_uses_unit_dynamic_range():
    rng = np.random.default_rng(19)
    a32 = rng.random((13, 13, 1)).astype(np.float32)
    b32 = rng.random((13, 13, 1)).astype(np.float32)
    got = ssim(ImageBuffer(a32), ImageBuffer(b32))
    want = ref_ssim_single_channel(
        a32[:, :, 0].astype(np.float64).tolist(),
        b32[:, :, 0].astype(np.float64).tolist(),
        1.0,
    )
    assert abs(got - want) < 1e-9


# --- confusion / FCN scores ---------------------------------------------------


def lm(arr, k, ignore=None):
    return LabelMap(np.asarray(arr, dtype=np.int32), k, ignore)


def test_confusion_perfect_prediction_diagonal():
    gt = lm([[0, 1], [2, 1]], 3)
    out = confusion(gt, gt)
    assert np.array_equal(out.counts, np.diag([1, 2, 1]))


def test_confusion_two_pixel_example():
    gt = lm([[0], [1]], 2)
    pred = lm([[0], [0]], 2)
    out = confusion(gt, pred)
    assert out.counts[0, 0] == 1
    assert out.counts[1, 0] == 1
    assert out.counts.sum() == 2


def test_confusion_all_ignored():
    gt = lm(np.full((3, 3), 9), 2, ignore=9)
    pred = lm(np.zeros((3, 3)), 2)
    assert confusion(gt, pred).counts.sum() == 0


def test_confusion_errors():
    with pytest.raises(ShapeMismatch):
        confusion(lm(np.zeros((2, 2)), 2), lm(np.zeros((2, 3)), 2))
    with pytest.raises(ClassCountMismatch):
        confusion(lm(np.zeros((2, 2)), 2), lm(np.zeros((2, 2)), 3))


def test_confusion_matches_pixel_loop_oracle():
    rng = np.random.default_rng(13)
    for _ in range(50):
        k = int(rng.integers(2, 6))
        h = int(rng.integers(1, 9))
        w = int(rng.integers(1, 9))
        use_ignore = bool(rng.random() < 0.5)
        ignore = k if use_ignore else None
        hi = k + 1 if use_ignore else k
        gt = rng.integers(0, hi, size=(h, w))
        pred = rng.integers(0, k, size=(h, w))
        got = confusion(lm(gt, k, ignore), lm(pred, k))
        want = ref_confusion(gt.tolist(), pred.tolist(), k, ignore)
        assert got.counts.tolist() == want


def test_fcn_scores_perfect():
    acc, iou = fcn_scores(ConfusionMatrix(np.diag([5, 3, 2])))
    assert acc == 1.0 and iou == 1.0


def test_fcn_scores_half_collapse():
    # gt half class0 / half class1, prediction all class0.
    cm = ConfusionMatrix(np.array([[10, 0], [10, 0]]))
    acc, iou = fcn_scores(cm)
    assert acc == 0.5
    assert iou == 0.25


def test_fcn_scores_absent_class_excluded():
    cm = ConfusionMatrix(np.array([[4, 0, 0], [0, 4, 0], [0, 0, 0]]))
    acc, iou = fcn_scores(cm)
    assert acc == 1.0 and iou == 1.0


def test_fcn_scores_empty():
    with pytest.raises(EmptyMatrix):
        fcn_scores(ConfusionMatrix(np.zeros((3, 3), dtype=np.int64)))


def test_fcn_scores_match_oracle_and_bounds():
    rng = np.random.default_rng(14)
    for _ in range(50):
        k = int(rng.integers(2, 5))
        gt = rng.integers(0, k, size=(6, 6))
        pred = rng.integers(0, k, size=(6, 6))
        cm = confusion(lm(gt, k), lm(pred, k))
        acc, iou = fcn_scores(cm)
        want_acc, want_iou = ref_fcn_scores(cm.counts.tolist())
        assert abs(acc - want_acc) < 1e-12
        assert abs(iou - want_iou) < 1e-12
        assert 0.0 <= acc <= 1.0 and 0.0 <= iou <= 1.0
        # per-class IoU <= per-class recall and precision
        counts = cm.counts.astype(float)
        for c in range(k):
            tp = counts[c, c]
            row = counts[c].sum()
            col = counts[:, c].sum()
            union = row + col - tp
            if union > 0:
                iou_c = tp / union
                if row > 0:
                    assert iou_c <= tp / row + 1e-12
                if col > 0:
                    assert iou_c <= tp / col + 1e-12


def test_label_map_validation():
    with pytest.raises(ValueError):
        lm([[5]], 3)
    lm([[5]], 3, ignore=5)  # ignored id may exceed the class range


def test_label_map_png_roundtrip(tmp_path):
    rng = np.random.default_rng(15)
    labels = lm(rng.integers(0, 19, size=(9, 9)), 19)
    path = tmp_path / "labels.png"
    save_label_map(labels, path)
    back = load_label_map(path, 19)
    assert np.array_equal(back.labels, labels.labels)


# --- ViTScore (stub substitution path) ----------------------------------------


def test_vitscore_self_is_one():
    img = rand_u8(16, 64, 64)
    res = vitscore(EncoderSpec.stub(), img, img)
    assert abs(res.score - 1.0) < 1e-6


def test_vitscore_stub_equals_samscore_on_same_embeddings():
    a, b = rand_u8(17, 64, 64), rand_u8(18, 64, 64)
    via_vit = vitscore(EncoderSpec.stub(), a, b)
    direct = samscore(stub_encode(a), stub_encode(b))
    assert via_vit.score == direct.score
