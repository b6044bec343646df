import io

import numpy as np
import pytest
from PIL import Image

from reference import ref_resize_bilinear
from transcore.errors import IoError, MalformedFile, UnsupportedPixelFormat
from transcore.image_io import (
    ImageBuffer,
    decode_png,
    encode_png,
    load_image,
    resize_bilinear,
    sample_bilinear,
    save_image,
)


def pil_png_bytes(arr, mode):
    buf = io.BytesIO()
    Image.fromarray(arr, mode=mode).save(buf, format="PNG")
    return buf.getvalue()


def test_decode_known_rgb_pixels():
    arr = np.array(
        [[[10, 20, 30], [40, 50, 60]], [[70, 80, 90], [100, 110, 120]]], dtype=np.uint8
    )
    img = decode_png(pil_png_bytes(arr, "RGB"))
    assert (img.height, img.width, img.channels) == (2, 2, 3)
    assert img.scale == "uint8"
    assert np.array_equal(img.data, arr)


def test_roundtrip_identity():
    rng = np.random.default_rng(0)
    arr = rng.integers(0, 256, size=(13, 9, 3), dtype=np.uint8)
    once = decode_png(encode_png(ImageBuffer(arr)))
    twice = decode_png(encode_png(once))
    assert np.array_equal(once.data, arr)
    assert np.array_equal(twice.data, arr)


def test_grayscale_stays_single_channel():
    arr = np.arange(36, dtype=np.uint8).reshape(6, 6)
    img = decode_png(pil_png_bytes(arr, "L"))
    assert img.channels == 1
    assert np.array_equal(img.data[:, :, 0], arr)


def test_alpha_dropped():
    rgba = np.zeros((4, 4, 4), dtype=np.uint8)
    rgba[..., 0] = 200
    rgba[..., 3] = 7
    img = decode_png(pil_png_bytes(rgba, "RGBA"))
    assert img.channels == 3
    assert np.array_equal(img.data[..., 0], np.full((4, 4), 200, np.uint8))


def test_truncated_stream_is_malformed():
    good = pil_png_bytes(np.zeros((8, 8, 3), dtype=np.uint8), "RGB")
    with pytest.raises(MalformedFile):
        decode_png(good[: len(good) // 2])
    with pytest.raises(MalformedFile):
        decode_png(b"not a png at all")


def test_non_png_format_rejected():
    buf = io.BytesIO()
    Image.fromarray(np.zeros((4, 4, 3), dtype=np.uint8), mode="RGB").save(buf, format="BMP")
    with pytest.raises(MalformedFile):
        decode_png(buf.getvalue())


def test_16bit_png_unsupported():
    buf = io.BytesIO()
    Image.fromarray(np.zeros((4, 4), dtype=np.uint16)).save(buf, format="PNG")
    with pytest.raises(UnsupportedPixelFormat):
        decode_png(buf.getvalue())


def test_palette_with_transparency_unsupported():
    pal = Image.fromarray(np.zeros((4, 4), dtype=np.uint8), mode="L").convert("P")
    buf = io.BytesIO()
    pal.save(buf, format="PNG", transparency=0)
    with pytest.raises(UnsupportedPixelFormat):
        decode_png(buf.getvalue())


def test_plain_palette_decodes_to_rgb():
    pal = Image.fromarray(np.arange(16, dtype=np.uint8).reshape(4, 4) * 16, mode="L").convert("P")
    buf = io.BytesIO()
    pal.save(buf, format="PNG")
    assert decode_png(buf.getvalue()).channels == 3


def test_load_missing_file_is_io_error(tmp_path):
    with pytest.raises(IoError):
        load_image(tmp_path / "nope.png")


def test_save_and_load(tmp_path):
    arr = np.random.default_rng(1).integers(0, 256, size=(5, 7, 3), dtype=np.uint8)
    path = tmp_path / "img.png"
    save_image(ImageBuffer(arr), path)
    assert np.array_equal(load_image(path).data, arr)


def test_buffer_validation():
    with pytest.raises(ValueError):
        ImageBuffer(np.zeros((4, 4, 2), dtype=np.uint8))
    with pytest.raises(ValueError):
        ImageBuffer(np.zeros((4, 4, 3), dtype=np.int32))
    with pytest.raises(ValueError):
        ImageBuffer(np.full((4, 4, 3), 1.5, dtype=np.float32))


def test_scale_conversions_roundtrip():
    arr = np.random.default_rng(2).integers(0, 256, size=(6, 6, 3), dtype=np.uint8)
    img = ImageBuffer(arr)
    assert np.array_equal(img.to_float().to_uint8().data, arr)


# --- resize ---------------------------------------------------------------


def test_resize_identity_is_exact():
    arr = np.random.default_rng(3).integers(0, 256, size=(9, 11, 3), dtype=np.uint8)
    out = resize_bilinear(ImageBuffer(arr), 9, 11)
    assert np.array_equal(out.data, arr)


def test_resize_constant_stays_constant():
    for scale in ("uint8", "float"):
        if scale == "uint8":
            img = ImageBuffer(np.full((5, 4, 1), 77, dtype=np.uint8))
        else:
            img = ImageBuffer(np.full((5, 4, 1), 0.3, dtype=np.float32))
        out = resize_bilinear(img, 13, 29)
        if scale == "uint8":
            assert np.array_equal(out.data, np.full((13, 29, 1), 77, np.uint8))
        else:
            assert np.allclose(out.data, 0.3, atol=1e-5)


def test_resize_2x2_step_against_oracle():
    # Rows [[0], [255]] doubled to 4x4: interior rows interpolate 1/4, 3/4.
    arr = np.array([[0, 0], [255, 255]], dtype=np.uint8)[:, :, None]
    out = resize_bilinear(ImageBuffer(arr), 4, 4)
    ref = ref_resize_bilinear([[[float(v)] for v in row] for row in arr[:, :, 0]], 4, 4)
    expect = np.floor(np.array(ref)[:, :, 0] + 0.5).astype(np.uint8)
    assert np.array_equal(out.data[:, :, 0], expect)
    assert out.data[:, 0, 0].tolist() == [0, 64, 191, 255]


@pytest.mark.parametrize(
    "in_shape,out_shape",
    [((2, 2), (4, 4)), ((5, 7), (3, 11)), ((8, 3), (8, 9)), ((6, 6), (2, 2))],
)
def test_resize_matches_scalar_oracle(in_shape, out_shape):
    rng = np.random.default_rng(hash(in_shape + out_shape) % (2**32))
    arr = rng.integers(0, 256, size=(*in_shape, 3), dtype=np.uint8)
    out = resize_bilinear(ImageBuffer(arr), *out_shape)
    ref = ref_resize_bilinear(arr.astype(float).tolist(), *out_shape)
    expect = np.clip(np.floor(np.asarray(ref) + 0.5), 0, 255).astype(np.uint8)
    assert np.array_equal(out.data, expect)


def test_resize_float_matches_oracle():
    rng = np.random.default_rng(9)
    arr = rng.random((6, 5, 3)).astype(np.float32)
    out = resize_bilinear(ImageBuffer(arr), 11, 4)
    ref = np.asarray(ref_resize_bilinear(arr.astype(np.float64).tolist(), 11, 4))
    assert np.allclose(out.data, ref, atol=1e-6)


def test_resize_never_overshoots():
    rng = np.random.default_rng(10)
    for _ in range(20):
        arr = rng.integers(0, 256, size=(rng.integers(2, 12), rng.integers(2, 12), 3), dtype=np.uint8)
        out = resize_bilinear(ImageBuffer(arr), int(rng.integers(1, 20)), int(rng.integers(1, 20)))
        assert out.data.min() >= arr.min()
        assert out.data.max() <= arr.max()


def test_resize_rejects_empty_output():
    img = ImageBuffer(np.zeros((4, 4, 3), dtype=np.uint8))
    with pytest.raises(ValueError):
        resize_bilinear(img, 0, 4)


def test_sample_bilinear_edge_replication():
    data = np.arange(12, dtype=np.float64).reshape(3, 4, 1)
    ys = np.array([-5.0, 0.0, 2.5])
    xs = np.array([-5.0, 1.5, 10.0])
    out = sample_bilinear(data, ys, xs)
    assert out[0, 0] == data[0, 0, 0]
    assert out[1, 0] == (data[0, 1, 0] + data[0, 2, 0]) / 2
    assert out[2, 0] == data[2, 3, 0]
