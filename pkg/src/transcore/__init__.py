"""Content-structural similarity scoring for image-to-image translation.

The core metric embeds the source and translated images with a
segmentation-foundation-model encoder (or a deterministic stub), takes
the cosine similarity of the two embedding maps at every spatial
position, and averages. The package also ships the usual comparison
metrics (L2, PSNR, SSIM, LPIPS, ViTScore, segmentation ACC/IoU), a
seeded distortion harness (piecewise affine warps, Gaussian noise,
color jitter), and sweep/correlation reporting.
"""

from .baselines import (
    ConfusionMatrix,
    LabelMap,
    confusion,
    fcn_scores,
    l2_distance,
    lpips,
    mse,
    psnr,
    ssim,
    vitscore,
)
from .config import Manifest, RunConfig
from .distortions import DistortionSpec, apply_distortion, color_jitter, gaussian_noise, piecewise_affine
from .encoders import EmbeddingMap, EncoderSpec, embed, preprocess_for_sam, stub_encode
from .errors import TranscoreError
from .image_io import ImageBuffer, decode_png, encode_png, load_image, resize_bilinear, save_image
from .lineplot import render_lineplot
from .npy_io import TensorF32, read_tensor_file, write_tensor_file
from .rng import RngStream, derive_seed
from .samscore import ScoreResult, SimilarityMap, cosine, render_heatmap, samscore, similarity_map
from .sweep import (
    CorrelationReport,
    SweepRecord,
    correlate,
    pearson,
    percent_change,
    read_records_csv,
    run_batch,
    run_sweep,
    write_records_csv,
    write_report_json,
)

__version__ = "0.1.0"

__all__ = [
    "ConfusionMatrix",
    "CorrelationReport",
    "DistortionSpec",
    "EmbeddingMap",
    "EncoderSpec",
    "ImageBuffer",
    "LabelMap",
    "Manifest",
    "RngStream",
    "RunConfig",
    "ScoreResult",
    "SimilarityMap",
    "SweepRecord",
    "TensorF32",
    "TranscoreError",
    "apply_distortion",
    "color_jitter",
    "confusion",
    "correlate",
    "cosine",
    "decode_png",
    "derive_seed",
    "embed",
    "encode_png",
    "fcn_scores",
    "gaussian_noise",
    "l2_distance",
    "load_image",
    "lpips",
    "mse",
    "pearson",
    "percent_change",
    "piecewise_affine",
    "preprocess_for_sam",
    "psnr",
    "read_records_csv",
    "read_tensor_file",
    "render_heatmap",
    "render_lineplot",
    "resize_bilinear",
    "run_batch",
    "run_sweep",
    "samscore",
    "save_image",
    "similarity_map",
    "ssim",
    "stub_encode",
    "vitscore",
    "write_records_csv",
    "write_report_json",
    "write_tensor_file",
]
