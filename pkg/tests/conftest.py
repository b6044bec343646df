import sys
from pathlib import Path

import numpy as np
import pytest

from transcore.image_io import ImageBuffer

sys.path.insert(0, str(Path(__file__).parent))


def make_structured_image(seed: int, height: int = 96, width: int = 96) -> ImageBuffer:
    """Synthetic structured test scene: shapes over strong oriented gratings.

    Every 16x16 patch carries high-amplitude gradient structure (no flat
    or saturated regions), so the orientation-histogram encoder sees
    geometry everywhere: sensitive to warps, but with gradients far above
    the additive-noise floor. Deterministic per seed. Needs >= 48px sides.
    """
    assert height >= 48 and width >= 48
    rng = np.random.default_rng(seed)
    img = np.full((height, width, 3), float(rng.integers(100, 157)), dtype=np.float64)

    yy, xx = np.mgrid[0:height, 0:width]
    for _ in range(rng.integers(3, 6)):
        top = rng.integers(0, height - 12)
        left = rng.integers(0, width - 12)
        hh = rng.integers(8, height // 2)
        ww = rng.integers(8, width // 2)
        img[top : top + hh, left : left + ww] = rng.integers(92, 165, size=3)

    for _ in range(rng.integers(2, 4)):
        cy = rng.uniform(10, height - 10)
        cx = rng.uniform(10, width - 10)
        radius = rng.uniform(6, min(height, width) / 3)
        disk = (yy - cy) ** 2 + (xx - cx) ** 2 <= radius**2
        img[disk] = rng.integers(92, 165, size=3)

    # Two crossed fine gratings keep gradient magnitude high at every
    # pixel even where one wave sits near a zero crossing.
    total_wave = np.zeros((height, width))
    for amplitude in (rng.uniform(40, 48), rng.uniform(32, 40)):
        theta = rng.uniform(0, np.pi)
        period = rng.uniform(6.0, 8.5)
        total_wave += np.sin((np.cos(theta) * xx + np.sin(theta) * yy) * (2 * np.pi / period)) * amplitude
    img += total_wave[:, :, None]

    # One featureless 16x16 patch (flattened with a 1px margin so its
    # interior gradients are exactly zero): real scenes have blank
    # regions, and they pin down the zero-vector similarity semantics.
    patch_rows, patch_cols = height // 16, width // 16
    q = int(rng.integers(0, patch_rows * patch_cols))
    r, c = divmod(q, patch_cols)
    top, left = r * 16, c * 16
    lo_y, hi_y = max(top - 1, 0), min(top + 17, height)
    lo_x, hi_x = max(left - 1, 0), min(left + 17, width)
    img[lo_y:hi_y, lo_x:hi_x] = img[lo_y:hi_y, lo_x:hi_x].mean(axis=(0, 1))

    return ImageBuffer(np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8))


@pytest.fixture
def structured_image():
    return make_structured_image(7)
