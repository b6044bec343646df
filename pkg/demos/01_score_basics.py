"""Scoring one image pair, step by step.

Builds a small synthetic scene, perturbs it, and walks the metric
pipeline: encode -> per-position cosine similarity -> spatial mean.
Writes the similarity heatmap next to this script under out/.
"""

from pathlib import Path

import numpy as np

from transcore import (
    DistortionSpec,
    ImageBuffer,
    apply_distortion,
    render_heatmap,
    samscore,
    save_image,
    similarity_map,
    stub_encode,
)

out_dir = Path(__file__).parent / "out"
out_dir.mkdir(exist_ok=True)

# A toy "source": gradient background, a bright square, a dark disk.
yy, xx = np.mgrid[0:128, 0:128]
scene = np.full((128, 128, 3), 120.0)
scene += (xx / 127.0 * 40.0)[:, :, None]
scene[20:60, 24:72] = (220.0, 205.0, 60.0)
disk = (yy - 88) ** 2 + (xx - 84) ** 2 <= 24**2
scene[disk] = (40.0, 70.0, 160.0)
source = ImageBuffer(np.clip(np.floor(scene + 0.5), 0, 255).astype(np.uint8))
save_image(source, out_dir / "source.png")

# Pretend translation artifacts: a geometric warp of the source.
translated = apply_distortion(source, DistortionSpec("piecewise-affine", 0.03, seed=11))
save_image(translated, out_dir / "translated.png")

# Self-similarity is exactly 1; structural damage pushes the score down.
x = stub_encode(source)
y = stub_encode(translated)
identity = samscore(x, x)
warped = samscore(x, y)
print(f"score(source, source)     = {identity.score:.6f}")
print(f"score(source, translated) = {warped.score:.6f}")

# The per-position map shows *where* structure moved: darker = less similar.
sim = similarity_map(x, y)
print(f"similarity map {sim.height}x{sim.width}, min {sim.values.min():.3f}")
render_heatmap(sim, out_dir / "similarity_heatmap.png")
print(f"wrote {out_dir / 'similarity_heatmap.png'}")
