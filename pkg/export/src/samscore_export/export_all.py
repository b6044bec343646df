"""Batch export entry point.

    samscore-export --out-dir dist --tiny
    samscore-export --out-dir dist --models sam_vitl,vit_b16 --weights-dir /weights

Exports each selected recipe, emits its golden parity fixture, and runs
the dual-forward check when onnxruntime is present. Full-size recipes
need local weights: `<weights-dir>/<model_id>/` for the transformer
checkpoints, `<weights-dir>/lpips_alex.pt`, and a TorchScript
`<weights-dir>/segmenter_deeplab.pt`.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ExportError
from .export import export_model, exporter_available
from .models import build_model
from .parity import emit_parity_fixture, runtime_available
from .recipes import ALL_RECIPES


def _weights_for(name: str, weights_dir: Path | None) -> Path | None:
    if weights_dir is None:
        return None
    for candidate in (weights_dir / name, weights_dir / f"{name}.pt"):
        if candidate.exists():
            return candidate
    return None


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="samscore-export", description=__doc__)
    parser.add_argument("--out-dir", required=True)
    parser.add_argument("--models", default=",".join(ALL_RECIPES), help="comma-separated recipe names")
    parser.add_argument("--tiny", action="store_true", help="reduced random-init variants (no weights needed)")
    parser.add_argument("--weights-dir", default=None, help="directory with local model weights")
    parser.add_argument("--opset", type=int, default=17)
    args = parser.parse_args(argv)

    if not exporter_available():
        print(
            "error: the onnx package is not installed, so torch cannot serialize graphs; "
            "install this package's 'onnx' extra first",
            file=sys.stderr,
        )
        return 2

    weights_dir = Path(args.weights_dir) if args.weights_dir else None
    out_dir = Path(args.out_dir)
    failures = 0
    for name in [m.strip() for m in args.models.split(",") if m.strip()]:
        if name not in ALL_RECIPES:
            print(f"unknown model {name!r} (have: {', '.join(ALL_RECIPES)})", file=sys.stderr)
            failures += 1
            continue
        recipe = ALL_RECIPES[name](
            weights=_weights_for(name, weights_dir), tiny=args.tiny, opset=args.opset
        )
        try:
            model = build_model(recipe)
            onnx_path = export_model(recipe, out_dir, model)
            fixture_dir = emit_parity_fixture(
                recipe, model, out_dir / "fixtures", onnx_path=onnx_path
            )
            checked = "parity checked" if runtime_available() else "parity pending (no onnxruntime)"
            print(f"{recipe.model_id}: wrote {onnx_path} + {fixture_dir} ({checked})")
        except ExportError as exc:
            print(f"{recipe.model_id}: FAILED: {exc}", file=sys.stderr)
            failures += 1
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
