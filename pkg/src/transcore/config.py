"""Run manifests and sweep configuration.

A manifest lists the image pairs to score; a run config names the
metrics, per-metric encoder backends, distortion grids, and seeds.
Both are plain JSON files; CLI flags override config values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .encoders import EncoderSpec
from .errors import ConfigError

KNOWN_METRICS = ("samscore", "l2", "mse", "psnr", "ssim", "lpips", "vitscore", "fcn_acc", "fcn_iou")

DEFAULT_METRICS = ["samscore", "l2", "psnr", "ssim"]

# Six degrees per distortion family, degree 0 included.
DEFAULT_GRIDS = {
    "piecewise-affine": [0.0, 0.01, 0.02, 0.03, 0.04, 0.05],
    "gaussian-noise": [0.0, 50.0, 100.0, 150.0, 200.0, 250.0],
    "color-jitter": [0.0, 0.05, 0.1, 0.15, 0.2, 0.25],
}

__all__ = ["PairEntry", "Manifest", "RunConfig", "KNOWN_METRICS", "DEFAULT_METRICS", "DEFAULT_GRIDS"]


@dataclass(frozen=True)
class PairEntry:
    id: str
    source: Path
    translated: Path
    source_labels: Path | None = None
    translated_domain_gt: Path | None = None


@dataclass(frozen=True)
class Manifest:
    pairs: list[PairEntry]
    task: str = "run"

    @staticmethod
    def load(path: str | Path) -> "Manifest":
        try:
            raw = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read manifest {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"manifest {path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict) or "pairs" not in raw:
            raise ConfigError(f"manifest {path} must be an object with a 'pairs' list")
        base = Path(path).parent
        pairs = []
        seen = set()
        for entry in raw["pairs"]:
            try:
                pid = entry["id"]
                source = base / entry["source"]
                translated = base / entry["translated"]
            except (TypeError, KeyError) as exc:
                raise ConfigError(f"manifest pair needs id/source/translated: {entry!r}") from exc
            if pid in seen:
                raise ConfigError(f"duplicate pair id {pid!r}")
            seen.add(pid)
            labels = entry.get("source_labels")
            gt = entry.get("translated_domain_gt")
            pair = PairEntry(
                id=pid,
                source=source,
                translated=translated,
                source_labels=base / labels if labels else None,
                translated_domain_gt=base / gt if gt else None,
            )
            for p in (pair.source, pair.translated, pair.source_labels, pair.translated_domain_gt):
                if p is not None and not p.is_file():
                    raise ConfigError(f"manifest references missing file: {p}")
            pairs.append(pair)
        if not pairs:
            raise ConfigError(f"manifest {path} lists no pairs")
        return Manifest(pairs=pairs, task=str(raw.get("task", "run")))


@dataclass
class RunConfig:
    metrics: list[str] = field(default_factory=lambda: list(DEFAULT_METRICS))
    encoders: dict[str, EncoderSpec] = field(default_factory=dict)
    grids: dict[str, list[float]] = field(default_factory=dict)
    master_seed: int = 0
    output_dir: Path = Path("out")
    jobs: int = 1
    num_classes: int | None = None
    ignore_id: int | None = None
    pooled: bool = False

    def __post_init__(self):
        for metric in self.metrics:
            if metric not in KNOWN_METRICS:
                raise ConfigError(f"unknown metric {metric!r} (known: {', '.join(KNOWN_METRICS)})")
        for kind in self.grids:
            if kind not in DEFAULT_GRIDS:
                raise ConfigError(f"unknown distortion kind {kind!r}")
        self.encoders.setdefault("samscore", EncoderSpec.stub())
        self.encoders.setdefault("vitscore", EncoderSpec.stub())
        if "lpips" in self.metrics and "lpips" not in self.encoders:
            raise ConfigError("metric 'lpips' needs an onnx model: set encoders.lpips")
        if ("fcn_acc" in self.metrics or "fcn_iou" in self.metrics):
            if "segmenter" not in self.encoders:
                raise ConfigError("fcn metrics need an onnx segmenter: set encoders.segmenter")
            if self.num_classes is None:
                raise ConfigError("fcn metrics need num_classes")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")

    @property
    def effective_grids(self) -> dict[str, list[float]]:
        return self.grids if self.grids else dict(DEFAULT_GRIDS)

    @staticmethod
    def load(path: str | Path) -> "RunConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        return RunConfig.from_dict(raw)

    @staticmethod
    def from_dict(raw: dict) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        encoders = {}
        for role, text in raw.get("encoders", {}).items():
            try:
                encoders[role] = EncoderSpec.parse(text)
            except ValueError as exc:
                raise ConfigError(f"bad encoder spec for {role!r}: {exc}") from exc
        try:
            return RunConfig(
                metrics=list(raw.get("metrics", DEFAULT_METRICS)),
                encoders=encoders,
                grids={k: [float(d) for d in v] for k, v in raw.get("distortions", {}).items()},
                master_seed=int(raw.get("master_seed", 0)),
                output_dir=Path(raw.get("output_dir", "out")),
                jobs=int(raw.get("jobs", 1)),
                num_classes=raw.get("num_classes"),
                ignore_id=raw.get("ignore_id"),
                pooled=bool(raw.get("pooled", False)),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad config value: {exc}") from exc
