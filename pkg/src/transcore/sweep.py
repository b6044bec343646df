"""Distortion sweeps and correlation analysis.

``run_sweep`` distorts each pair's translated image over a degree grid
and scores it against the untouched source with every requested metric,
one record per (pair, metric, kind, degree). Failures are per-record
statuses, never aborts. ``correlate`` reduces records to the absolute
Pearson correlation between distortion degree and (by default) the
per-degree mean metric value.

Records serialize to a flat CSV and correlation reports to JSON; both
are byte-deterministic for fixed inputs regardless of job count.
"""

from __future__ import annotations

import csv
import json
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import baselines
from .config import Manifest, PairEntry, RunConfig
from .distortions import DistortionSpec, apply_distortion
from .encoders import EncoderSpec, embed
from .errors import (
    BackendUnavailable,
    DegenerateSeries,
    InsufficientDegrees,
    IoError,
    LengthMismatch,
    MalformedFile,
    MissingEmbedding,
    TranscoreError,
    ZeroBaseline,
)
from .image_io import ImageBuffer, load_image
from .rng import derive_seed
from .samscore import samscore

CSV_HEADER = ["pair_id", "metric", "distortion", "degree", "seed", "status", "value"]

__all__ = [
    "SweepRecord",
    "CorrelationReport",
    "run_sweep",
    "pearson",
    "percent_change",
    "correlate",
    "write_records_csv",
    "read_records_csv",
    "write_report_json",
]


@dataclass(frozen=True)
class SweepRecord:
    pair_id: str
    metric: str
    distortion: str
    degree: float
    seed: int
    status: str
    value: float | None

    def sort_key(self):
        return (self.pair_id, self.distortion, self.degree, self.metric)


@dataclass(frozen=True)
class CorrelationReport:
    metric: str
    distortion: str
    r: float | None
    abs_r: float | None
    n: int
    excluded: int
    status: str = "ok"


def pearson(x, y) -> float:
    """Pearson correlation coefficient, accumulated in float64.

    Requires equal lengths >= 3 and nonzero variance on both sides.
    """
    xs = np.asarray(x, dtype=np.float64)
    ys = np.asarray(y, dtype=np.float64)
    if xs.ndim != 1 or xs.shape != ys.shape:
        raise LengthMismatch(f"series shapes differ: {xs.shape} vs {ys.shape}")
    if xs.size < 3:
        raise LengthMismatch(f"need at least 3 samples, got {xs.size}")
    dx = xs - xs.mean(dtype=np.float64)
    dy = ys - ys.mean(dtype=np.float64)
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateSeries("zero-variance series has no defined correlation")
    return float(np.dot(dx, dy)) / math.sqrt(sxx * syy)


def percent_change(series) -> list[float]:
    """Change of each element relative to the first, in percent.

    out[i] = 100 * (v[i] - v[0]) / |v[0]|; the sign of the change is
    preserved for metrics of either polarity.
    """
    values = [float(v) for v in series]
    if not values:
        raise ZeroBaseline("empty series")
    v0 = values[0]
    if v0 == 0.0:
        raise ZeroBaseline("first element is zero; percent change undefined")
    return [100.0 * (v - v0) / abs(v0) for v in values]


# --- sweep execution ---------------------------------------------------------


class _EmbedCache:
    """Per-run memo of source-image embeddings, keyed by (pair, role)."""

    def __init__(self):
        self._data = {}
        self._lock = threading.Lock()

    def get(self, spec: EncoderSpec, img: ImageBuffer, pair_id: str, role: str):
        key = (pair_id, role, spec.cache_id())
        with self._lock:
            if key in self._data:
                return self._data[key]
        emb = embed(spec, img, key=f"{pair_id}.{role}")
        with self._lock:
            self._data[key] = emb
        return emb


_STATUS_BY_ERROR = (
    ((IoError, MalformedFile, OSError), "io_error"),
    ((BackendUnavailable, MissingEmbedding), "backend_error"),
)


def _status_for(exc: Exception) -> str:
    for types, status in _STATUS_BY_ERROR:
        if isinstance(exc, types):
            return status
    return "compute_error"


def _embedding_score(
    spec: EncoderSpec,
    pair: PairEntry,
    source: ImageBuffer,
    distorted: ImageBuffer,
    degree: float,
    cache: _EmbedCache,
) -> float:
    if spec.kind == "precomputed" and degree != 0.0:
        # Stored embeddings describe the undistorted pair only; scoring a
        # distorted image against them would silently flatline the sweep.
        raise MissingEmbedding("precomputed embeddings cover only the undistorted pair")
    src_emb = cache.get(spec, source, pair.id, "src")
    return samscore(src_emb, embed(spec, distorted, key=f"{pair.id}.gen")).score


def _score_one(
    metric: str,
    pair: PairEntry,
    source: ImageBuffer,
    distorted: ImageBuffer,
    degree: float,
    config: RunConfig,
    cache: _EmbedCache,
    shared: dict,
) -> float:
    if metric == "samscore":
        return _embedding_score(config.encoders["samscore"], pair, source, distorted, degree, cache)
    if metric == "vitscore":
        return _embedding_score(config.encoders["vitscore"], pair, source, distorted, degree, cache)
    if metric == "l2":
        return baselines.l2_distance(source, distorted)
    if metric == "mse":
        return baselines.mse(source, distorted)
    if metric == "psnr":
        return baselines.psnr(source, distorted)
    if metric == "ssim":
        return baselines.ssim(source, distorted)
    if metric == "lpips":
        return baselines.lpips(config.encoders["lpips"], source, distorted)
    if metric in ("fcn_acc", "fcn_iou"):
        if pair.source_labels is None:
            raise IoError(f"pair {pair.id} has no source_labels; fcn metrics unavailable")
        if "fcn" not in shared:
            gt = baselines.load_label_map(pair.source_labels, config.num_classes, config.ignore_id)
            pred = baselines.segment_labels(
                config.encoders["segmenter"], distorted, config.num_classes, config.ignore_id
            )
            shared["fcn"] = baselines.fcn_scores(baselines.confusion(gt, pred))
        acc, iou = shared["fcn"]
        return acc if metric == "fcn_acc" else iou
    raise ValueError(f"unknown metric {metric!r}")


def _sweep_cell(pair, kind, degree_index, degree, config, cache, images):
    seed = derive_seed(config.master_seed, pair.id, kind, degree_index)
    records = []
    try:
        source, translated = images()
        distorted = apply_distortion(
            translated, DistortionSpec(kind, degree, seed)
        )
    except (TranscoreError, OSError, ValueError) as exc:
        status = _status_for(exc)
        return [
            SweepRecord(pair.id, metric, kind, degree, seed, status, None)
            for metric in config.metrics
        ]
    shared = {}
    for metric in config.metrics:
        try:
            value = _score_one(metric, pair, source, distorted, degree, config, cache, shared)
            records.append(SweepRecord(pair.id, metric, kind, degree, seed, "ok", value))
        except (TranscoreError, OSError, ValueError) as exc:
            records.append(
                SweepRecord(pair.id, metric, kind, degree, seed, _status_for(exc), None)
            )
    return records


def run_sweep(manifest: Manifest, config: RunConfig, grids: dict[str, list[float]] | None = None) -> list[SweepRecord]:
    """Score every (pair, distortion kind, degree) cell with every metric.

    A degree-0 row is always included. Seeds derive from
    (master_seed, pair, kind, degree index), so the output is identical
    for any job count; records come back sorted by
    (pair, distortion, degree, metric).
    """
    grids = grids if grids is not None else config.effective_grids
    image_cache: dict[str, tuple] = {}
    cache_lock = threading.Lock()

    def loader(pair: PairEntry):
        def load():
            with cache_lock:
                if pair.id in image_cache:
                    return image_cache[pair.id]
            loaded = (load_image(pair.source), load_image(pair.translated))
            with cache_lock:
                image_cache[pair.id] = loaded
            return loaded

        return load

    cells = []
    for pair in manifest.pairs:
        for kind, degrees in sorted(grids.items()):
            cleaned = list(degrees)
            if not cleaned or cleaned[0] != 0.0:
                cleaned = [0.0] + [d for d in cleaned if d != 0.0]
            for degree_index, degree in enumerate(cleaned):
                cells.append((pair, kind, degree_index, float(degree)))

    cache = _EmbedCache()
    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            chunks = list(
                pool.map(
                    lambda c: _sweep_cell(c[0], c[1], c[2], c[3], config, cache, loader(c[0])),
                    cells,
                )
            )
    else:
        chunks = [
            _sweep_cell(pair, kind, di, degree, config, cache, loader(pair))
            for pair, kind, di, degree in cells
        ]
    records = [record for chunk in chunks for record in chunk]
    records.sort(key=SweepRecord.sort_key)
    return records


def run_batch(manifest: Manifest, config: RunConfig) -> list[SweepRecord]:
    """One undistorted record per (pair, metric), sorted by (pair_id, metric).

    Rows carry distortion "none" at degree 0; failures become per-record
    statuses and the run continues.
    """
    cache = _EmbedCache()
    records = []
    for pair in manifest.pairs:
        seed = derive_seed(config.master_seed, pair.id, "none", 0)
        shared = {}
        try:
            source = load_image(pair.source)
            translated = load_image(pair.translated)
        except (TranscoreError, OSError) as exc:
            records.extend(
                SweepRecord(pair.id, metric, "none", 0.0, seed, _status_for(exc), None)
                for metric in config.metrics
            )
            continue
        for metric in config.metrics:
            try:
                value = _score_one(metric, pair, source, translated, 0.0, config, cache, shared)
                records.append(SweepRecord(pair.id, metric, "none", 0.0, seed, "ok", value))
            except (TranscoreError, OSError, ValueError) as exc:
                records.append(
                    SweepRecord(pair.id, metric, "none", 0.0, seed, _status_for(exc), None)
                )
    records.sort(key=lambda r: (r.pair_id, r.metric))
    return records


# --- correlation -------------------------------------------------------------


def correlate(records: list[SweepRecord], pooled: bool = False) -> list[CorrelationReport]:
    """Absolute Pearson correlation of metric value against degree.

    Default reduces to per-degree means first (one curve per group);
    ``pooled`` correlates the raw per-record cloud instead. Records with
    non-ok status or infinite values are excluded and counted. Groups
    spanning fewer than 3 distinct degrees raise InsufficientDegrees;
    zero-variance groups come back with status "degenerate".
    """
    groups: dict[tuple[str, str], list[SweepRecord]] = {}
    for record in records:
        groups.setdefault((record.metric, record.distortion), []).append(record)

    reports = []
    for (metric, kind), group in sorted(groups.items()):
        usable = [r for r in group if r.status == "ok" and r.value is not None and math.isfinite(r.value)]
        excluded = len(group) - len(usable)
        degrees = sorted({r.degree for r in usable})
        if len(degrees) < 3:
            raise InsufficientDegrees(
                f"{metric}/{kind}: {len(degrees)} usable degrees, need >= 3"
            )
        if pooled:
            xs = [r.degree for r in usable]
            ys = [r.value for r in usable]
        else:
            xs = degrees
            ys = []
            for degree in degrees:
                vals = [r.value for r in usable if r.degree == degree]
                ys.append(float(np.mean(np.asarray(vals, dtype=np.float64))))
        try:
            r = pearson(xs, ys)
            reports.append(CorrelationReport(metric, kind, r, abs(r), len(xs), excluded))
        except DegenerateSeries:
            reports.append(CorrelationReport(metric, kind, None, None, len(xs), excluded, "degenerate"))
    return reports


# --- serialization -----------------------------------------------------------


def _format_value(value: float | None) -> str:
    if value is None:
        return ""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.6f}"


def write_records_csv(path: str | Path, records: list[SweepRecord]) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for r in records:
                writer.writerow(
                    [r.pair_id, r.metric, r.distortion, f"{r.degree:.6f}", r.seed, r.status, _format_value(r.value)]
                )
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def read_records_csv(path: str | Path) -> list[SweepRecord]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != CSV_HEADER:
                raise MalformedFile(f"{path}: unexpected CSV header {header}")
            records = []
            for row in reader:
                if len(row) != len(CSV_HEADER):
                    raise MalformedFile(f"{path}: bad row {row}")
                pair_id, metric, kind, degree, seed, status, value = row
                records.append(
                    SweepRecord(
                        pair_id,
                        metric,
                        kind,
                        float(degree),
                        int(seed),
                        status,
                        float(value) if value else None,
                    )
                )
            return records
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc


def write_report_json(path: str | Path, reports: list[CorrelationReport]) -> None:
    payload = [
        {
            "metric": rep.metric,
            "distortion": rep.distortion,
            "abs_r": None if rep.abs_r is None else round(rep.abs_r, 6),
            "r": None if rep.r is None else round(rep.r, 6),
            "n": rep.n,
            "excluded": rep.excluded,
            "status": rep.status,
        }
        for rep in reports
    ]
    try:
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
