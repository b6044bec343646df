"""Command-line entry point.

Subcommands bind the library into reproducible runs:

    transcore score SOURCE TRANSLATED [--encoder ...] [--heatmap PATH]
    transcore batch --manifest M [--config C] [--out batch.csv]
    transcore sweep --manifest M [--config C] [--out sweep.csv]
    transcore correlate --records sweep.csv [--out report.json] [--pooled]
    transcore report --records sweep.csv --out-dir DIR [--task NAME]

Flags override config-file values. Exit codes: 0 ok, 2 usage, 3 IO,
4 backend, 5 config. All floating output is printed at 6 decimals.
"""

from __future__ import annotations

import argparse
import math
import sys
from collections import defaultdict
from pathlib import Path

import numpy as np

from .config import DEFAULT_GRIDS, Manifest, RunConfig
from .encoders import EncoderSpec, embed
from .errors import (
    BackendUnavailable,
    ConfigError,
    IoError,
    MalformedFile,
    MissingEmbedding,
    ShapeMismatch,
    TranscoreError,
    UnsupportedPixelFormat,
)
from .image_io import load_image
from .lineplot import render_lineplot
from .samscore import render_heatmap, samscore
from .sweep import (
    correlate,
    percent_change,
    read_records_csv,
    run_batch,
    run_sweep,
    write_records_csv,
    write_report_json,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_BACKEND = 4
EXIT_CONFIG = 5

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="transcore",
        description="Content-structural similarity scoring and distortion sweeps",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_score = sub.add_parser("score", help="score one source/translated pair")
    p_score.add_argument("source")
    p_score.add_argument("translated")
    p_score.add_argument("--encoder", default="stub", help="stub | onnx:<path> | precomputed:<dir>")
    p_score.add_argument("--key", default=None, help="pair id for precomputed embeddings")
    p_score.add_argument("--heatmap", default=None, help="write the similarity map as a PNG")

    for name in ("batch", "sweep"):
        p = sub.add_parser(name, help=f"run a {name} over a manifest")
        p.add_argument("--manifest", required=True)
        p.add_argument("--config", default=None)
        p.add_argument("--out", default=None, help=f"records CSV (default {name}.csv)")
        p.add_argument("--metrics", default=None, help="comma-separated metric list override")
        p.add_argument("--encoder", default=None, help="override the samscore encoder spec")
        p.add_argument("--seed", type=int, default=None, help="master seed override")
        if name == "sweep":
            p.add_argument("--distortions", default=None, help="comma-separated kinds to sweep")
            p.add_argument("--degrees", default=None, help="comma-separated degree grid override")
            p.add_argument("--jobs", type=int, default=None)

    p_corr = sub.add_parser("correlate", help="correlation report from a records CSV")
    p_corr.add_argument("--records", required=True)
    p_corr.add_argument("--out", default=None, help="report JSON (default stdout)")
    p_corr.add_argument("--pooled", action="store_true", help="correlate per-record values, not per-degree means")

    p_rep = sub.add_parser("report", help="percent-change SVGs plus the correlation JSON")
    p_rep.add_argument("--records", required=True)
    p_rep.add_argument("--out-dir", required=True)
    p_rep.add_argument("--task", default="run", help="task name used in output file names")
    p_rep.add_argument("--pooled", action="store_true")
    return parser


def _load_config(args) -> RunConfig:
    config = RunConfig.load(args.config) if args.config else RunConfig()
    if getattr(args, "metrics", None):
        config = RunConfig(
            metrics=[m.strip() for m in args.metrics.split(",") if m.strip()],
            encoders=dict(config.encoders),
            grids=dict(config.grids),
            master_seed=config.master_seed,
            output_dir=config.output_dir,
            jobs=config.jobs,
            num_classes=config.num_classes,
            ignore_id=config.ignore_id,
            pooled=config.pooled,
        )
    if getattr(args, "encoder", None):
        try:
            config.encoders["samscore"] = EncoderSpec.parse(args.encoder)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if getattr(args, "seed", None) is not None:
        config.master_seed = args.seed
    if getattr(args, "jobs", None) is not None:
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        config.jobs = args.jobs
    return config


def _sweep_grids(args, config: RunConfig) -> dict[str, list[float]]:
    grids = dict(config.effective_grids)
    if args.distortions:
        kinds = [k.strip() for k in args.distortions.split(",") if k.strip()]
        for kind in kinds:
            if kind not in DEFAULT_GRIDS:
                raise ConfigError(f"unknown distortion kind {kind!r}")
        grids = {k: grids.get(k, DEFAULT_GRIDS[k]) for k in kinds}
    if args.degrees:
        try:
            degrees = [float(d) for d in args.degrees.split(",") if d.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad --degrees: {exc}") from exc
        grids = {k: list(degrees) for k in grids}
    return grids


def _cmd_score(args) -> int:
    try:
        spec = EncoderSpec.parse(args.encoder)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    source = load_image(args.source)
    translated = load_image(args.translated)
    key = args.key
    x = embed(spec, source, key=f"{key}.src" if key else None)
    y = embed(spec, translated, key=f"{key}.gen" if key else None)
    result = samscore(x, y)
    print(f"SAMScore={result.score:.6f}")
    if args.heatmap:
        render_heatmap(result.map, args.heatmap)
    return EXIT_OK


def _cmd_batch(args) -> int:
    manifest = Manifest.load(args.manifest)
    config = _load_config(args)
    records = run_batch(manifest, config)
    out = args.out or "batch.csv"
    write_records_csv(out, records)
    ok = sum(1 for r in records if r.status == "ok")
    print(f"wrote {out}: {len(records)} records ({ok} ok)")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    manifest = Manifest.load(args.manifest)
    config = _load_config(args)
    grids = _sweep_grids(args, config)
    records = run_sweep(manifest, config, grids)
    out = args.out or "sweep.csv"
    write_records_csv(out, records)
    ok = sum(1 for r in records if r.status == "ok")
    print(f"wrote {out}: {len(records)} records ({ok} ok)")
    return EXIT_OK


def _cmd_correlate(args) -> int:
    records = read_records_csv(args.records)
    reports = correlate(records, pooled=args.pooled)
    if args.out:
        write_report_json(args.out, reports)
        print(f"wrote {args.out}: {len(reports)} correlations")
    else:
        for rep in reports:
            shown = "undefined" if rep.abs_r is None else f"{rep.abs_r:.6f}"
            print(f"{rep.metric}\t{rep.distortion}\tabs_r={shown}\tn={rep.n}")
    return EXIT_OK


def _series_for_report(records) -> dict[str, dict[str, list[tuple[float, float]]]]:
    """(distortion -> metric -> percent-change curve over degrees)."""
    by_kind = defaultdict(lambda: defaultdict(dict))
    grouped = defaultdict(list)
    for r in records:
        if r.status == "ok" and r.value is not None and math.isfinite(r.value):
            grouped[(r.distortion, r.metric, r.degree)].append(r.value)
    for (kind, metric, degree), values in grouped.items():
        by_kind[kind][metric][degree] = float(np.mean(np.asarray(values, dtype=np.float64)))

    out = {}
    for kind, metrics in by_kind.items():
        series = {}
        for metric, curve in metrics.items():
            degrees = sorted(curve)
            if not degrees or degrees[0] != 0.0 or curve[degrees[0]] == 0.0:
                print(
                    f"note: skipping {metric}/{kind} in plots (no usable degree-0 baseline)",
                    file=sys.stderr,
                )
                continue
            values = percent_change([curve[d] for d in degrees])
            series[metric] = list(zip(degrees, values))
        if series:
            out[kind] = series
    return out


def _cmd_report(args) -> int:
    records = read_records_csv(args.records)
    out_dir = Path(args.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {out_dir}: {exc}") from exc
    reports = correlate(records, pooled=args.pooled)
    write_report_json(out_dir / "report.json", reports)
    for kind, series in sorted(_series_for_report(records).items()):
        path = out_dir / f"{args.task}.{kind}.svg"
        render_lineplot(series, path, title=f"{args.task}: {kind}")
        print(f"wrote {path}")
    print(f"wrote {out_dir / 'report.json'}")
    return EXIT_OK


_COMMANDS = {
    "score": _cmd_score,
    "batch": _cmd_batch,
    "sweep": _cmd_sweep,
    "correlate": _cmd_correlate,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BackendUnavailable, MissingEmbedding, ShapeMismatch) as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except (IoError, MalformedFile, UnsupportedPixelFormat, OSError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except TranscoreError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
