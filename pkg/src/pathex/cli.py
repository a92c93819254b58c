"""Command-line interface.

Subcommands: ``extract`` (feature CSV + optional annotated GeoJSON),
``bench`` (batched engine vs the sequential oracle), ``compare``
(histogram distance between two feature CSVs), ``inspect`` (R-tree window
queries and stats), ``generate`` (synthetic test slides).

Reports go to stdout as single JSON documents; progress and warning
records go to stderr as JSON lines. Exit codes: 0 ok, 2 usage, 3 I/O or
parse failure, 4 bench equivalence mismatch, 5 compare tolerance
exceeded, 6 synthetic packing infeasible.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from pathlib import Path
from statistics import median

import numpy as np

from . import report as report_mod
from .batching import ENV_BUDGET, MemoryBudget, budget_from_env
from .engine import MODE_BATCHED, MODE_PER_OBJECT, extract_all
from .errors import (
    BoundsError,
    BudgetError,
    EmptyRegionSet,
    IndexBuildError,
    JoinError,
    PackingError,
    ParseError,
    PathexError,
)
from .geojson import ingest_geojson
from .index import build_index, write_back
from .labelmask import load_label_array, load_label_mask
from .manifest import DEFAULT_MANIFEST
from .model import BoundingBox
from .oracle import compare_tables, oracle_features
from .slide import open_slide
from .synthetic import generate_synthetic_slide
from .table import FeatureRow, FeatureTable, load_csv, save_csv

DEFAULT_COMPARE_FEATURES = (
    "SizeShape_MaxFeretDiameter",
    "SizeShape_Eccentricity",
    "SizeShape_Hu1",
    "Intensity_MeanIntensity",
)


def _diag(record: dict) -> None:
    print(json.dumps(record, sort_keys=True), file=sys.stderr)


def _emit(doc: dict) -> None:
    json.dump(doc, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


# ---------------------------------------------------------------------------
# shared ingestion plumbing

def _add_input_flags(sub: argparse.ArgumentParser, require_slide: bool = True):
    sub.add_argument("--slide", required=require_slide, help="slide image (TIFF or PNG)")
    group = sub.add_mutually_exclusive_group(required=True)
    group.add_argument("--geojson", help="GeoJSON annotation file")
    group.add_argument("--label-mask", help="integer label raster (TIFF or PNG)")
    sub.add_argument("--class-map", help="JSON {label: class} sidecar for --label-mask")


def _ingest(args) -> tuple:
    """(slide, regions, annotations-or-None) from the common input flags."""
    slide = open_slide(args.slide)
    if args.geojson:
        payload = Path(args.geojson).read_bytes()
        regions, annotations = ingest_geojson(payload, slide.width, slide.height, _diag)
        return slide, regions, annotations
    raster = load_label_array(args.label_mask)
    if raster.shape != (slide.height, slide.width):
        raise ParseError(
            f"label raster {raster.shape[1]}x{raster.shape[0]} does not match "
            f"slide {slide.width}x{slide.height}"
        )
    class_map = None
    if args.class_map:
        with open(args.class_map, "r", encoding="utf-8") as fh:
            class_map = {int(k): str(v) for k, v in json.load(fh).items()}
    return slide, load_label_mask(raster, class_map), None


def _parse_size_pair(text: str, flag: str) -> tuple[int, int]:
    for sep in (",", "x", ":"):
        if sep in text:
            a, b = text.split(sep, 1)
            return int(a), int(b)
    raise ParseError(f"{flag} expects two integers, got {text!r}")


def _parse_synthetic_spec(text: str) -> dict:
    """'seed=1,objects=5000,size=8:32,slide=4096x4096' -> kwargs."""
    spec = {"seed": 1, "objects": 1000, "size": (8, 32), "slide": (2048, 2048)}
    if text:
        for part in text.split(","):
            if not part:
                continue
            key, _, value = part.partition("=")
            key = key.strip()
            if key == "seed":
                spec["seed"] = int(value)
            elif key == "objects":
                spec["objects"] = int(value)
            elif key == "size":
                a, _, b = value.partition(":")
                spec["size"] = (int(a), int(b))
            elif key == "slide":
                w, _, h = value.partition("x")
                spec["slide"] = (int(w), int(h))
            else:
                raise ParseError(f"unknown synthetic spec key {key!r}")
    return spec


# ---------------------------------------------------------------------------
# extract

def cmd_extract(args) -> int:
    budget = budget_from_env(args.memory_budget)
    mode = MODE_PER_OBJECT if args.mode == "per-object" else MODE_BATCHED
    if args.annotated_out and not args.geojson:
        _diag({"event": "error", "message": "--annotated-out requires --geojson input"})
        return 2

    written: list[str] = []
    try:
        start = time.perf_counter()
        slide, regions, annotations = _ingest(args)
        table, stats = extract_all(
            regions, slide, DEFAULT_MANIFEST, mode=mode,
            budget=budget, workers=args.workers, diagnostics=_diag,
        )
        save_csv(table, args.out)
        written.append(args.out)
        if args.annotated_out:
            index = build_index(regions) if len(regions) else None
            if index is None:
                raise EmptyRegionSet("cannot write annotated output for zero objects")
            doc = write_back(index, table, annotations)
            with open(args.annotated_out, "w", encoding="utf-8") as fh:
                json.dump(doc, fh, separators=(",", ":"), sort_keys=True)
            written.append(args.annotated_out)
        wall_ms = (time.perf_counter() - start) * 1000.0
    except Exception:
        for path in written:
            try:
                os.remove(path)
            except OSError:
                pass
        raise
    _diag({
        "event": "extract_summary",
        "objects": stats.objects,
        "slabs": stats.slabs,
        "overflow": stats.overflow,
        "mode": stats.mode,
        "wall_ms": round(wall_ms, 3),
    })
    return 0


# ---------------------------------------------------------------------------
# bench

def _oracle_table(regions, slide) -> FeatureTable:
    center_x = DEFAULT_MANIFEST.index_of("SizeShape_CenterX")
    center_y = DEFAULT_MANIFEST.index_of("SizeShape_CenterY")
    rows = []
    for obj in regions:
        patch = slide.read_window(obj.bbox)
        values = oracle_features(patch, obj.mask.bits, obj.bbox)
        rows.append(FeatureRow(obj.object_id, obj.class_label,
                               values[center_x], values[center_y], values))
    return FeatureTable(DEFAULT_MANIFEST.names, tuple(rows))


def cmd_bench(args) -> int:
    if args.repeats < 1:
        _diag({"event": "error", "kind": "usage",
               "message": f"--repeats must be >= 1, got {args.repeats}"})
        return 2
    budget = budget_from_env(args.memory_budget)

    tmp = None
    if args.synthetic is not None:
        spec = _parse_synthetic_spec(args.synthetic)
        synth = generate_synthetic_slide(
            spec["seed"], slide_size=spec["slide"], n_objects=spec["objects"],
            size_range=spec["size"],
        )
        tmp = tempfile.TemporaryDirectory(prefix="pathex-bench-")
        paths = synth.write_dir(tmp.name)
        args.slide = paths["slide"]
        args.label_mask = paths["labels"]
        args.geojson = None
        args.class_map = paths["classes"]
    elif not args.slide or not (args.geojson or args.label_mask):
        _diag({"event": "error",
               "message": "bench needs --synthetic or --slide with annotations"})
        return 2

    def run_batched() -> tuple[FeatureTable, float]:
        start = time.perf_counter()
        slide, regions, _ = _ingest(args)
        table, _ = extract_all(regions, slide, DEFAULT_MANIFEST, mode=MODE_BATCHED,
                               budget=budget, workers=args.workers)
        with tempfile.NamedTemporaryFile(mode="w", suffix=".csv", delete=True) as fh:
            save_csv(table, fh.name)
        return table, (time.perf_counter() - start) * 1000.0

    def run_oracle() -> tuple[FeatureTable, float]:
        start = time.perf_counter()
        slide, regions, _ = _ingest(args)
        table = _oracle_table(regions, slide)
        with tempfile.NamedTemporaryFile(mode="w", suffix=".csv", delete=True) as fh:
            save_csv(table, fh.name)
        return table, (time.perf_counter() - start) * 1000.0

    try:
        batched_times, oracle_times = [], []
        batched_table = oracle_table = None
        for _ in range(args.repeats):
            batched_table, ms = run_batched()
            batched_times.append(ms)
        for _ in range(args.repeats):
            oracle_table, ms = run_oracle()
            oracle_times.append(ms)

        equivalence = compare_tables(oracle_table, batched_table,
                                     rtol=1e-6, atol=1e-9)
        result = {
            "objects": len(batched_table),
            "repeats": args.repeats,
            "batched_ms": median(batched_times),
            "per_object_ms": median(oracle_times),
            "speedup": median(oracle_times) / median(batched_times),
            "equivalence": equivalence.to_json(),
        }
        if not equivalence.ok:
            _emit(result)
            return 4
        if args.plot_dir:
            result["figures"] = [report_mod.plot_bench(result, args.plot_dir)]
        _emit(result)
        return 0
    finally:
        if tmp is not None:
            tmp.cleanup()


# ---------------------------------------------------------------------------
# compare

def _histogram_pair(a: np.ndarray, b: np.ndarray, bins: int):
    a = a[np.isfinite(a)]
    b = b[np.isfinite(b)]
    merged = np.concatenate([a, b])
    if merged.size == 0:
        edges = np.linspace(0.0, 1.0, bins + 1)
        return np.zeros(bins), np.zeros(bins), edges
    lo, hi = float(merged.min()), float(merged.max())
    if hi == lo:
        hi = lo + 1.0
    edges = np.linspace(lo, hi, bins + 1)
    hist_a = np.histogram(a, bins=edges)[0].astype(np.float64)
    hist_b = np.histogram(b, bins=edges)[0].astype(np.float64)
    if hist_a.sum() > 0:
        hist_a /= hist_a.sum()
    if hist_b.sum() > 0:
        hist_b /= hist_b.sum()
    return hist_a, hist_b, edges


def cmd_compare(args) -> int:
    table_a = load_csv(args.csv_a)
    table_b = load_csv(args.csv_b)
    features = [f.strip() for f in args.features.split(",") if f.strip()]
    results = []
    for feature in features:
        for table, path in ((table_a, args.csv_a), (table_b, args.csv_b)):
            if feature not in table.feature_names:
                raise ParseError(f"{path}: no column {feature!r}")
        hist_a, hist_b, edges = _histogram_pair(
            table_a.column(feature), table_b.column(feature), args.bins
        )
        results.append({
            "feature": feature,
            "l1_distance": float(np.abs(hist_a - hist_b).sum()),
            "bins": args.bins,
            "bin_edges": edges.tolist(),
            "hist_a": hist_a.tolist(),
            "hist_b": hist_b.tolist(),
        })
    ok = all(r["l1_distance"] <= args.tolerance for r in results)
    doc = {
        "tolerance": args.tolerance,
        "ok": ok,
        "features": results,
    }
    if table_a.object_ids == table_b.object_ids and \
            table_a.feature_names == table_b.feature_names:
        # row-aligned inputs also get the per-feature worst-error report
        doc["oracle_report"] = compare_tables(table_a, table_b).to_json()
    if args.plot_dir:
        doc["figures"] = report_mod.plot_compare(results, args.plot_dir)
    _emit(doc)
    return 0 if ok else 5


# ---------------------------------------------------------------------------
# inspect

def cmd_inspect(args) -> int:
    slide, regions, _ = _ingest(args)
    index = build_index(regions)
    x, y, w, h = (int(v) for v in args.window.split(","))
    window = BoundingBox(x, y, x + w, y + h)
    _emit({
        "window": [x, y, w, h],
        "ids": index.query_window(window),
        "entries": len(index),
        "height": index.height,
        "node_count": index.node_count,
    })
    return 0


# ---------------------------------------------------------------------------
# generate

def cmd_generate(args) -> int:
    lo, hi = _parse_size_pair(args.size_range, "--size-range")
    w, h = _parse_size_pair(args.slide_size, "--slide-size")
    synth = generate_synthetic_slide(
        args.seed, slide_size=(w, h), n_objects=args.objects, size_range=(lo, hi),
    )
    paths = synth.write_dir(args.out_dir)
    _emit({"objects": len(synth.regions), "paths": paths})
    return 0


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathex",
        description="Region-direct pathomics feature extraction for whole-slide images.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="extract the 247-feature table to CSV")
    _add_input_flags(p)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--mode", choices=("batched", "per-object"), default="batched")
    p.add_argument("--memory-budget", default=None,
                   help=f"slab budget in bytes (KiB/MiB/GiB suffixes; env {ENV_BUDGET})")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--annotated-out", default=None,
                   help="write annotated GeoJSON (requires --geojson input)")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("bench", help="time batched mode against the per-object oracle")
    p.add_argument("--slide")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--geojson")
    group.add_argument("--label-mask")
    p.add_argument("--class-map")
    p.add_argument("--synthetic", nargs="?", const="", default=None,
                   help="SPEC like seed=1,objects=5000,size=8:32,slide=4096x4096")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--memory-budget", default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--plot-dir", default=None, help="also render timing figure(s)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("compare", help="histogram distance between two feature CSVs")
    p.add_argument("csv_a")
    p.add_argument("csv_b")
    p.add_argument("--features", default=",".join(DEFAULT_COMPARE_FEATURES))
    p.add_argument("--bins", type=int, default=32)
    p.add_argument("--tolerance", type=float, default=0.0)
    p.add_argument("--plot-dir", default=None, help="also render histogram figures")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("inspect", help="query the spatial index")
    _add_input_flags(p)
    p.add_argument("--window", required=True, help="x,y,w,h in slide pixels")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("generate", help="write a synthetic slide bundle")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--objects", type=int, default=100)
    p.add_argument("--size-range", default="8,32")
    p.add_argument("--slide-size", default="2048,2048")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_generate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BudgetError as exc:
        _diag({"event": "error", "kind": "usage", "message": str(exc)})
        return 2
    except PackingError as exc:
        _diag({"event": "error", "kind": "packing", "message": str(exc)})
        return 6
    except (ParseError, EmptyRegionSet, BoundsError, JoinError,
            IndexBuildError, OSError, ValueError) as exc:
        _diag({"event": "error", "kind": "input", "message": str(exc)})
        return 3
    except PathexError as exc:
        _diag({"event": "error", "kind": "internal", "message": str(exc)})
        return 3


if __name__ == "__main__":
    sys.exit(main())
