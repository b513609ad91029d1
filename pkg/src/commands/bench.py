"""Track + evaluate many sequences and print a ranked table.

    python src/main.py bench data/seq/* --config jsar.cfg --out out/bench
    python src/main.py bench --presets static,zoom_in,aspect_shear
    python src/main.py bench --presets aspect_shear --sweep S+A=5,9,13
    python src/main.py bench data/uav123/* --tag full_occlusion --mode jsar-re

Sources are sequence directories and/or synthetic presets rendered in memory.
`--sweep key=v1,v2` reruns everything once per value (`k1+k2=...` sets
several keys to the same value); each configuration writes into
`<out>/<config hash>/`. Sequences run in forked workers, BENCH_PARALLELISM at
a time. The summary is printed ranked by AUC, with fps per run and the mean,
and saved to `<out>/bench.parquet`.
"""

import io
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import pyarrow as pa
import pyarrow.parquet as pq
from tqdm import tqdm

from jsar.color_names import resolve_color_table
from jsar.errors import ConfigError
from jsar.evaluation import filter_by_tag, load_sequence
from jsar.settings import FIELD_TO_KEY, MODES, TrackerConfig, config_hash, override
from jsar.synthetic import iter_frames, preset
from tracker_utils.config import get_bench_parallelism, get_output_dir, is_logging_enabled
from tracker_utils.debug import get_log_dir
from tracker_utils.io import read_image, write_bytes_atomic
from tracker_utils.runner import EXIT_OK, MemoryProfiler, run_tasks
from .track import resolve_config, track_frames

COMMAND = "bench"
HELP = "track and evaluate many sequences, print a ranked table"

SUMMARY_SCHEMA = pa.schema([
    ("sequence", pa.string()),
    ("config", pa.string()),
    ("config_hash", pa.string()),
    ("mode", pa.string()),
    ("frames", pa.int64()),
    ("fps", pa.float64()),
    ("precision_20", pa.float64()),
    ("auc", pa.float64()),
    ("mean_iou", pa.float64()),
    ("redetect_frames", pa.int64()),
])


@dataclass(frozen=True)
class Source:
    name: str
    frame_source: Callable
    truth: list | None
    tags: frozenset


def add_arguments(parser):
    parser.add_argument("sequences", nargs="*", help="sequence directories")
    parser.add_argument("--presets", help="comma-separated synthetic presets to render in memory")
    parser.add_argument("--seed", type=int, default=0, help="seed for --presets")
    parser.add_argument("--config", help="tracker config file (key = value)")
    parser.add_argument("--mode", choices=MODES, help="override the config's mode")
    parser.add_argument("--sweep", help="key=v1,v2,... (or k1+k2=v1,v2,...) to rerun per value")
    parser.add_argument("--tag", help="only sequences carrying this attribute tag")
    parser.add_argument("--out", help="output directory (default: $JSAR_OUTPUT_DIR)")


# =============================================================================
# Sources and configurations
# =============================================================================

def collect_sources(directories: list[str], presets: str | None, seed: int, tag: str | None) -> list[Source]:
    sources = []
    records = [load_sequence(d, require_truth=True) for d in directories]
    if tag:
        records = filter_by_tag(records, tag)
    for record in records:
        paths = record.frame_paths
        sources.append(Source(record.name, lambda paths=paths: (read_image(p) for p in paths),
                              record.truth, record.tags))

    for name in filter(None, (p.strip() for p in (presets or "").split(","))):
        scenario = preset(name, seed=seed)
        if tag and tag not in scenario.tags:
            continue
        truth = [rect if visible else None for rect, visible in zip(scenario.truth(), scenario.visibility())]
        sources.append(Source(scenario.name, lambda s=scenario: iter_frames(s), truth, scenario.tags))
    return sources


def parse_sweep(text: str) -> tuple[list[str], list[str]]:
    if "=" not in text:
        raise ConfigError("sweep", f"expected key=v1,v2,..., got {text!r}")
    keys, values = text.split("=", 1)
    keys = [k.strip() for k in keys.split("+") if k.strip()]
    values = [v.strip() for v in values.split(",") if v.strip()]
    if not keys or not values:
        raise ConfigError("sweep", f"expected key=v1,v2,..., got {text!r}")
    return keys, values


def sweep_configs(base: TrackerConfig, sweep: str | None) -> list[tuple[str, TrackerConfig]]:
    """(label, config) pairs; the base alone when there is no sweep."""
    if not sweep:
        return [("base", base)]
    keys, values = parse_sweep(sweep)
    configs = []
    for value in values:
        cfg = base
        for key in keys:
            cfg = override(cfg, FIELD_TO_KEY.get(key, key), value)
        configs.append(("+".join(keys) + f"={value}", cfg))
    return configs


# =============================================================================
# Reporting
# =============================================================================

def summary_table(rows: list[dict]) -> pa.Table:
    return pa.Table.from_pylist([{f.name: row.get(f.name) for f in SUMMARY_SCHEMA} for row in rows],
                                schema=SUMMARY_SCHEMA)


def write_summary(rows: list[dict], path: Path) -> None:
    buffer = io.BytesIO()
    pq.write_table(summary_table(rows), buffer)
    write_bytes_atomic(str(path), buffer.getvalue())


def _rank_key(row: dict):
    auc = row.get("auc")
    return (auc is None or (isinstance(auc, float) and math.isnan(auc)), -(auc or 0.0), row["sequence"], row["config"])


def format_table(rows: list[dict]) -> list[str]:
    lines = [f"{'#':>3}  {'sequence':<24} {'config':<18} {'frames':>6} {'fps':>7} {'prec@20':>8} {'AUC':>6}"]
    for rank, row in enumerate(sorted(rows, key=_rank_key), start=1):
        prec = "-" if row.get("precision_20") is None else f"{row['precision_20']:.3f}"
        auc = "-" if row.get("auc") is None else f"{row['auc']:.3f}"
        lines.append(f"{rank:>3}  {row['sequence']:<24} {row['config']:<18} {row['frames']:>6} "
                     f"{row['fps']:>7.1f} {prec:>8} {auc:>6}")
    return lines


def mean_fps(rows: list[dict]) -> float:
    return sum(r["fps"] for r in rows) / len(rows) if rows else 0.0


# =============================================================================
# Main
# =============================================================================

def run(args) -> int:
    base = resolve_config(args)
    configs = sweep_configs(base, args.sweep)
    sources = collect_sources(args.sequences, args.presets, args.seed, args.tag)
    if not sources:
        print("No sequences to benchmark (pass directories or --presets; check --tag)")
        return EXIT_OK

    out = Path(args.out or get_output_dir())
    # Loaded before forking so workers share the tables.
    tables = {cfg.cn_table: resolve_color_table(cfg.cn_table) for _, cfg in configs}
    tasks = []
    for label, cfg in configs:
        cfg_out = out if len(configs) == 1 else out / config_hash(cfg)
        for source in sources:
            def task(source=source, cfg=cfg, cfg_out=cfg_out, label=label):
                row = track_frames(source.name, source.frame_source, source.truth, cfg, str(cfg_out),
                                   table=tables[cfg.cn_table])
                row["config"] = label
                return row
            tasks.append((f"{label}:{source.name}", task))

    parallelism = get_bench_parallelism()
    print(f"Benchmarking {len(sources)} sequence(s) x {len(configs)} config(s), parallelism={parallelism}")

    profiler = MemoryProfiler(os.getpid(), get_log_dir()) if is_logging_enabled() else None
    if profiler:
        profiler.start()
    try:
        with tqdm(total=len(tasks), desc="bench", unit="seq") as progress:
            results = run_tasks(tasks, parallelism=parallelism, on_result=lambda _: progress.update(1))
    finally:
        if profiler:
            profiler.stop()

    rows = [r["value"] for r in results.values() if r["status"] == "done"]
    failures = [r for r in results.values() if r["status"] != "done"]
    for failure in failures:
        print(f"  {failure['task_id']} failed: {failure['error']}")

    if rows:
        for line in format_table(rows):
            print(line)
        print(f"mean fps: {mean_fps(rows):.1f} over {len(rows)} run(s)")
        if len(configs) > 1:
            for label, _ in configs:
                scored = [r["auc"] for r in rows if r["config"] == label and r["auc"] is not None]
                if scored:
                    print(f"  {label}: mean AUC {sum(scored) / len(scored):.3f}")
        write_summary(rows, out / "bench.parquet")
        print(f"  summary: {out / 'bench.parquet'}")

    return failures[0]["exit_code"] if failures else EXIT_OK
