"""Track one sequence directory and write its results file.

    python src/main.py track data/seq/bike1 --mode jsar-re --out out/ --overlay

Writes `<out>/<sequence>.results.txt` (per-frame boxes, confidence, status;
precision/success curves appended when groundtruth exists) and, with
--overlay, `<out>/<sequence>.overlay/00001.png ...` with the predicted box in
green and the truth box in red. Groundtruth is optional: without it the first
box comes from --init.
"""

from pathlib import Path
from typing import Callable, Iterable

import cv2
import numpy as np

from jsar.boxes import Bbox4DoF
from jsar.color_names import resolve_color_table
from jsar.errors import SequenceFormatError
from jsar.evaluation import evaluate_rects, load_sequence, results_from_output, write_results
from jsar.settings import MODES, TrackerConfig, config_hash, load_config, override
from jsar.tracker import TrackerOutput, run_sequence
from tracker_utils.config import get_output_dir
from tracker_utils.debug import log_sequence_output, open_run_log
from tracker_utils.io import read_image, write_image

COMMAND = "track"
HELP = "run the tracker over a sequence directory"

PREDICTED_COLOR = (0, 255, 0)
TRUTH_COLOR = (255, 0, 0)


def add_arguments(parser):
    parser.add_argument("sequence", help="sequence directory (img/ + optional groundtruth.txt)")
    parser.add_argument("--config", help="tracker config file (key = value)")
    parser.add_argument("--mode", choices=MODES, help="override the config's mode")
    parser.add_argument("--out", help="output directory (default: $JSAR_OUTPUT_DIR)")
    parser.add_argument("--overlay", action="store_true", help="write frames with boxes burned in")
    parser.add_argument("--init", help="first-frame box x,y,w,h when there is no groundtruth")


def resolve_config(args) -> TrackerConfig:
    cfg = load_config(getattr(args, "config", None))
    if getattr(args, "mode", None):
        cfg = override(cfg, "mode", args.mode)
    return cfg


def parse_init(text: str) -> tuple[float, float, float, float]:
    parts = [p for p in text.replace(" ", ",").split(",") if p]
    try:
        rect = tuple(float(p) for p in parts)
    except ValueError:
        rect = ()
    if len(rect) != 4 or rect[2] <= 0 or rect[3] <= 0:
        raise SequenceFormatError(f"--init needs x,y,w,h with positive size, got {text!r}")
    return rect


# =============================================================================
# Overlays
# =============================================================================

def _draw(frame: np.ndarray, rect, color) -> None:
    x, y, w, h = rect
    cv2.rectangle(frame, (int(round(x)), int(round(y))), (int(round(x + w)), int(round(y + h))), color, 2)


def write_overlays(frames: Iterable[np.ndarray], output: TrackerOutput, truth, out_dir: Path) -> int:
    """Burn predicted (and truth, when known) boxes into each frame; returns frames written."""
    count = 0
    for i, (frame, record) in enumerate(zip(frames, output.records)):
        canvas = np.ascontiguousarray(frame.copy())
        if truth is not None and truth[i] is not None:
            _draw(canvas, truth[i], TRUTH_COLOR)
        _draw(canvas, record.bbox.to_rect(), PREDICTED_COLOR)
        cv2.putText(canvas, f"{record.status} {record.zeta:.4f}", (8, 20),
                    cv2.FONT_HERSHEY_SIMPLEX, 0.5, PREDICTED_COLOR, 1, cv2.LINE_AA)
        write_image(str(out_dir / f"{i + 1:05d}.png"), canvas)
        count += 1
    return count


# =============================================================================
# Pipeline
# =============================================================================

def track_frames(name: str, frame_source: Callable[[], Iterable[np.ndarray]], truth, cfg: TrackerConfig,
                 out_dir: str, init_rect=None, overlay: bool = False, table=None) -> dict:
    """Track, write results (and overlays), evaluate when truth exists.

    `frame_source` is called once for tracking and once more for overlays so
    frames are never all held in memory. Returns a summary row for bench.
    """
    if init_rect is None:
        if not truth or truth[0] is None:
            raise SequenceFormatError(f"{name}: no first-frame groundtruth; pass --init x,y,w,h")
        init_rect = truth[0]

    run_log = open_run_log(name)
    output = run_sequence(frame_source(), Bbox4DoF.from_rect(init_rect), cfg, table=table, run_log=run_log)

    results = results_from_output(output, name, config_hash(cfg))
    metrics = None
    if truth is not None:
        metrics = evaluate_rects(output.rects(), truth, output.fps)
        results.curves = {
            "precision": [float(v) for v in metrics.precision_curve],
            "success": [float(v) for v in metrics.success_curve],
        }
    out = Path(out_dir)
    results_path = out / f"{name}.results.txt"
    write_results(results, str(results_path))
    if overlay:
        write_overlays(frame_source(), output, truth, out / f"{name}.overlay")

    log_sequence_output(name, len(output), output.fps,
                        None if metrics is None else metrics.precision_20,
                        None if metrics is None else metrics.auc)
    return {
        "sequence": name,
        "mode": cfg.mode,
        "config_hash": results.config_hash,
        "frames": len(output),
        "fps": float(output.fps),
        "precision_20": None if metrics is None else metrics.precision_20,
        "auc": None if metrics is None else metrics.auc,
        "mean_iou": None if metrics is None else metrics.mean_iou,
        "redetect_frames": sum(1 for s in output.statuses if s == "redetecting"),
        "results_path": str(results_path),
    }


def track_directory(directory: str, cfg: TrackerConfig, out_dir: str, init_rect=None, overlay: bool = False,
                    table=None) -> dict:
    record = load_sequence(directory, require_truth=init_rect is None)
    return track_frames(
        record.name,
        lambda: (read_image(p) for p in record.frame_paths),
        record.truth,
        cfg,
        out_dir,
        init_rect=init_rect,
        overlay=overlay,
        table=table,
    )


def run(args) -> int:
    cfg = resolve_config(args)
    init_rect = parse_init(args.init) if args.init else None
    out_dir = args.out or get_output_dir()
    table = resolve_color_table(cfg.cn_table)

    print(f"Tracking {args.sequence} (mode={cfg.mode})...")
    summary = track_directory(args.sequence, cfg, out_dir, init_rect=init_rect, overlay=args.overlay, table=table)
    print(f"  {summary['frames']} frames at {summary['fps']:.1f} fps")
    if summary["auc"] is not None:
        print(f"  precision@20: {summary['precision_20']:.3f}  AUC: {summary['auc']:.3f}")
    print(f"  results: {summary['results_path']}")
    return 0
