"""One-pass evaluation: sequence ingestion, precision/success curves, results files.

Sequence layout (UAV123-style):

    <seq>/img/*.png|*.bmp   frames, lexicographic order
    <seq>/groundtruth.txt   one `x,y,w,h` line per frame (comma, tab or
                            whitespace separated; NaN marks out-of-view)
    <seq>/tags.txt          optional, one attribute tag per line

Metric conventions: precision counts frames with center error strictly
below each threshold 0..50 px; success counts frames with IoU strictly
above each threshold 0, 0.02, ..., 1.0. AUC is the mean of those 51
success samples. Out-of-view frames leave both denominators.

Results file:

    # sequence: <name>
    # config_hash: <16 hex>
    # fps: <float>
    idx,x,y,w,h,zeta,status
    0,10.000000,...
    curve,precision,<v0>,<v1>,...

Numbers are written with 6 decimals.
"""

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from tracker_utils.io import IMAGE_SUFFIXES, list_files, read_text, write_text_atomic
from .errors import EvaluationError, ResultsFormatError, SequenceFormatError

PRECISION_THRESHOLDS = np.arange(0, 51, dtype=np.float64)
SUCCESS_THRESHOLDS = np.linspace(0.0, 1.0, 51)
PRECISION_AT = 20
RESULTS_HEADER = "idx,x,y,w,h,zeta,status"

_SPLIT = re.compile(r"[,\t ]+")


@dataclass(frozen=True)
class SequenceRecord:
    name: str
    frame_paths: list[str]
    truth: list[tuple[float, float, float, float] | None] | None
    tags: frozenset[str] = frozenset()

    def __len__(self) -> int:
        return len(self.frame_paths)

    @property
    def has_truth(self) -> bool:
        return self.truth is not None


@dataclass
class EvalResult:
    center_errors: np.ndarray     # NaN on out-of-view frames
    ious: np.ndarray              # NaN on out-of-view frames
    precision_curve: np.ndarray   # over PRECISION_THRESHOLDS
    success_curve: np.ndarray     # over SUCCESS_THRESHOLDS
    precision_20: float
    auc: float
    fps: float
    frames_evaluated: int

    @property
    def mean_iou(self) -> float:
        return float(np.nanmean(self.ious))


@dataclass
class ResultsFile:
    sequence: str
    config_hash: str
    fps: float
    rows: list[tuple[int, float, float, float, float, float, str]]
    curves: dict[str, list[float]] = field(default_factory=dict)

    def rects(self) -> list[tuple[float, float, float, float]]:
        return [(r[1], r[2], r[3], r[4]) for r in self.rows]


# =============================================================================
# Sequences
# =============================================================================

def parse_groundtruth(text: str, source: str = "groundtruth.txt") -> list[tuple | None]:
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    truth = []
    for lineno, line in enumerate(lines, start=1):
        fields = [f for f in _SPLIT.split(line.strip()) if f]
        if len(fields) != 4:
            raise SequenceFormatError(f"{source} line {lineno}: expected 4 fields, got {line!r}")
        try:
            values = tuple(float(f) for f in fields)
        except ValueError:
            raise SequenceFormatError(f"{source} line {lineno}: unparseable value in {line!r}") from None
        if any(math.isnan(v) for v in values):
            truth.append(None)
            continue
        if not all(math.isfinite(v) for v in values) or values[2] <= 0 or values[3] <= 0:
            raise SequenceFormatError(f"{source} line {lineno}: needs finite values and positive size, got {line!r}")
        truth.append(values)
    return truth


def load_sequence(directory: str, require_truth: bool = True) -> SequenceRecord:
    """Validated sequence record from a sequence directory."""
    directory = Path(directory)
    frames = list_files(str(directory / "img"), IMAGE_SUFFIXES)
    if not frames:
        raise SequenceFormatError(f"{directory}: no PNG/BMP frames under img/")

    gt_path = directory / "groundtruth.txt"
    text = read_text(str(gt_path))
    truth = None
    if text is None:
        if require_truth:
            raise SequenceFormatError(f"{directory}: missing groundtruth.txt")
    else:
        truth = parse_groundtruth(text, str(gt_path))
        if len(truth) != len(frames):
            raise SequenceFormatError(
                f"{gt_path}: {len(truth)} groundtruth lines for {len(frames)} frames"
            )
        if truth[0] is None:
            raise SequenceFormatError(f"{gt_path} line 1: first frame must have a box")

    tags_text = read_text(str(directory / "tags.txt")) or ""
    tags = frozenset(t.strip() for t in tags_text.splitlines() if t.strip())
    return SequenceRecord(name=directory.name, frame_paths=frames, truth=truth, tags=tags)


def filter_by_tag(records: list[SequenceRecord], tag: str) -> list[SequenceRecord]:
    return [r for r in records if tag in r.tags]


def format_groundtruth(truth: list[tuple | None]) -> str:
    lines = []
    for rect in truth:
        lines.append("NaN,NaN,NaN,NaN" if rect is None else ",".join(f"{v:.6f}" for v in rect))
    return "\n".join(lines) + "\n"


# =============================================================================
# Metrics
# =============================================================================

def iou(a, b) -> float:
    """Intersection over union of two (x, y, w, h) rectangles."""
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    iw = max(0.0, min(ax + aw, bx + bw) - max(ax, bx))
    ih = max(0.0, min(ay + ah, by + bh) - max(ay, by))
    inter = iw * ih
    union = aw * ah + bw * bh - inter
    return float(inter / union) if union > 0 else 0.0


def center_error(a, b) -> float:
    """Euclidean distance between rectangle centers."""
    return float(math.hypot((a[0] + a[2] / 2.0) - (b[0] + b[2] / 2.0), (a[1] + a[3] / 2.0) - (b[1] + b[3] / 2.0)))


def evaluate_rects(predicted, truth, fps: float = 0.0) -> EvalResult:
    if len(predicted) != len(truth):
        raise EvaluationError(f"length mismatch: {len(predicted)} result rows vs {len(truth)} groundtruth rows")
    n = len(truth)
    errors = np.full(n, np.nan)
    overlaps = np.full(n, np.nan)
    for i, (p, t) in enumerate(zip(predicted, truth)):
        if t is None:
            continue
        errors[i] = center_error(p, t)
        overlaps[i] = iou(p, t)
    valid = ~np.isnan(errors)
    if not valid.any():
        raise EvaluationError("no frame with groundtruth to evaluate (all out of view)")

    e, o = errors[valid], overlaps[valid]
    precision = (e[np.newaxis, :] < PRECISION_THRESHOLDS[:, np.newaxis]).mean(axis=1)
    success = (o[np.newaxis, :] > SUCCESS_THRESHOLDS[:, np.newaxis]).mean(axis=1)
    return EvalResult(
        center_errors=errors,
        ious=overlaps,
        precision_curve=precision,
        success_curve=success,
        precision_20=float(precision[PRECISION_AT]),
        auc=float(success.mean()),
        fps=float(fps),
        frames_evaluated=int(valid.sum()),
    )


def evaluate(output, truth: SequenceRecord) -> EvalResult:
    """Metrics for a TrackerOutput or ResultsFile against a sequence's groundtruth."""
    if truth.truth is None:
        raise EvaluationError(f"{truth.name}: no groundtruth to evaluate against")
    return evaluate_rects(output.rects(), truth.truth, getattr(output, "fps", 0.0))


# =============================================================================
# Results files
# =============================================================================

def results_from_output(output, sequence: str, config_hash: str) -> ResultsFile:
    rows = []
    for r in output.records:
        x, y, w, h = r.bbox.to_rect()
        rows.append((r.index, x, y, w, h, r.zeta, r.status))
    return ResultsFile(sequence=sequence, config_hash=config_hash, fps=output.fps, rows=rows)


def format_results(result: ResultsFile) -> str:
    lines = [
        f"# sequence: {result.sequence}",
        f"# config_hash: {result.config_hash}",
        f"# fps: {result.fps:.6f}",
        RESULTS_HEADER,
    ]
    for idx, x, y, w, h, zeta, status in result.rows:
        lines.append(f"{idx},{x:.6f},{y:.6f},{w:.6f},{h:.6f},{zeta:.6f},{status}")
    for name, values in result.curves.items():
        lines.append(",".join(["curve", name] + [f"{v:.6f}" for v in values]))
    return "\n".join(lines) + "\n"


def write_results(result: ResultsFile, path: str) -> None:
    write_text_atomic(path, format_results(result))


def parse_results(text: str, source: str = "results") -> ResultsFile:
    header = {}
    rows = []
    curves = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            header[key.strip()] = value.strip()
            continue
        if line == RESULTS_HEADER:
            continue
        fields = line.split(",")
        if fields[0] == "curve":
            if len(fields) < 2:
                raise ResultsFormatError(f"{source} line {lineno}: curve without a name")
            try:
                curves[fields[1]] = [float(v) for v in fields[2:]]
            except ValueError:
                raise ResultsFormatError(f"{source} line {lineno}: bad curve value") from None
            continue
        if len(fields) != 7:
            raise ResultsFormatError(f"{source} line {lineno}: expected 7 fields, got {len(fields)} in {line!r}")
        try:
            rows.append((int(fields[0]), *(float(v) for v in fields[1:6]), fields[6]))
        except ValueError:
            raise ResultsFormatError(f"{source} line {lineno}: unparseable row {line!r}") from None

    for key in ("sequence", "config_hash", "fps"):
        if key not in header:
            raise ResultsFormatError(f"{source}: missing '# {key}:' header")
    try:
        fps = float(header["fps"])
    except ValueError:
        raise ResultsFormatError(f"{source}: bad fps header {header['fps']!r}") from None
    return ResultsFile(sequence=header["sequence"], config_hash=header["config_hash"], fps=fps,
                       rows=rows, curves=curves)


def read_results(path: str) -> ResultsFile:
    text = read_text(path)
    if text is None:
        raise ResultsFormatError(f"results file not found: {path}")
    return parse_results(text, path)


def format_metrics(result: EvalResult, sequence: str = "") -> str:
    lines = [
        f"# sequence: {sequence}",
        f"precision_20 = {result.precision_20:.6f}",
        f"auc = {result.auc:.6f}",
        f"fps = {result.fps:.6f}",
        f"frames_evaluated = {result.frames_evaluated}",
        ",".join(["curve", "precision"] + [f"{v:.6f}" for v in result.precision_curve]),
        ",".join(["curve", "success"] + [f"{v:.6f}" for v in result.success_curve]),
    ]
    return "\n".join(lines) + "\n"


def write_metrics(result: EvalResult, path: str, sequence: str = "") -> None:
    write_text_atomic(path, format_metrics(result, sequence))
