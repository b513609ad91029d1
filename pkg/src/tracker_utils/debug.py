import os
import csv
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path

from .config import is_logging_enabled, get_run_id

_log_dir = None
_run_timestamp = None

# Per-frame events appear in this order (detect -> size -> re-detection branch).
EVENT_KINDS = ("detect", "size_update", "redetect_enter", "proposal_stats", "reinit")


def _get_run_timestamp() -> str:
    global _run_timestamp
    if _run_timestamp is None:
        run_id = os.environ.get('RUN_ID', '')
        # Extract timestamp from run_id (format: name-YYYYMMDD-HHMMSS)
        parts = run_id.rsplit('-', 2)
        if len(parts) >= 2 and len(parts[-2]) == 8 and len(parts[-1]) == 6:
            _run_timestamp = f"{parts[-2]}-{parts[-1]}"
        else:
            _run_timestamp = datetime.now().strftime('%Y%m%d-%H%M%S')
    return _run_timestamp


def get_log_dir() -> Path:
    global _log_dir
    if _log_dir is None:
        if os.environ.get('LOG_DIR'):
            _log_dir = Path(os.environ['LOG_DIR'])
        else:
            _log_dir = Path("logs") / _get_run_timestamp()
        _log_dir.mkdir(parents=True, exist_ok=True)
    return _log_dir


def _append_csv(filename: str, row: dict, fieldnames: list):
    if not is_logging_enabled():
        return
    filepath = get_log_dir() / filename
    file_exists = filepath.exists()
    with open(filepath, 'a', newline='', encoding='utf-8') as f:
        writer = csv.DictWriter(f, fieldnames=fieldnames)
        if not file_exists:
            writer.writeheader()
        writer.writerow(row)


def log_run_start(command: str):
    _append_csv("runs.csv", {
        "timestamp": datetime.now().isoformat(),
        "run_id": get_run_id(),
        "command": command,
        "event": "start",
        "status": "",
        "error": ""
    }, ["timestamp", "run_id", "command", "event", "status", "error"])


def log_run_end(command: str, status="completed", error=None):
    _append_csv("runs.csv", {
        "timestamp": datetime.now().isoformat(),
        "run_id": get_run_id(),
        "command": command,
        "event": "end",
        "status": status,
        "error": str(error) if error else ""
    }, ["timestamp", "run_id", "command", "event", "status", "error"])


def log_sequence_output(sequence: str, frames: int, fps: float, precision_20=None, auc=None):
    _append_csv("sequences.csv", {
        "timestamp": datetime.now().isoformat(),
        "run_id": get_run_id(),
        "sequence": sequence,
        "frames": frames,
        "fps": round(fps, 2),
        "precision_20": "" if precision_20 is None else round(precision_20, 6),
        "auc": "" if auc is None else round(auc, 6),
    }, ["timestamp", "run_id", "sequence", "frames", "fps", "precision_20", "auc"])


# =============================================================================
# RunLog: per-tracker event stream
#
# Always kept in memory (tests and the tracker read it back); mirrored to a
# TSV file when a sink path is attached. One line per event:
#     frame<TAB>kind<TAB>k=v,k=v
# Every event is appended and flushed on its own, so a crash keeps all
# earlier frames.
# =============================================================================

@dataclass(frozen=True)
class RunEvent:
    frame: int
    kind: str
    payload: dict

    def to_line(self) -> str:
        fields = ",".join(f"{k}={_format_value(v)}" for k, v in self.payload.items())
        return f"{self.frame}\t{self.kind}\t{fields}"


def _format_value(value) -> str:
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def _parse_value(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_event_line(line: str) -> RunEvent:
    frame, kind, fields = line.rstrip("\n").split("\t")
    payload = {}
    for item in filter(None, fields.split(",")):
        key, value = item.split("=", 1)
        payload[key] = _parse_value(value)
    return RunEvent(int(frame), kind, payload)


@dataclass
class RunLog:
    sink: Path | None = None
    events: list[RunEvent] = field(default_factory=list)

    def log(self, frame: int, kind: str, **payload) -> RunEvent:
        if kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind: {kind}")
        if self.events and self.events[-1].frame == frame:
            if EVENT_KINDS.index(kind) < EVENT_KINDS.index(self.events[-1].kind):
                raise ValueError(f"frame {frame}: {kind} logged after {self.events[-1].kind}")
        elif self.events and frame < self.events[-1].frame:
            raise ValueError(f"frame {frame} logged after frame {self.events[-1].frame}")

        event = RunEvent(frame, kind, payload)
        self.events.append(event)
        if self.sink is not None:
            with open(self.sink, "a", encoding="utf-8") as f:
                f.write(event.to_line() + "\n")
                f.flush()
        return event

    def of_kind(self, kind: str) -> list[RunEvent]:
        return [e for e in self.events if e.kind == kind]

    def for_frame(self, frame: int) -> list[RunEvent]:
        return [e for e in self.events if e.frame == frame]


def open_run_log(name: str, path: Path | str | None = None) -> RunLog:
    """RunLog for one tracked sequence.

    Writes to `path` when given, to <log dir>/<name>.events.tsv when
    ENABLE_LOGGING=true, and stays in memory otherwise. An existing file is
    truncated so each run starts a fresh stream.
    """
    if path is None and is_logging_enabled():
        path = get_log_dir() / f"{name}.events.tsv"
    if path is None:
        return RunLog()
    sink = Path(path)
    sink.parent.mkdir(parents=True, exist_ok=True)
    sink.write_text("", encoding="utf-8")
    return RunLog(sink=sink)


def read_run_log(path: Path | str) -> list[RunEvent]:
    text = Path(path).read_text(encoding="utf-8")
    return [parse_event_line(line) for line in text.splitlines() if line]
