"""Run lifecycle helpers shared by the CLI commands.

- `run_tasks` executes independent tasks (one per bench sequence) either
  inline or in forked worker processes, BENCH_PARALLELISM at a time. Each
  worker pipes back a pickled result dict; a worker that dies without
  sending one gets a synthesized failure result from its exit code.
- `MemoryProfiler` samples process memory (workers included) into memory.csv.
- `resolve_exit_code` maps an exception to the CLI exit code contract:

      0 = success
      2 = bad input layout (sequence, results, scenario, missing file)
      3 = configuration error
      4 = any other runtime failure
"""

import csv
import multiprocessing
import multiprocessing.connection
import pickle
import signal
import sys
import threading
import time
import traceback
from datetime import datetime
from pathlib import Path
from typing import Callable

import psutil

from jsar.errors import (
    ColorTableError,
    ConfigError,
    EvaluationError,
    ResultsFormatError,
    ScenarioError,
    SequenceFormatError,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONFIG = 3
EXIT_RUNTIME = 4
EXIT_USAGE = 64  # bad command line, sysexits EX_USAGE

INPUT_ERRORS = (SequenceFormatError, ResultsFormatError, EvaluationError, ScenarioError, ColorTableError,
                FileNotFoundError)

# Fork lets workers inherit loaded modules (numpy, cv2, the color table) without re-importing.
_MP_CTX = multiprocessing.get_context("fork")

_MAX_RESULT_PICKLE_BYTES = 10 * 1024 * 1024


# =============================================================================
# Exit codes
# =============================================================================

def resolve_exit_code(exc: BaseException | None) -> int:
    if exc is None:
        return EXIT_OK
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, INPUT_ERRORS):
        return EXIT_INPUT
    return EXIT_RUNTIME


def error_category(code: int) -> str:
    return {EXIT_INPUT: "input error", EXIT_CONFIG: "config error"}.get(code, "runtime error")


def format_error(exc: BaseException) -> str:
    """Printed failure line, prefixed with its category."""
    return f"{error_category(resolve_exit_code(exc))}: {exc}"


def write_error_log(log_dir: Path, exit_code: int, message: str, trace: str = "") -> None:
    """Write error.txt for quick triage."""
    log_dir = Path(log_dir)
    log_dir.mkdir(parents=True, exist_ok=True)
    with open(log_dir / "error.txt", "w") as f:
        f.write(f"Exit code: {exit_code}\n")
        f.write(f"{message}\n")
        if trace:
            f.write("-" * 60 + "\n")
            f.write(trace)


# =============================================================================
# Memory profiling
# =============================================================================

class MemoryProfiler:
    """Sample process memory every N seconds, write to memory.csv."""

    def __init__(self, pid: int, log_dir: Path, interval: float = 1.0):
        self.pid = pid
        self.log_file = Path(log_dir) / "memory.csv"
        self.interval = interval
        self._stop = threading.Event()
        self._thread = None

    def start(self):
        self.log_file.parent.mkdir(parents=True, exist_ok=True)
        self._thread = threading.Thread(target=self._sample_loop, daemon=True)
        self._thread.start()

    def stop(self):
        self._stop.set()
        if self._thread:
            self._thread.join(timeout=2)

    def __enter__(self):
        self.start()
        return self

    def __exit__(self, *exc):
        self.stop()
        return False

    def _sample_loop(self):
        try:
            process = psutil.Process(self.pid)
        except psutil.NoSuchProcess:
            return

        with open(self.log_file, "w", newline="") as f:
            csv.writer(f).writerow(["timestamp", "rss_mb", "vms_mb", "pct"])

        while not self._stop.is_set():
            try:
                info = process.memory_info()
                rss, vms = info.rss, info.vms
                pct = process.memory_percent()
                for child in process.children(recursive=True):
                    try:
                        child_info = child.memory_info()
                        rss += child_info.rss
                        vms += child_info.vms
                        pct += child.memory_percent()
                    except (psutil.NoSuchProcess, psutil.AccessDenied):
                        pass

                with open(self.log_file, "a", newline="") as f:
                    csv.writer(f).writerow([
                        datetime.now().isoformat(),
                        round(rss / 1024 / 1024, 1),
                        round(vms / 1024 / 1024, 1),
                        round(pct, 1),
                    ])
            except (psutil.NoSuchProcess, psutil.AccessDenied):
                break

            self._stop.wait(self.interval)


# =============================================================================
# Task execution
# =============================================================================

def _execute(fn: Callable, task_id: str) -> dict:
    """Run one task and describe the outcome as a result dict.

        {
            "task_id": str,
            "status": "done" | "failed",
            "duration_s": float,
            "value": whatever fn returned (only when done),
            "error": str, "exit_code": int, "traceback": str (only when failed),
        }
    """
    started = time.perf_counter()
    result: dict = {"task_id": task_id, "status": "failed"}
    try:
        result["value"] = fn()
        result["status"] = "done"
    except Exception as e:
        result["error"] = format_error(e)
        result["exit_code"] = resolve_exit_code(e)
        result["traceback"] = traceback.format_exc()
    result["duration_s"] = time.perf_counter() - started
    return result


def _child_entrypoint(fn: Callable, task_id: str, pipe_w) -> None:
    signal.signal(signal.SIGTERM, signal.SIG_DFL)
    signal.signal(signal.SIGINT, signal.SIG_DFL)
    result = _execute(fn, task_id)

    # Flush before sending; fork-inherited pipes can drop the last buffered line.
    sys.stdout.flush()
    sys.stderr.flush()
    try:
        payload = pickle.dumps(result)
        if len(payload) > _MAX_RESULT_PICKLE_BYTES:
            raise ValueError(f"result too large ({len(payload)} bytes > {_MAX_RESULT_PICKLE_BYTES})")
        pipe_w.send_bytes(payload)
    except Exception as e:
        try:
            pipe_w.send_bytes(pickle.dumps({
                "task_id": task_id,
                "status": "failed",
                "duration_s": result.get("duration_s", 0.0),
                "error": f"runtime error: failed to serialize result: {e}",
                "exit_code": EXIT_RUNTIME,
                "traceback": traceback.format_exc(),
            }))
        except Exception:
            pass
    finally:
        try:
            pipe_w.close()
        except Exception:
            pass


def _spawn(fn: Callable, task_id: str):
    pipe_r, pipe_w = _MP_CTX.Pipe(duplex=False)
    proc = _MP_CTX.Process(target=_child_entrypoint, args=(fn, task_id, pipe_w), name=f"task:{task_id}")
    proc.start()
    # The child holds its own write end; drop ours so EOF is clean on child exit.
    pipe_w.close()
    return proc, pipe_r


def _collect(proc, pipe_r, task_id: str) -> dict:
    """Read a worker's result, then join it; synthesize a failure if it died first.

    The pipe is drained before join so a result larger than the pipe buffer
    cannot block the worker on send.
    """
    result = None
    try:
        result = pickle.loads(pipe_r.recv_bytes())
    except (EOFError, OSError, pickle.UnpicklingError):
        result = None
    proc.join()
    try:
        pipe_r.close()
    except Exception:
        pass
    if result is not None:
        return result

    exitcode = proc.exitcode
    if exitcode is not None and exitcode < 0:
        try:
            signame = signal.Signals(-exitcode).name
        except (ValueError, AttributeError):
            signame = f"signal {-exitcode}"
        error = f"runtime error: worker killed by {signame}; likely OOM or external kill"
    else:
        error = f"runtime error: worker exited with code {exitcode} before sending a result"
    return {"task_id": task_id, "status": "failed", "duration_s": 0.0, "error": error,
            "exit_code": EXIT_RUNTIME, "traceback": ""}


def run_tasks(tasks: list[tuple[str, Callable]], parallelism: int = 1,
              on_result: Callable[[dict], None] | None = None) -> dict[str, dict]:
    """Run (task_id, fn) pairs; return result dicts keyed by task_id, in submission order.

    parallelism 1 runs inline in this process; more forks that many workers.
    """
    results: dict[str, dict] = {}

    def record(result: dict):
        results[result["task_id"]] = result
        if on_result is not None:
            on_result(result)

    if parallelism <= 1:
        for task_id, fn in tasks:
            record(_execute(fn, task_id))
        return {task_id: results[task_id] for task_id, _ in tasks}

    pending = list(tasks)
    in_flight: dict = {}
    while pending or in_flight:
        while pending and len(in_flight) < parallelism:
            task_id, fn = pending.pop(0)
            proc, pipe_r = _spawn(fn, task_id)
            in_flight[proc] = (task_id, pipe_r)
        # A pipe turns readable when its worker sends a result or exits without one.
        ready = multiprocessing.connection.wait([pipe_r for _, pipe_r in in_flight.values()], timeout=1.0)
        for proc in [p for p, (_, pipe_r) in list(in_flight.items()) if pipe_r in ready]:
            task_id, pipe_r = in_flight.pop(proc)
            record(_collect(proc, pipe_r, task_id))
    return {task_id: results[task_id] for task_id, _ in tasks}