import os
import time

import pyarrow as pa
import pytest

from jsar.errors import ConfigError, EvaluationError, ScenarioError, SequenceFormatError, TrackerError
from tracker_utils.runner import (
    EXIT_CONFIG,
    EXIT_INPUT,
    EXIT_OK,
    EXIT_RUNTIME,
    MemoryProfiler,
    format_error,
    resolve_exit_code,
    run_tasks,
    write_error_log,
)
from tracker_utils.testing import assert_boxes_valid, assert_in_range, assert_monotone, validate_output


# =============================================================================
# Exit codes
# =============================================================================

@pytest.mark.parametrize("exc,code", [
    (None, EXIT_OK),
    (SequenceFormatError("x"), EXIT_INPUT),
    (EvaluationError("x"), EXIT_INPUT),
    (ScenarioError("x"), EXIT_INPUT),
    (FileNotFoundError("x"), EXIT_INPUT),
    (ConfigError("S", "bad"), EXIT_CONFIG),
    (TrackerError("x"), EXIT_RUNTIME),
    (RuntimeError("x"), EXIT_RUNTIME),
])
def test_exit_codes(exc, code):
    assert resolve_exit_code(exc) == code


def test_error_prefixes():
    assert format_error(ConfigError("S", "must be odd")) == "config error: S: must be odd"
    assert format_error(SequenceFormatError("no frames")) == "input error: no frames"
    assert format_error(ZeroDivisionError("boom")) == "runtime error: boom"


def test_error_log(tmp_path):
    write_error_log(tmp_path / "logs", EXIT_CONFIG, "config error: S: bad", "Traceback ...")
    text = (tmp_path / "logs" / "error.txt").read_text()
    assert text.startswith("Exit code: 3\nconfig error: S: bad\n")
    assert text.endswith("Traceback ...")


# =============================================================================
# Task execution
# =============================================================================

def _fail():
    raise SequenceFormatError("bad layout")


def test_inline_tasks_keep_submission_order():
    seen = []
    results = run_tasks([("b", lambda: 2), ("a", lambda: 1), ("c", _fail)], parallelism=1, on_result=seen.append)
    assert list(results) == ["b", "a", "c"]
    assert results["b"]["value"] == 2 and results["b"]["status"] == "done"
    assert results["c"]["status"] == "failed"
    assert results["c"]["exit_code"] == EXIT_INPUT
    assert results["c"]["error"] == "input error: bad layout"
    assert len(seen) == 3


def test_forked_tasks():
    tasks = [(f"t{i}", lambda i=i: {"pid": os.getpid(), "i": i}) for i in range(4)]
    tasks.append(("fail", _fail))
    tasks.append(("killed", lambda: os._exit(7)))
    results = run_tasks(tasks, parallelism=2)
    assert list(results) == ["t0", "t1", "t2", "t3", "fail", "killed"]
    for i in range(4):
        assert results[f"t{i}"]["value"]["i"] == i
        assert results[f"t{i}"]["value"]["pid"] != os.getpid()
    assert results["fail"]["exit_code"] == EXIT_INPUT
    assert results["killed"]["status"] == "failed"
    assert results["killed"]["exit_code"] == EXIT_RUNTIME
    assert "exited with code 7" in results["killed"]["error"]


def test_large_results_come_back():
    payload = b"x" * (1 << 20)
    results = run_tasks([("big", lambda: payload)], parallelism=2)
    assert results["big"]["value"] == payload


def test_memory_profiler_writes_samples(tmp_path):
    with MemoryProfiler(os.getpid(), tmp_path, interval=0.05):
        time.sleep(0.2)
    lines = (tmp_path / "memory.csv").read_text().splitlines()
    assert lines[0] == "timestamp,rss_mb,vms_mb,pct"
    assert len(lines) >= 2


# =============================================================================
# Assertion helpers
# =============================================================================

def test_assert_monotone():
    assert_monotone([0, 0, 1, 2])
    assert_monotone([3, 2, 2], increasing=False)
    with pytest.raises(AssertionError, match="index 2"):
        assert_monotone([0, 1, 0.5])
    with pytest.raises(AssertionError, match="strictly"):
        assert_monotone([0, 0], strict=True)


def test_assert_in_range_and_boxes():
    assert_in_range([0.0, float("nan"), 1.0], 0.0, 1.0)
    with pytest.raises(AssertionError):
        assert_in_range([1.5], 0.0, 1.0)
    assert_boxes_valid([(0.0, 0.0, 5.0, 5.0)], frame_size=(10, 10))
    with pytest.raises(AssertionError, match="size"):
        assert_boxes_valid([(0.0, 0.0, 0.0, 5.0)])
    with pytest.raises(AssertionError, match="outside"):
        assert_boxes_valid([(50.0, 0.0, 5.0, 5.0)], frame_size=(10, 10))


def test_validate_output():
    table = pa.table({"sequence": ["a", "b"], "config": ["base", "base"], "auc": [0.4, None]})
    validate_output(table, {"columns": {"sequence": "string", "auc": "double"}, "unique": ["sequence", "config"],
                            "min_rows": 2, "max_rows": 2, "ranges": {"auc": (0.0, 1.0)}})
    with pytest.raises(AssertionError, match="null"):
        validate_output(table, {"not_null": ["auc"]})
    with pytest.raises(AssertionError, match="duplicate"):
        validate_output(table, {"unique": "config"})
    with pytest.raises(AssertionError, match="Missing column"):
        validate_output(table, {"columns": {"fps": "double"}})
