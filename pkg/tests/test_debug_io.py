import csv

import numpy as np
import pytest

from tracker_utils import debug
from tracker_utils.config import get_bench_parallelism, get_output_dir, is_logging_enabled, validate_environment
from tracker_utils.debug import RunLog, log_run_end, log_run_start, log_sequence_output, open_run_log, read_run_log
from tracker_utils.io import (
    exists,
    list_files,
    read_bytes,
    read_image,
    read_text,
    write_bytes_atomic,
    write_image,
    write_text_atomic,
)


# =============================================================================
# Environment
# =============================================================================

def test_environment_defaults(tmp_path):
    assert get_output_dir() == str(tmp_path / "out")
    assert get_bench_parallelism() == 1
    assert not is_logging_enabled()
    validate_environment()


@pytest.mark.parametrize("name,value,match", [
    ("BENCH_PARALLELISM", "0", "BENCH_PARALLELISM"),
    ("BENCH_PARALLELISM", "many", "BENCH_PARALLELISM"),
    ("JSAR_CN_TABLE", "/nonexistent/cn.bin", "JSAR_CN_TABLE"),
])
def test_environment_errors(monkeypatch, name, value, match):
    monkeypatch.setenv(name, value)
    with pytest.raises(ValueError, match=match):
        validate_environment()


# =============================================================================
# Run logs
# =============================================================================

def test_run_log_keeps_event_order():
    log = RunLog()
    log.log(1, "detect", zeta=0.02)
    log.log(1, "size_update", n_s=1, n_a=0)
    log.log(2, "detect", zeta=0.01)
    log.log(2, "redetect_enter", zeta=0.01, zeta_e=0.0105)
    assert [e.kind for e in log.for_frame(2)] == ["detect", "redetect_enter"]
    with pytest.raises(ValueError, match="logged after"):
        log.log(2, "detect", zeta=0.0)
    with pytest.raises(ValueError, match="frame 1 logged after frame 2"):
        log.log(1, "reinit")
    with pytest.raises(ValueError, match="unknown event kind"):
        log.log(3, "teleport")


def test_run_log_file_sink(tmp_path):
    path = tmp_path / "seq.events.tsv"
    path.write_text("stale\n")
    log = open_run_log("seq", path)
    log.log(1, "detect", zeta=0.0123456789, cx=10.5)
    log.log(1, "proposal_stats", count=30, eta_b=0.03)
    lines = path.read_text().splitlines()
    assert lines[0] == "1\tdetect\tzeta=0.0123456789,cx=10.5"
    events = read_run_log(path)
    assert events == log.events
    assert events[1].payload == {"count": 30, "eta_b": 0.03}


def test_run_log_stays_in_memory_without_logging():
    assert open_run_log("seq").sink is None


def test_csv_logs_when_enabled(monkeypatch, tmp_path):
    monkeypatch.setenv("ENABLE_LOGGING", "true")
    monkeypatch.setenv("RUN_ID", "bench-20260101-120000")
    log_run_start("track")
    log_sequence_output("bike1", 10, 31.4159, precision_20=0.75, auc=None)
    log_run_end("track", status="failed", error="input error: bad")
    rows = list(csv.DictReader(open(tmp_path / "logs" / "runs.csv")))
    assert [r["event"] for r in rows] == ["start", "end"]
    assert rows[1]["status"] == "failed" and rows[1]["error"] == "input error: bad"
    seq = list(csv.DictReader(open(tmp_path / "logs" / "sequences.csv")))
    assert seq[0]["fps"] == "31.42" and seq[0]["auc"] == ""
    assert open_run_log("bike1").sink == tmp_path / "logs" / "bike1.events.tsv"


def test_log_dir_from_run_id(monkeypatch, tmp_path):
    monkeypatch.delenv("LOG_DIR")
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("RUN_ID", "nightly-20260102-030405")
    log_dir = debug.get_log_dir()
    assert log_dir.parts[-2:] == ("logs", "20260102-030405")
    assert (tmp_path / log_dir).is_dir()


def test_nothing_written_when_disabled(tmp_path):
    log_run_start("track")
    assert not (tmp_path / "logs" / "runs.csv").exists()


# =============================================================================
# File I/O
# =============================================================================

def test_bytes_and_text(tmp_path):
    path = str(tmp_path / "deep" / "dir" / "f.txt")
    write_text_atomic(path, "hello\n")
    assert read_text(path) == "hello\n"
    assert exists(path)
    write_bytes_atomic(path, b"bye")
    assert read_bytes(path) == b"bye"
    assert read_bytes(str(tmp_path / "missing")) is None
    assert [p.name for p in (tmp_path / "deep" / "dir").iterdir()] == ["f.txt"]


def test_list_files_filters_and_sorts(tmp_path):
    for name in ("b.png", "a.BMP", "c.txt", "00010.png", "00002.png"):
        (tmp_path / name).write_bytes(b"")
    names = [p.rsplit("/", 1)[-1] for p in list_files(str(tmp_path), (".png", ".bmp"))]
    assert names == ["00002.png", "00010.png", "a.BMP", "b.png"]
    assert list_files(str(tmp_path / "nope"), (".png",)) == []


@pytest.mark.parametrize("suffix", [".png", ".bmp"])
def test_images_are_rgb_and_lossless(tmp_path, rng, suffix):
    image = rng.integers(0, 256, size=(12, 9, 3)).astype(np.uint8)
    path = str(tmp_path / f"frame{suffix}")
    write_image(path, image)
    np.testing.assert_array_equal(read_image(path), image)


def test_image_errors(tmp_path):
    with pytest.raises(ValueError, match="unsupported"):
        write_image(str(tmp_path / "frame.jpg"), np.zeros((4, 4, 3), np.uint8))
    with pytest.raises(FileNotFoundError):
        read_image(str(tmp_path / "missing.png"))
    (tmp_path / "junk.png").write_bytes(b"not an image")
    with pytest.raises(ValueError, match="cannot decode"):
        read_image(str(tmp_path / "junk.png"))
