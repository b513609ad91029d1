import os

import hypothesis
import numpy as np
import pytest

from jsar.color_names import synthesize_color_table, write_color_table
from jsar.settings import TrackerConfig
from tracker_utils import debug

np.seterr(all="warn")

hypothesis.settings.register_profile("fast", max_examples=5)
hypothesis.settings.register_profile("debugger", report_multiple_bugs=False)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(autouse=True)
def isolated_env(tmp_path, monkeypatch):
    """Every test writes under its own tmp dir with file logging off."""
    monkeypatch.setenv("JSAR_OUTPUT_DIR", str(tmp_path / "out"))
    monkeypatch.setenv("LOG_DIR", str(tmp_path / "logs"))
    for name in ("ENABLE_LOGGING", "BENCH_PARALLELISM", "JSAR_CN_TABLE", "RUN_ID"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.setattr(debug, "_log_dir", None)
    monkeypatch.setattr(debug, "_run_timestamp", None)


@pytest.fixture
def cfg():
    return TrackerConfig()


@pytest.fixture(scope="session")
def table():
    """Synthesized color-names table; the engine itself never falls back to it."""
    return synthesize_color_table()


@pytest.fixture(scope="session")
def cn_table_path(tmp_path_factory, table):
    path = str(tmp_path_factory.mktemp("cn") / "cn.bin")
    write_color_table(path, table)
    return path


@pytest.fixture
def cn_table_env(cn_table_path, monkeypatch):
    """Point JSAR_CN_TABLE at the synthesized table for code that resolves it itself."""
    monkeypatch.setenv("JSAR_CN_TABLE", cn_table_path)
    return cn_table_path


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def textured_frame():
    """240x320 RGB frame of smooth random texture, identical for every test."""
    import cv2
    gen = np.random.default_rng(7)
    coarse = gen.uniform(0, 255, size=(30, 40, 3)).astype(np.float32)
    smooth = cv2.resize(coarse, (320, 240), interpolation=cv2.INTER_CUBIC)
    return np.clip(smooth, 0, 255).astype(np.uint8)
