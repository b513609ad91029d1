"""End-to-end scenarios on the synthetic presets (run with -m slow)."""

from dataclasses import replace

import pytest

from jsar.boxes import Bbox4DoF
from jsar.evaluation import evaluate_rects, iou
from jsar.settings import TrackerConfig
from jsar.synthetic import iter_frames, preset
from jsar.tracker import run_sequence
from tracker_utils.debug import RunLog
from tracker_utils.testing import assert_monotone

pytestmark = pytest.mark.slow

REAPPEAR_AT = 40
REACQUIRE_WITHIN = 10


def _track(name, cfg, table, seed=0, run_log=None):
    scenario = preset(name, seed=seed)
    truth = [rect if visible else None for rect, visible in zip(scenario.truth(), scenario.visibility())]
    frames = list(iter_frames(scenario))  # rendered up front: fps covers tracking only
    output = run_sequence(frames, Bbox4DoF.from_rect(truth[0]), cfg, table=table, run_log=run_log)
    return output, truth


def _mean_iou(name, cfg, table):
    output, truth = _track(name, cfg, table)
    return evaluate_rects(output.rects(), truth, output.fps)


def _reacquired(output, truth) -> bool:
    window = range(REAPPEAR_AT, min(REAPPEAR_AT + REACQUIRE_WITHIN, len(truth)))
    return any(iou(output.rects()[t], truth[t]) >= 0.5 for t in window)


def test_scale_change_is_tracked(table):
    cfg = TrackerConfig()
    joint = _mean_iou("zoom_in", cfg, table).mean_iou
    fixed = _mean_iou("zoom_in", replace(cfg, mode="translation-only"), table).mean_iou
    assert joint >= 0.7
    assert joint - fixed >= 0.15


def test_aspect_change_beats_the_fixed_aspect_pyramid(table):
    cfg = TrackerConfig()
    joint = _mean_iou("aspect_shear", cfg, table).mean_iou
    pyramid = _mean_iou("aspect_shear", replace(cfg, mode="multi-scale-baseline"), table).mean_iou
    assert joint >= 0.6
    assert joint - pyramid >= 0.1


def test_redetection_recovers_after_full_occlusion(table):
    cfg = TrackerConfig()
    with_redetect = without = 0
    for seed in range(10):
        log = RunLog()
        output, truth = _track("occlusion_20f", replace(cfg, mode="jsar-re"), table, seed=seed, run_log=log)
        with_redetect += _reacquired(output, truth)

        below = [e.frame for e in log.of_kind("detect") if e.payload["zeta"] < cfg.zeta_e]
        entered = [e.frame for e in log.of_kind("redetect_enter")]
        if below:
            assert entered and entered[0] == below[0]
        else:
            assert not entered

        output, truth = _track("occlusion_20f", cfg, table, seed=seed)
        without += _reacquired(output, truth)
    assert with_redetect >= 8
    assert without <= 3


def test_realtime_throughput(table):
    cfg = TrackerConfig()
    for name in ("static", "drift", "zoom_in"):
        output, _ = _track(name, cfg, table)
        assert output.fps >= 20.0, f"{name}: {output.fps:.1f} fps"


def test_finer_size_lattice_helps_on_aspect_change(table):
    ious, fps = [], []
    for n in (5, 9, 13):
        result = _mean_iou("aspect_shear", replace(TrackerConfig(), scale_count=n, aspect_count=n), table)
        ious.append(result.mean_iou)
        fps.append(result.fps)
    assert_monotone(ious, increasing=True, name="mean IoU over S=A")
    assert_monotone(fps, increasing=False, name="fps over S*A")
