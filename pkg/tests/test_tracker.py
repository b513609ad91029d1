from dataclasses import replace
from itertools import islice

import numpy as np
import pytest

from jsar import tracker
from jsar.boxes import Bbox4DoF
from jsar.errors import DegenerateBoxError, TrackerError
from jsar.evaluation import center_error
from jsar.synthetic import iter_frames, preset
from tracker_utils.debug import RunLog
from tracker_utils.testing import assert_boxes_valid


def _frames(name, count, seed=0):
    scenario = preset(name, seed=seed)
    return list(islice(iter_frames(scenario), count)), scenario.truth()[:count]


def _run(name, count, cfg, table, run_log=None):
    frames, truth = _frames(name, count)
    output = tracker.run_sequence(frames, Bbox4DoF.from_rect(truth[0]), cfg, table=table, run_log=run_log)
    return output, truth


def test_boxes_roundtrip_between_center_and_corner():
    box = Bbox4DoF.from_rect((10.0, 20.0, 30.0, 40.0))
    assert (box.cx, box.cy) == (25.0, 40.0)
    assert box.to_rect() == (10.0, 20.0, 30.0, 40.0)
    with pytest.raises(DegenerateBoxError):
        Bbox4DoF(1.0, 1.0, 0.0, 5.0)
    with pytest.raises(DegenerateBoxError):
        Bbox4DoF(float("nan"), 1.0, 5.0, 5.0)


def test_first_record_is_the_initial_box(cfg, table):
    frames, truth = _frames("static", 1)
    t = tracker.create(frames[0], Bbox4DoF.from_rect(truth[0]), cfg, table=table)
    assert t.first_record.index == 0
    assert t.first_record.bbox.to_rect() == pytest.approx(truth[0])
    assert t.first_record.status == tracker.TRACKED
    assert t.first_record.zeta > 0


def test_static_object_stays_put(cfg, table):
    output, truth = _run("static", 12, cfg, table)
    assert len(output) == 12
    assert set(output.statuses) == {tracker.TRACKED}
    assert_boxes_valid(output.rects(), frame_size=(640, 360), min_side=4.0)
    assert max(center_error(p, t) for p, t in zip(output.rects(), truth)) < 2.0
    assert output.fps > 0


def test_drift_is_followed(cfg, table):
    output, truth = _run("drift", 20, cfg, table)
    assert center_error(output.rects()[-1], truth[-1]) < 5.0


def test_translation_only_holds_the_size(cfg, table):
    output, truth = _run("zoom_in", 10, replace(cfg, mode="translation-only"), table)
    assert {r.bbox.size for r in output.records} == {tuple(truth[0][2:])}


def test_baseline_keeps_the_aspect_ratio(cfg, table):
    output, _ = _run("aspect_shear", 10, replace(cfg, mode="multi-scale-baseline"), table)
    ratios = [r.bbox.w / r.bbox.h for r in output.records]
    np.testing.assert_allclose(ratios, ratios[0], rtol=1e-9)


def test_events_are_logged_per_frame(cfg, table):
    log = RunLog()
    output, _ = _run("static", 6, cfg, table, run_log=log)
    assert [e.frame for e in log.of_kind("detect")] == list(range(1, 6))
    assert [e.frame for e in log.of_kind("size_update")] == list(range(1, 6))
    for event, record in zip(log.of_kind("detect"), output.records[1:]):
        assert event.payload["zeta"] == record.zeta
    assert not log.of_kind("redetect_enter")


def test_step_matches_run_sequence(cfg, table):
    frames, truth = _frames("drift", 5)
    batch = tracker.run_sequence(frames, Bbox4DoF.from_rect(truth[0]), cfg, table=table)
    t = tracker.create(frames[0], Bbox4DoF.from_rect(truth[0]), cfg, table=table)
    stepped = [tracker.step(t, f) for f in frames[1:]]
    assert [r.bbox for r in stepped] == [r.bbox for r in batch.records[1:]]


def test_redetection_takes_over_below_the_threshold(cfg, table):
    # zeta_e above any reachable peak forces the branch from frame 1 on.
    forced = replace(cfg, mode="jsar-re", zeta_e=10.0, eta_d=5.0, eta_floor=5.0)
    log = RunLog()
    output, truth = _run("static", 4, forced, table, run_log=log)
    assert output.statuses[1:] == [tracker.REDETECTING] * 3
    assert [e.frame for e in log.of_kind("redetect_enter")] == [1]
    assert [e.frame for e in log.of_kind("proposal_stats")] == [1, 2, 3]
    assert all(r.bbox == output.records[0].bbox for r in output.records[1:])
    omegas = [e.payload["omega"] for e in log.of_kind("proposal_stats")]
    assert omegas == sorted(omegas) and omegas[1] > omegas[0]


def test_redetection_reinitializes_on_a_confident_proposal(cfg, table):
    forced = replace(cfg, mode="jsar-re", zeta_e=10.0, eta_d=1e-6, eta_floor=1e-6)
    log = RunLog()
    output, _ = _run("static", 3, forced, table, run_log=log)
    assert output.statuses[1] == tracker.REINITIALIZED
    assert [e.frame for e in log.of_kind("reinit")][0] == 1


def test_empty_sequence_is_an_error(cfg, table):
    with pytest.raises(TrackerError):
        tracker.run_sequence([], Bbox4DoF(10.0, 10.0, 5.0, 5.0), cfg, table=table)


def test_reinitialization_keeps_the_decision_filter(cfg, table):
    forced = replace(cfg, mode="jsar-re", zeta_e=10.0, eta_d=1e-6, eta_floor=1e-6)
    frames, truth = _frames("static", 2)
    t = tracker.create(frames[0], Bbox4DoF.from_rect(truth[0]), forced, table=table)
    before = t.redetect.decision
    assert t.step(frames[1]).status == tracker.REINITIALIZED
    assert t.redetect.decision is before
    assert t.trans is not before and not t.redetect.active


def test_replay_is_bit_identical(cfg, table):
    first, _ = _run("aspect_shear", 8, cfg, table)
    second, _ = _run("aspect_shear", 8, cfg, table)
    assert [(r.bbox, r.zeta, r.status) for r in first.records] == [(r.bbox, r.zeta, r.status) for r in second.records]


def test_size_filter_is_inert_on_a_static_scene(cfg, table):
    joint, _ = _run("static", 10, cfg, table)
    fixed, _ = _run("static", 10, replace(cfg, mode="translation-only"), table)
    assert [r.bbox.center for r in joint.records] == [r.bbox.center for r in fixed.records]


def test_aspect_changes_by_powers_of_phi(cfg, table):
    output, _ = _run("aspect_shear", 15, cfg, table)
    ratios = [r.bbox.w / r.bbox.h for r in output.records]
    steps = np.log(np.array(ratios[1:]) / np.array(ratios[:-1])) / np.log(cfg.phi ** 2)
    np.testing.assert_allclose(steps, np.round(steps), atol=1e-9)
