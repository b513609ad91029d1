import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jsar.errors import EvaluationError, ResultsFormatError, SequenceFormatError
from jsar.evaluation import (
    PRECISION_THRESHOLDS,
    SUCCESS_THRESHOLDS,
    ResultsFile,
    SequenceRecord,
    center_error,
    evaluate,
    evaluate_rects,
    filter_by_tag,
    format_groundtruth,
    format_results,
    iou,
    load_sequence,
    parse_groundtruth,
    parse_results,
    read_results,
    write_metrics,
    write_results,
)
from tracker_utils.io import read_text, write_image, write_text_atomic
from tracker_utils.testing import assert_in_range, assert_monotone

TOY_TRUTH = [(0.0, 0.0, 10.0, 10.0), (0.0, 0.0, 10.0, 10.0)]
TOY_PREDICTED = [(0.0, 0.0, 10.0, 10.0), (30.0, 0.0, 10.0, 10.0)]

rects = st.tuples(
    st.floats(-50, 50), st.floats(-50, 50), st.floats(0.5, 80), st.floats(0.5, 80),
)


def _make_sequence(root, truth_lines, frames=None, tags=None):
    frames = len(truth_lines) if frames is None else frames
    for i in range(frames):
        write_image(str(root / "img" / f"{i + 1:05d}.png"), np.zeros((8, 8, 3), np.uint8))
    if truth_lines is not None:
        write_text_atomic(str(root / "groundtruth.txt"), "\n".join(truth_lines) + "\n")
    if tags:
        write_text_atomic(str(root / "tags.txt"), "\n".join(tags) + "\n")
    return root


# =============================================================================
# Metric oracles
# =============================================================================

def test_iou_and_center_error_by_hand():
    assert iou((0, 0, 2, 2), (1, 0, 2, 2)) == pytest.approx(1 / 3, abs=1e-12)
    assert iou((0, 0, 2, 2), (5, 5, 2, 2)) == 0.0
    assert iou((0, 0, 2, 2), (0, 0, 2, 2)) == 1.0
    assert center_error((0, 0, 2, 2), (3, 4, 2, 2)) == 5.0


def test_two_frame_toy_fixture():
    result = evaluate_rects(TOY_PREDICTED, TOY_TRUTH, fps=12.5)
    assert result.precision_20 == 0.5
    interior = (SUCCESS_THRESHOLDS > 0) & (SUCCESS_THRESHOLDS < 1)
    np.testing.assert_allclose(result.success_curve[interior], 0.5, atol=1e-12)
    assert result.success_curve[-1] == 0.0
    assert result.auc == pytest.approx(25 / 51, abs=1e-12)
    assert result.fps == 12.5
    assert result.frames_evaluated == 2
    assert result.mean_iou == pytest.approx(0.5)


def test_evaluate_a_results_file_against_a_sequence():
    rows = [(i, *rect, 0.05, "tracked") for i, rect in enumerate(TOY_PREDICTED)]
    results = ResultsFile("toy", "0123456789abcdef", 40.0, rows)
    result = evaluate(results, SequenceRecord("toy", ["00001.png", "00002.png"], TOY_TRUTH))
    assert result.precision_20 == 0.5
    assert result.fps == 40.0
    with pytest.raises(EvaluationError, match="no groundtruth"):
        evaluate(results, SequenceRecord("toy", ["00001.png", "00002.png"], None))


def test_perfect_tracking():
    truth = [(float(i), 5.0, 20.0, 10.0) for i in range(7)]
    result = evaluate_rects(truth, truth)
    assert result.precision_curve[0] == 0.0
    assert np.all(result.precision_curve[1:] == 1.0)
    assert result.auc == pytest.approx(50 / 51)


def test_out_of_view_frames_are_excluded():
    truth = [(0.0, 0.0, 10.0, 10.0), None, (0.0, 0.0, 10.0, 10.0)]
    predicted = [(0.0, 0.0, 10.0, 10.0), (300.0, 300.0, 5.0, 5.0), (0.0, 0.0, 10.0, 10.0)]
    result = evaluate_rects(predicted, truth)
    assert result.frames_evaluated == 2
    assert math.isnan(result.ious[1])
    assert result.precision_20 == 1.0


def test_evaluation_errors():
    with pytest.raises(EvaluationError, match="2 result rows vs 3"):
        evaluate_rects(TOY_PREDICTED, TOY_TRUTH + [(0.0, 0.0, 1.0, 1.0)])
    with pytest.raises(EvaluationError):
        evaluate_rects([(0.0, 0.0, 1.0, 1.0)], [None])


@settings(max_examples=50, deadline=None)
@given(pairs=st.lists(st.tuples(rects, rects), min_size=1, max_size=20))
def test_curves_are_monotone_and_bounded(pairs):
    predicted, truth = zip(*pairs)
    result = evaluate_rects(list(predicted), list(truth))
    assert_monotone(result.precision_curve, increasing=True, name="precision")
    assert_monotone(result.success_curve, increasing=False, name="success")
    assert_in_range(result.precision_curve, 0.0, 1.0)
    assert_in_range(result.ious, 0.0, 1.0 + 1e-9)
    assert 0.0 <= result.auc <= 1.0
    assert len(result.precision_curve) == len(PRECISION_THRESHOLDS) == 51


@settings(max_examples=30, deadline=None)
@given(pairs=st.lists(st.tuples(rects, rects), min_size=2, max_size=20), seed=st.integers(0, 2 ** 32 - 1))
def test_metrics_ignore_frame_order(pairs, seed):
    order = np.random.default_rng(seed).permutation(len(pairs))
    predicted, truth = zip(*pairs)
    shuffled_predicted, shuffled_truth = zip(*[pairs[i] for i in order])
    result = evaluate_rects(list(predicted), list(truth))
    shuffled = evaluate_rects(list(shuffled_predicted), list(shuffled_truth))
    np.testing.assert_allclose(shuffled.precision_curve, result.precision_curve, atol=1e-12)
    np.testing.assert_allclose(shuffled.success_curve, result.success_curve, atol=1e-12)
    assert shuffled.auc == pytest.approx(result.auc, abs=1e-12)
    assert shuffled.mean_iou == pytest.approx(result.mean_iou, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(a=rects, b=rects)
def test_iou_is_symmetric(a, b):
    assert iou(a, b) == pytest.approx(iou(b, a))


# =============================================================================
# Groundtruth and sequences
# =============================================================================

def test_groundtruth_separators_and_nan():
    truth = parse_groundtruth("1,2,3,4\n5\t6\t7\t8\n9 10  11 12\nNaN,NaN,NaN,NaN\n\n")
    assert truth == [(1.0, 2.0, 3.0, 4.0), (5.0, 6.0, 7.0, 8.0), (9.0, 10.0, 11.0, 12.0), None]
    assert parse_groundtruth(format_groundtruth(truth)) == truth


@pytest.mark.parametrize("text,match", [
    ("1,2,3\n", "line 1"),
    ("1,2,3,4\n1,2,x,4\n", "line 2"),
    ("1,2,0,4\n", "positive size"),
    ("1,2,inf,4\n", "line 1"),
])
def test_groundtruth_errors_name_the_line(text, match):
    with pytest.raises(SequenceFormatError, match=match):
        parse_groundtruth(text)


def test_load_sequence(tmp_path):
    root = _make_sequence(tmp_path / "bike1", ["1,1,4,4", "2,2,4,4", "NaN,NaN,NaN,NaN"], tags=["scale_variation", ""])
    record = load_sequence(str(root))
    assert record.name == "bike1"
    assert len(record) == 3 and record.has_truth
    assert [p.rsplit("/", 1)[-1] for p in record.frame_paths] == ["00001.png", "00002.png", "00003.png"]
    assert record.truth[2] is None
    assert record.tags == frozenset({"scale_variation"})
    assert filter_by_tag([record], "scale_variation") == [record]
    assert filter_by_tag([record], "full_occlusion") == []


def test_load_sequence_without_groundtruth(tmp_path):
    root = _make_sequence(tmp_path / "free", None, frames=2)
    assert load_sequence(str(root), require_truth=False).truth is None
    with pytest.raises(SequenceFormatError, match="missing groundtruth"):
        load_sequence(str(root))


def test_load_sequence_errors(tmp_path):
    with pytest.raises(SequenceFormatError, match="no PNG/BMP frames"):
        load_sequence(str(tmp_path / "empty"))
    root = _make_sequence(tmp_path / "short", ["1,1,4,4"], frames=2)
    with pytest.raises(SequenceFormatError, match="1 groundtruth lines for 2 frames"):
        load_sequence(str(root))
    root = _make_sequence(tmp_path / "hidden", ["NaN,NaN,NaN,NaN", "1,1,4,4"])
    with pytest.raises(SequenceFormatError, match="first frame"):
        load_sequence(str(root))


# =============================================================================
# Results and metrics files
# =============================================================================

def _results():
    return ResultsFile(
        sequence="bike1", config_hash="0123456789abcdef", fps=31.25,
        rows=[(0, 1.0, 2.0, 3.0, 4.0, 0.05, "tracked"), (1, 1.5, 2.5, 3.0, 4.0, 0.009, "redetecting")],
        curves={"precision": [0.0, 0.5, 1.0]},
    )


def test_results_file_layout(tmp_path):
    path = str(tmp_path / "bike1.results.txt")
    write_results(_results(), path)
    lines = read_text(path).splitlines()
    assert lines[:4] == ["# sequence: bike1", "# config_hash: 0123456789abcdef", "# fps: 31.250000",
                         "idx,x,y,w,h,zeta,status"]
    assert lines[4] == "0,1.000000,2.000000,3.000000,4.000000,0.050000,tracked"
    assert lines[-1] == "curve,precision,0.000000,0.500000,1.000000"
    parsed = read_results(path)
    assert parsed.rows == _results().rows
    assert parsed.curves == _results().curves
    assert parsed.rects() == [(1.0, 2.0, 3.0, 4.0), (1.5, 2.5, 3.0, 4.0)]


@pytest.mark.parametrize("mutate,match", [
    (lambda t: t.replace("0,1.000000,2.000000,", "0,1.000000,"), "line 5"),
    (lambda t: t.replace("1,1.500000", "x,1.500000"), "line 6"),
    (lambda t: t.replace("# fps: 31.250000\n", ""), "fps"),
])
def test_results_errors(mutate, match):
    with pytest.raises(ResultsFormatError, match=match):
        parse_results(mutate(format_results(_results())))


def test_missing_results_file(tmp_path):
    with pytest.raises(ResultsFormatError, match="not found"):
        read_results(str(tmp_path / "nope.txt"))


def test_metrics_file(tmp_path):
    path = str(tmp_path / "toy.metrics.txt")
    write_metrics(evaluate_rects(TOY_PREDICTED, TOY_TRUTH, fps=10.0), path, sequence="toy")
    text = read_text(path)
    assert "precision_20 = 0.500000" in text
    assert f"auc = {25 / 51:.6f}" in text
    assert text.count("curve,") == 2
