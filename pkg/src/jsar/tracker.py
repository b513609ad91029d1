"""Per-frame tracking loop.

Each frame:

1. translation detect at the previous center and size -> center, zeta
2. jsar-re only: zeta < zeta_e -> re-detection branch, models frozen:
   proposals around the last confident box, decision-filter scoring,
   re-initialize on eta_b > eta_d, otherwise escalate and report the last
   confident box with status "redetecting"
3. size detect at the new center (jsar, jsar-re; skipped on the frame after
   a re-initialization)
4. update translation (theta_trans) and size (theta_size) filters; update
   the decision filter when zeta > zeta_s

Modes:
    jsar                  translation + size filter
    jsar-re               jsar + re-detection
    translation-only      size held at the initial box
    multi-scale-baseline  5-level pyramid on the translation filter, fixed aspect
"""

import time
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from tracker_utils.debug import RunLog
from . import redetection, size, translation
from .boxes import Bbox4DoF
from .color_names import resolve_color_table
from .errors import TrackerError
from .settings import TrackerConfig

TRACKED = "tracked"
REDETECTING = "redetecting"
REINITIALIZED = "reinitialized"
STATUSES = (TRACKED, REDETECTING, REINITIALIZED)


@dataclass(frozen=True)
class TrackerRecord:
    index: int
    bbox: Bbox4DoF
    zeta: float
    status: str


@dataclass
class TrackerOutput:
    records: list[TrackerRecord] = field(default_factory=list)
    fps: float = 0.0
    elapsed: float = 0.0

    def rects(self) -> list[tuple[float, float, float, float]]:
        return [r.bbox.to_rect() for r in self.records]

    @property
    def statuses(self) -> list[str]:
        return [r.status for r in self.records]

    @property
    def zetas(self) -> list[float]:
        return [r.zeta for r in self.records]

    def __len__(self) -> int:
        return len(self.records)


class Tracker:
    """One tracker instance, single owner. Created on the first frame."""

    def __init__(self, frame: np.ndarray, init_bbox: Bbox4DoF, cfg: TrackerConfig,
                 table: np.ndarray | None = None, run_log: RunLog | None = None):
        self.cfg = cfg
        self.table = resolve_color_table(cfg.cn_table) if table is None else table
        self.log = run_log if run_log is not None else RunLog()
        self.frame_index = 0
        self.size_state: size.SizeState | None = None
        self.redetect: redetection.RedetectState | None = None
        self._initialize(frame, init_bbox)
        zeta = float(translation.response_at(self.trans, frame, init_bbox.center, init_bbox.size, cfg, self.table).max())
        self.first_record = TrackerRecord(0, init_bbox, zeta, TRACKED)

    def _initialize(self, frame, bbox: Bbox4DoF) -> None:
        """Train every filter from scratch at `bbox` (first frame and re-initialization)."""
        cfg = self.cfg
        self.bbox = bbox
        self.last_confident = bbox
        self.trans = translation.init(frame, bbox, cfg, self.table)
        if cfg.size_filter_enabled:
            self.size_state = size.init_size(frame, bbox.center, bbox.w, bbox.h, cfg)
        if cfg.redetection_enabled:
            # Same features and label as translation; the trained model is shared at start.
            # Re-initialization keeps the decision filter trained before the loss.
            if self.redetect is None:
                self.redetect = redetection.init_redetect(self.trans, cfg)
            else:
                self.redetect = redetection.reset(self.redetect, cfg)
        self.skip_size = False

    def step(self, frame: np.ndarray) -> TrackerRecord:
        cfg = self.cfg
        self.frame_index += 1
        t = self.frame_index

        if cfg.mode == "multi-scale-baseline":
            outcome = translation.detect_multiscale(self.trans, frame, self.bbox.center, self.bbox.size, cfg, self.table)
        else:
            outcome = translation.detect(self.trans, frame, self.bbox.center, self.bbox.size, cfg, self.table)
        zeta = outcome.zeta
        self.log.log(t, "detect", zeta=zeta, cx=outcome.center[0], cy=outcome.center[1])

        if cfg.redetection_enabled and redetection.monitor(zeta, cfg.zeta_e):
            return self._redetect(frame, t, zeta)
        if self.redetect is not None and self.redetect.active:
            self.redetect = redetection.reset(self.redetect, cfg)

        frame_h, frame_w = frame.shape[:2]
        w = float(np.clip(self.bbox.w * outcome.scale, size.MIN_SIDE, 2.0 * frame_w))
        h = float(np.clip(self.bbox.h * outcome.scale, size.MIN_SIDE, 2.0 * frame_h))
        bbox = Bbox4DoF(outcome.center[0], outcome.center[1], w, h)

        estimate = None
        if cfg.size_filter_enabled and not self.skip_size:
            estimate = size.detect_size(self.size_state, frame, bbox.center, w, h, cfg)
            bbox = bbox.with_size(estimate.w, estimate.h)
            self.log.log(t, "size_update", n_s=estimate.n_s, n_a=estimate.n_a, w=estimate.w, h=estimate.h)
        self.skip_size = False

        sample = translation.training_sample(self.trans, frame, bbox, cfg, self.table)
        self.trans = translation.update_with_sample(self.trans, sample, cfg.theta_trans, cfg)
        if estimate is not None:
            self.size_state = size.update_size(self.size_state, estimate.sample, cfg.theta_size,
                                               shift=(estimate.n_s, estimate.n_a))
        elif self.size_state is not None:
            size_sample = size.sample_size_domain(frame, bbox.center, bbox.w, bbox.h,
                                                  self.size_state.grid, cfg, self.size_state.window)
            self.size_state = size.update_size(self.size_state, size_sample, cfg.theta_size)
        if self.redetect is not None and redetection.should_update_decision(zeta, cfg.zeta_s):
            decision = self.redetect.decision
            if decision.template != self.trans.template:
                sample = translation.training_sample(decision, frame, bbox, cfg, self.table)
            self.redetect = redetection.update_decision(self.redetect, sample, cfg, zeta=zeta)

        self.bbox = bbox
        self.last_confident = bbox
        return TrackerRecord(t, bbox, zeta, TRACKED)

    def _redetect(self, frame: np.ndarray, t: int, zeta: float) -> TrackerRecord:
        cfg = self.cfg
        state = self.redetect
        if not state.active:
            state = replace(state, active=True)
            self.log.log(t, "redetect_enter", zeta=zeta, zeta_e=cfg.zeta_e)

        proposals = redetection.generate_proposals(frame, self.last_confident, state.omega, cfg.proposal_count)
        score = redetection.score_proposals(state.decision, frame, proposals, cfg, self.table)
        self.log.log(t, "proposal_stats", count=len(proposals), eta_b=score.eta_b, eta_d=state.eta_d,
                     omega=state.omega, best_k=score.best.k)

        if redetection.decide_reinit(score.eta_b, state.eta_d):
            bbox = Bbox4DoF(score.center[0], score.center[1], score.best.w, score.best.h)
            self._initialize(frame, bbox)
            self.skip_size = True
            self.log.log(t, "reinit", cx=bbox.cx, cy=bbox.cy, w=bbox.w, h=bbox.h, eta_b=score.eta_b)
            return TrackerRecord(t, bbox, zeta, REINITIALIZED)

        frame_h, frame_w = frame.shape[:2]
        bound = redetection.max_omega(self.last_confident, frame_w, frame_h)
        self.redetect = redetection.escalate(state, cfg, bound)
        return TrackerRecord(t, self.last_confident, zeta, REDETECTING)


def create(frame: np.ndarray, init_bbox: Bbox4DoF, cfg: TrackerConfig, table=None, run_log=None) -> Tracker:
    return Tracker(frame, init_bbox, cfg, table=table, run_log=run_log)


def step(tracker: Tracker, frame: np.ndarray) -> TrackerRecord:
    return tracker.step(frame)


def run_sequence(frames: Iterable[np.ndarray], init_bbox: Bbox4DoF, cfg: TrackerConfig,
                 table=None, run_log=None) -> TrackerOutput:
    """Create on the first frame, step through the rest; fps = frames / elapsed seconds."""
    iterator = iter(frames)
    start = time.perf_counter()
    try:
        first = next(iterator)
    except StopIteration:
        raise TrackerError("run_sequence needs at least one frame") from None
    tracker = create(first, init_bbox, cfg, table=table, run_log=run_log)
    output = TrackerOutput(records=[tracker.first_record])
    for frame in iterator:
        output.records.append(tracker.step(frame))
    output.elapsed = time.perf_counter() - start
    output.fps = len(output.records) / output.elapsed if output.elapsed > 0 else float("inf")
    return output
