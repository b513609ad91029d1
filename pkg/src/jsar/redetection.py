"""Long-term support: failure monitor, proposals, decision filter, escalation.

When the translation peak zeta drops below zeta_e the tracker stops updating
and, every frame, (1) sweeps candidate boxes inside a square of side
omega * sqrt(w * h) around the last confident center, (2) keeps the N_e best
by edge objectness, (3) scores each with the decision filter. If the best
decision peak eta_b beats eta_d the tracker re-initializes there; otherwise
omega grows and eta_d shrinks for the next frame. eta_d never drops below
eta_floor_ratio times the mean zeta of the pure samples, so background
clutter seen while the object is hidden cannot pass as a re-detection.

The decision filter shares the translation filter's features, label and
template, and is only updated from frames whose zeta exceeds zeta_s. It
survives re-initialization: a new translation model starts from the
proposal, the decision filter keeps what it learned before the loss.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from . import translation
from .boxes import Bbox4DoF
from .edges import build_edge_map, edge_groups, objectness
from .errors import DegenerateBoxError, TrackerError

SCALES = (0.8, 1.0, 1.25)
ASPECTS = (0.75, 1.0, 1.33)
REGION_FRACTIONS = (1 / 4, 1 / 3, 1 / 2)
BASE_STRIDE = 4.0
MAX_CANDIDATES = 20000


@dataclass(frozen=True)
class Proposal:
    x: float
    y: float
    w: float
    h: float
    k: float

    @property
    def center(self) -> tuple[float, float]:
        return self.x + self.w / 2.0, self.y + self.h / 2.0

    def to_rect(self) -> tuple[float, float, float, float]:
        return self.x, self.y, self.w, self.h


@dataclass(frozen=True)
class ProposalScore:
    best: Proposal
    eta_b: float
    center: tuple[float, float]  # best proposal's center moved to its decision-response peak
    index: int


@dataclass(frozen=True)
class RedetectState:
    decision: translation.TranslationState
    active: bool
    omega: float
    eta_d: float
    escalations: int = 0
    zeta_total: float = 0.0  # over pure samples
    pure_frames: int = 0

    @property
    def zeta_mean(self) -> float | None:
        return self.zeta_total / self.pure_frames if self.pure_frames else None


# =============================================================================
# Threshold tests
# =============================================================================

def monitor(zeta: float, zeta_e: float) -> bool:
    """Tracking failure: zeta strictly below zeta_e."""
    return zeta < zeta_e


def should_update_decision(zeta: float, zeta_s: float) -> bool:
    """Only pure samples (zeta strictly above zeta_s) train the decision filter."""
    return zeta > zeta_s


def decide_reinit(eta_b: float, eta_d: float) -> bool:
    return eta_b > eta_d


# =============================================================================
# State
# =============================================================================

def init_redetect(decision: translation.TranslationState, cfg) -> RedetectState:
    return RedetectState(decision=decision, active=False, omega=cfg.omega, eta_d=cfg.eta_d)


def reset(state: RedetectState, cfg) -> RedetectState:
    return replace(state, active=False, omega=cfg.omega, eta_d=cfg.eta_d, escalations=0)


def max_omega(last_bbox: Bbox4DoF, frame_w: int, frame_h: int) -> float:
    """omega at which the search square covers the frame from any center in it."""
    return 2.0 * max(frame_w, frame_h) / math.sqrt(last_bbox.w * last_bbox.h)


def eta_floor(state: RedetectState, cfg) -> float:
    """Lowest eta_d escalation may reach: eta_floor_ratio of the pure-sample zeta mean, at least eta_floor."""
    mean = state.zeta_mean
    if mean is None:
        return cfg.eta_floor
    return max(cfg.eta_floor, cfg.eta_floor_ratio * mean)


def escalate(state: RedetectState, cfg, omega_bound: float = math.inf) -> RedetectState:
    """Widen the search and lower the re-init bar for the next frame."""
    omega = min(state.omega * cfg.omega_rate, max(omega_bound, cfg.omega))
    eta_d = max(state.eta_d * cfg.eta_rate, min(eta_floor(state, cfg), state.eta_d))
    return replace(state, omega=omega, eta_d=eta_d, escalations=state.escalations + 1)


# =============================================================================
# Proposals
# =============================================================================

def search_region(frame_shape, last_bbox: Bbox4DoF, omega: float) -> tuple[float, float, float, float]:
    """Square of side omega * sqrt(w * h) around the last center, clipped to the frame."""
    frame_h, frame_w = frame_shape[:2]
    side = omega * math.sqrt(last_bbox.w * last_bbox.h)
    cx = min(max(last_bbox.cx, 0.0), frame_w)
    cy = min(max(last_bbox.cy, 0.0), frame_h)
    x0, x1 = max(0.0, cx - side / 2.0), min(float(frame_w), cx + side / 2.0)
    y0, y1 = max(0.0, cy - side / 2.0), min(float(frame_h), cy + side / 2.0)
    if x1 - x0 < 1.0:
        x0, x1 = min(x0, frame_w - 1.0), min(x0, frame_w - 1.0) + 1.0
    if y1 - y0 < 1.0:
        y0, y1 = min(y0, frame_h - 1.0), min(y0, frame_h - 1.0) + 1.0
    return x0, y0, x1, y1


def _positions(lo: float, hi: float, extent: float, stride: float) -> np.ndarray:
    last = hi - extent
    if last <= lo:
        return np.array([lo])
    steps = np.arange(lo, last, stride)
    return np.append(steps, last) if steps[-1] < last else steps


def candidate_shapes(region, last_bbox: Bbox4DoF) -> list[tuple[float, float, float]]:
    """(w, h, stride) triples: perturbations of the last box plus a coarse region sweep."""
    x0, y0, x1, y1 = region
    rw, rh = x1 - x0, y1 - y0
    shapes = []
    for s in SCALES:
        for a in ASPECTS:
            bw = min(last_bbox.w * s * math.sqrt(a), rw)
            bh = min(last_bbox.h * s / math.sqrt(a), rh)
            shapes.append((bw, bh, BASE_STRIDE * max(1.0, math.sqrt(bw * bh) / 32.0)))
    for f in REGION_FRACTIONS:
        bw, bh = rw * f, rh * f
        shapes.append((bw, bh, max(1.0, math.sqrt(bw * bh) / 4.0)))
    return shapes


def candidate_boxes(region, last_bbox: Bbox4DoF, max_candidates: int = MAX_CANDIDATES) -> np.ndarray:
    """(B, 4) x, y, w, h candidates inside `region`, stride widened to stay under max_candidates."""
    x0, y0, x1, y1 = region
    shapes = candidate_shapes(region, last_bbox)

    def count(widen: float) -> int:
        return sum(
            len(_positions(x0, x1, bw, stride * widen)) * len(_positions(y0, y1, bh, stride * widen))
            for bw, bh, stride in shapes
        )

    widen = 1.0
    while count(widen) > max_candidates:
        widen *= 1.25

    boxes = []
    for bw, bh, stride in shapes:
        xs = _positions(x0, x1, bw, stride * widen)
        ys = _positions(y0, y1, bh, stride * widen)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        block = np.empty((gx.size, 4))
        block[:, 0], block[:, 1] = gx.ravel(), gy.ravel()
        block[:, 2], block[:, 3] = bw, bh
        boxes.append(block)
    return np.concatenate(boxes)


def generate_proposals(frame, last_bbox: Bbox4DoF, omega: float, n_e: int) -> list[Proposal]:
    """Top n_e candidate boxes by edge objectness, k non-increasing, stable on ties."""
    if last_bbox.w <= 0 or last_bbox.h <= 0:
        raise DegenerateBoxError(f"last box needs positive size, got {last_bbox}")
    if omega <= 0 or n_e < 1:
        raise ValueError(f"omega must be positive and N_e >= 1, got omega={omega}, N_e={n_e}")
    region = search_region(frame.shape, last_bbox, omega)
    edges = build_edge_map(frame, region)
    groups = edge_groups(edges)
    boxes = candidate_boxes(region, last_bbox)
    scores = objectness(boxes, groups)
    order = np.argsort(-scores, kind="stable")[:n_e]
    return [Proposal(*(float(v) for v in boxes[i]), k=float(scores[i])) for i in order]


# =============================================================================
# Decision filter
# =============================================================================

def score_proposals(decision: translation.TranslationState, frame, proposals: list[Proposal],
                    cfg, table) -> ProposalScore:
    """Decision-filter peak per proposal; best by eta, then higher k, then list order."""
    if not proposals:
        raise TrackerError("score_proposals needs at least one proposal")
    best = None
    for i, p in enumerate(proposals):
        response = translation.response_at(decision, frame, p.center, (p.w, p.h), cfg, table)
        eta = float(response.max())
        if best is None or eta > best[0] or (eta == best[0] and p.k > proposals[best[1]].k):
            best = (eta, i, response)
    eta, i, response = best
    p = proposals[i]
    center = translation.locate(decision, response, p.center, (p.w, p.h), cfg, frame)
    return ProposalScore(best=p, eta_b=eta, center=center, index=i)


def update_decision(state: RedetectState, sample: np.ndarray, cfg, zeta: float | None = None) -> RedetectState:
    """Interpolate a translation training sample into the decision filter (rate theta_trans).

    `zeta` is the translation peak of the frame the sample comes from; it feeds
    the running mean behind `eta_floor`.
    """
    decision = translation.update_with_sample(state.decision, sample, cfg.theta_trans, cfg)
    if zeta is None:
        return replace(state, decision=decision)
    return replace(state, decision=decision, zeta_total=state.zeta_total + zeta, pure_frames=state.pure_frames + 1)
