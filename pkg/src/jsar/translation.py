"""Translation filter: locate the object in the space domain.

The ROI is the target box scaled by sqrt(roi_area_factor) per side, resampled
to a model template fixed at initialization (`template_shape`). The training
label is a Gaussian scaled to `output_peak`, peak moved to the origin, so a
response peak at cyclic offset (dy, dx) is a displacement of that many cells.
The peak value is the confidence zeta reported to the re-detection monitor.
"""

import math
from dataclasses import dataclass

import numpy as np

from .boxes import Bbox4DoF, clamp_center
from .features import template_shape, translation_features
from .spectral import (
    FilterModel,
    correlate_response,
    gaussian_label,
    interpolate_model,
    shift_to_origin,
    signed_peak,
    train_filter,
)


@dataclass(frozen=True)
class TranslationState:
    model: FilterModel
    label: np.ndarray              # shifted to origin, scaled by output_peak
    template: tuple[int, int]      # model resolution (w, h) in pixels
    roi_scale: float               # ROI side / target side
    cell_size: int


@dataclass(frozen=True)
class DetectionOutcome:
    center: tuple[float, float]
    zeta: float
    response: np.ndarray
    scale: float = 1.0             # chosen ROI scale (multi-scale search only)


def roi_size(w: float, h: float, cfg) -> tuple[float, float]:
    pad = math.sqrt(cfg.roi_area_factor)
    return w * pad, h * pad


def translation_label(template: tuple[int, int], cfg) -> np.ndarray:
    """Training label on the template's cell grid: Gaussian of width
    output_sigma_factor x target extent (cells), peak output_peak at the origin."""
    cells_w, cells_h = template[0] // cfg.cell_size, template[1] // cfg.cell_size
    extent = math.sqrt(cells_w * cells_h) / math.sqrt(cfg.roi_area_factor)
    label = gaussian_label(cells_h, cells_w, cfg.output_sigma_factor, extent)
    return cfg.output_peak * shift_to_origin(label)


def training_sample(state: TranslationState, frame, bbox: Bbox4DoF, cfg, table) -> np.ndarray:
    """Feature stack at `bbox`, on the state's template."""
    return translation_features(frame, bbox.center, roi_size(bbox.w, bbox.h, cfg), state.template, cfg, table)


def init(frame, bbox: Bbox4DoF, cfg, table) -> TranslationState:
    """Train a fresh translation filter at `bbox`."""
    roi_w, roi_h = roi_size(bbox.w, bbox.h, cfg)
    template = template_shape(roi_w, roi_h, cfg.template_size, cfg.cell_size)
    label = translation_label(template, cfg)
    sample = translation_features(frame, bbox.center, (roi_w, roi_h), template, cfg, table)
    return TranslationState(
        model=train_filter(sample, label, cfg.lam),
        label=label,
        template=template,
        roi_scale=math.sqrt(cfg.roi_area_factor),
        cell_size=cfg.cell_size,
    )


def _parabolic_offset(left: float, center: float, right: float) -> float:
    """Vertex of the parabola through three samples, relative to the middle one."""
    divisor = 2.0 * center - left - right
    if divisor <= 0.0:
        return 0.0
    return float(np.clip(0.5 * (right - left) / divisor, -0.5, 0.5))


def subcell_peak(response: np.ndarray) -> tuple[float, float, float]:
    """(dy, dx, zeta): signed peak cell plus parabolic refinement per axis.

    Neighbors wrap cyclically. zeta is the raw plane maximum.
    """
    dy, dx, zeta = signed_peak(response)
    rows, cols = response.shape
    r, c = dy % rows, dx % cols
    oy = _parabolic_offset(response[(r - 1) % rows, c], zeta, response[(r + 1) % rows, c]) if rows >= 3 else 0.0
    ox = _parabolic_offset(response[r, (c - 1) % cols], zeta, response[r, (c + 1) % cols]) if cols >= 3 else 0.0
    return dy + oy, dx + ox, zeta


def response_at(state: TranslationState, frame, center, size, cfg, table) -> np.ndarray:
    roi = roi_size(size[0], size[1], cfg)
    return correlate_response(state.model, translation_features(frame, center, roi, state.template, cfg, table))


def locate(state: TranslationState, response, center, size, cfg, frame) -> tuple[float, float]:
    dy, dx, _ = subcell_peak(response)
    roi_w, roi_h = roi_size(size[0], size[1], cfg)
    step_x = state.cell_size * roi_w / state.template[0]
    step_y = state.cell_size * roi_h / state.template[1]
    frame_h, frame_w = frame.shape[:2]
    return clamp_center(center[0] + dx * step_x, center[1] + dy * step_y, frame_w, frame_h)


def detect(state: TranslationState, frame, prev_center, current_size, cfg, table) -> DetectionOutcome:
    """Correlate at prev_center with the previous size; peak -> new center."""
    response = response_at(state, frame, prev_center, current_size, cfg, table)
    center = locate(state, response, prev_center, current_size, cfg, frame)
    return DetectionOutcome(center=center, zeta=float(response.max()), response=response)


def detect_multiscale(state: TranslationState, frame, prev_center, current_size, cfg, table) -> DetectionOutcome:
    """Brute-force pyramid: the same detection at baseline_scales ROI sizes, best zeta wins.

    Aspect ratio stays fixed. Ties go to the scale closest to 1.
    """
    half = cfg.baseline_scales // 2
    exponents = sorted(range(-half, half + 1), key=abs)
    best = None
    for k in exponents:
        factor = cfg.baseline_step ** k
        size = (current_size[0] * factor, current_size[1] * factor)
        response = response_at(state, frame, prev_center, size, cfg, table)
        zeta = float(response.max())
        if best is None or zeta > best[0]:
            best = (zeta, factor, size, response)
    zeta, factor, size, response = best
    center = locate(state, response, prev_center, size, cfg, frame)
    return DetectionOutcome(center=center, zeta=zeta, response=response, scale=factor)


def update_with_sample(state: TranslationState, sample: np.ndarray, theta: float, cfg) -> TranslationState:
    fresh = train_filter(sample, state.label, cfg.lam)
    return TranslationState(
        model=interpolate_model(state.model, fresh, theta),
        label=state.label,
        template=state.template,
        roi_scale=state.roi_scale,
        cell_size=state.cell_size,
    )


def update(state: TranslationState, frame, new_bbox: Bbox4DoF, theta: float, cfg, table) -> TranslationState:
    """Train at new_bbox and interpolate into the model with rate theta."""
    return update_with_sample(state, training_sample(state, frame, new_bbox, cfg, table), theta, cfg)
