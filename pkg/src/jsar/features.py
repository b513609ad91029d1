"""Patch extraction and the hand-crafted feature stacks.

Frames are (H, W, 3) uint8 RGB arrays. Sizes and out-sizes are (w, h) in
pixels, centers (x, y). Feature stacks are (D, M, N) float64 over C x C
cells; M = patch_h // C, N = patch_w // C.

Translation stack: gray (1) + HOG (31) + color names (10) = 42 channels,
Hann-windowed. Size samples use HOG only, vectorized row-major over cells
with the channel index varying fastest.
"""

import math

import cv2
import numpy as np

from .color_names import color_probabilities
from .errors import DegenerateBoxError
from .hog import HOG_CHANNELS, hog_batch, hog_features
from .spectral import hann_window

LUMA = np.array([0.299, 0.587, 0.114])
TRANSLATION_CHANNELS = 1 + HOG_CHANNELS + 10
MIN_SIZE_PATCH = 8.0


def _check_size(name: str, size) -> tuple[float, float]:
    w, h = (float(v) for v in size)
    if not (math.isfinite(w) and math.isfinite(h)) or w <= 0 or h <= 0:
        raise DegenerateBoxError(f"{name} must be positive and finite, got {size}")
    return w, h


def extract_patch(frame: np.ndarray, center, size, out_size) -> np.ndarray:
    """Crop a w x h window centered at `center`, resampled bilinearly to out_size.

    Out-of-frame pixels replicate the nearest edge pixel. Returns
    (out_h, out_w, 3) uint8.
    """
    w, h = _check_size("size", size)
    out_w, out_h = (int(v) for v in _check_size("out_size", out_size))
    cx, cy = (float(v) for v in center)
    if not (math.isfinite(cx) and math.isfinite(cy)):
        raise DegenerateBoxError(f"center must be finite, got {center}")
    frame_h, frame_w = frame.shape[:2]
    # Beyond one window of the border, replication makes every position equivalent.
    cx = min(max(cx, -w - 1.0), frame_w + w + 1.0)
    cy = min(max(cy, -h - 1.0), frame_h + h + 1.0)

    sx, sy = w / out_w, h / out_h
    affine = np.array([
        [sx, 0.0, cx - w / 2.0 + 0.5 * sx - 0.5],
        [0.0, sy, cy - h / 2.0 + 0.5 * sy - 0.5],
    ])
    return cv2.warpAffine(
        frame, affine, (out_w, out_h),
        flags=cv2.INTER_LINEAR | cv2.WARP_INVERSE_MAP,
        borderMode=cv2.BORDER_REPLICATE,
    )


def cell_means(plane: np.ndarray, cell: int) -> np.ndarray:
    """(h, w, k) per-pixel values -> (k, h // C, w // C) per-cell means."""
    h, w, k = plane.shape
    rows, cols = h // cell, w // cell
    trimmed = plane[: rows * cell, : cols * cell]
    means = trimmed.reshape(rows, cell, cols, cell, k).mean(axis=(1, 3))
    return np.moveaxis(means, -1, 0)


def gray_channel(patch: np.ndarray, cell: int, offset: float = 0.5) -> np.ndarray:
    """Per-cell mean luminance in [0, 1], shifted by -offset -> (1, M, N)."""
    luma = (np.asarray(patch, dtype=np.float64) @ LUMA) / 255.0
    return cell_means(luma[..., np.newaxis], cell) - offset


def cn_features(patch: np.ndarray, cell: int, table: np.ndarray) -> np.ndarray:
    """Per-cell mean color-term probabilities, uncentered -> (10, M, N)."""
    return cell_means(color_probabilities(patch, table), cell)


def template_shape(roi_w: float, roi_h: float, template_size: int, cell: int) -> tuple[int, int]:
    """Model resolution (w, h) for a ROI: area template_size^2, whole cells, >= 3 cells."""
    aspect = math.sqrt(roi_w / roi_h)
    w = max(3, round(template_size * aspect / cell)) * cell
    h = max(3, round(template_size / aspect / cell)) * cell
    return int(w), int(h)


def translation_features(frame, center, roi_size, out_size, cfg, table) -> np.ndarray:
    """Windowed 42-channel stack of the ROI resampled to out_size."""
    patch = extract_patch(frame, center, roi_size, out_size)
    cell = cfg.cell_size
    stack = np.concatenate([
        gray_channel(patch, cell, cfg.gray_offset),
        hog_features(patch, cell),
        cn_features(patch, cell, table) - cfg.cn_offset,
    ])
    window = hann_window(*stack.shape[1:])
    return stack * window[np.newaxis]


def _vectorize(hog: np.ndarray) -> np.ndarray:
    """(..., 31, R, C) -> (..., R * C * 31), channel index fastest."""
    moved = np.moveaxis(hog, -3, -1)
    return moved.reshape(moved.shape[:-3] + (-1,))


def _clamp_patch(size) -> tuple[float, float]:
    w, h = _check_size("patch_size", size)
    return max(w, MIN_SIZE_PATCH), max(h, MIN_SIZE_PATCH)


def size_feature_vector(frame, center, patch_size, cfg) -> np.ndarray:
    """HOG vector of one patch resampled to (W_model, H_model)."""
    patch = extract_patch(frame, center, _clamp_patch(patch_size), (cfg.model_width, cfg.model_height))
    return _vectorize(hog_features(patch, cfg.cell_size))


def size_feature_batch(frame, center, patch_sizes, cfg) -> np.ndarray:
    """(n, size_channel_count) vectors for a list of (w, h) patch sizes.

    Patches are independent; the batch is one HOG pass over all of them.
    """
    out_size = (cfg.model_width, cfg.model_height)
    patches = np.stack([extract_patch(frame, center, _clamp_patch(s), out_size) for s in patch_sizes])
    return _vectorize(hog_batch(patches, cfg.cell_size))
