"""31-channel HOG (Felzenszwalb variant), vectorized over a batch of patches.

Per pixel: centered gradients on each color channel (edge-replicated), keep
the channel with the largest magnitude. The orientation is hard-binned into
18 contrast-sensitive bins of 20 degrees, bin 0 centered on 0 degrees, and
the magnitude is added to the pixel's own C x C cell. uint8 batches look
gradients up in a table over all 511 x 511 integer (dx, dy) pairs; float
batches compute them directly. Both give the same features.

Per cell, the four 2x2-cell blocks that contain it give four normalizers
1/sqrt(block energy + eps). Each normalized value is clipped at 0.2 and the
output channels are:

    0..17   0.5 * sum over the 4 normalizers, contrast-sensitive bins
    18..26  same for contrast-insensitive bins (o and o + 9 merged)
    27..30  0.2357 * sum over the 18 bins, one channel per normalizer

The output grid covers every whole cell of the patch: (31, h // C, w // C).
"""

from functools import lru_cache

import numpy as np

from .errors import DimensionMismatchError

HOG_CHANNELS = 31
SENSITIVE_BINS = 18
INSENSITIVE_BINS = 9
CLIP = 0.2
EPS = 1e-4
TEXTURE_WEIGHT = 0.2357
UINT8_SPAN = 255


def _strongest(energy: np.ndarray, *planes: np.ndarray) -> list[np.ndarray]:
    """Per pixel, the value of each plane on the channel with the largest energy.

    First channel wins ties, as with argmax.
    """
    best = energy[..., 0]
    picked = [p[..., 0] for p in planes]
    for c in range(1, energy.shape[-1]):
        stronger = energy[..., c] > best
        best = np.where(stronger, energy[..., c], best)
        picked = [np.where(stronger, p[..., c], q) for p, q in zip(planes, picked)]
    return [best, *picked]


def _gradients(batch: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Magnitude and orientation (radians) of the strongest color channel."""
    padded = np.pad(batch, ((0, 0), (1, 1), (1, 1), (0, 0)), mode="edge")
    dx = padded[:, 1:-1, 2:, :] - padded[:, 1:-1, :-2, :]
    dy = padded[:, 2:, 1:-1, :] - padded[:, :-2, 1:-1, :]
    energy, dx, dy = _strongest(dx * dx + dy * dy, dx, dy)
    return np.sqrt(energy), np.arctan2(dy, dx)


def orientation_bins(angle: np.ndarray) -> np.ndarray:
    """Contrast-sensitive bin index in [0, 18) for angles in radians."""
    degrees = np.mod(np.degrees(angle), 360.0)
    return np.floor((degrees + 10.0) / 20.0).astype(np.int64) % SENSITIVE_BINS


@lru_cache(maxsize=1)
def _gradient_table() -> tuple[np.ndarray, np.ndarray]:
    """Magnitude and bin for every integer gradient (dx, dy) in [-255, 255]^2,
    row index (dy + 255) * 511 + (dx + 255)."""
    d = np.arange(-UINT8_SPAN, UINT8_SPAN + 1, dtype=np.float64)
    dy, dx = np.meshgrid(d, d, indexing="ij")
    magnitude = np.sqrt(dx * dx + dy * dy).ravel()
    bins = orientation_bins(np.arctan2(dy, dx)).ravel()
    magnitude.setflags(write=False)
    bins.setflags(write=False)
    return magnitude, bins


def _magnitude_and_bins(batch: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if batch.dtype != np.uint8:
        magnitude, angle = _gradients(batch)
        return magnitude, orientation_bins(angle)
    # Integer gradients index a precomputed table; same values as the float path.
    padded = np.pad(batch, ((0, 0), (1, 1), (1, 1), (0, 0)), mode="edge").astype(np.int32)
    dx = padded[:, 1:-1, 2:, :] - padded[:, 1:-1, :-2, :]
    dy = padded[:, 2:, 1:-1, :] - padded[:, :-2, 1:-1, :]
    index = (dy + UINT8_SPAN) * (2 * UINT8_SPAN + 1) + (dx + UINT8_SPAN)
    _, index = _strongest(dx * dx + dy * dy, index)
    magnitude, bins = _gradient_table()
    return magnitude[index], bins[index]


def cell_histograms(batch: np.ndarray, cell: int) -> np.ndarray:
    """(B, 18, h // C, w // C) magnitude histograms, hard-assigned."""
    b, h, w, _ = batch.shape
    rows, cols = h // cell, w // cell
    batch = batch[:, : rows * cell, : cols * cell, :]
    magnitude, bins = _magnitude_and_bins(batch)

    y_cell = (np.arange(rows * cell) // cell)[np.newaxis, :, np.newaxis]
    x_cell = (np.arange(cols * cell) // cell)[np.newaxis, np.newaxis, :]
    b_idx = np.arange(b)[:, np.newaxis, np.newaxis]
    flat = ((b_idx * SENSITIVE_BINS + bins) * rows + y_cell) * cols + x_cell
    hist = np.bincount(flat.ravel(), weights=magnitude.ravel(), minlength=b * SENSITIVE_BINS * rows * cols)
    return hist.reshape(b, SENSITIVE_BINS, rows, cols)


def hog_batch(patches: np.ndarray, cell: int) -> np.ndarray:
    """HOG for a (B, h, w, 3) batch -> (B, 31, h // C, w // C)."""
    patches = np.asarray(patches)
    if patches.dtype != np.uint8:
        patches = patches.astype(np.float64, copy=False)
    if patches.ndim != 4 or patches.shape[-1] != 3:
        raise DimensionMismatchError(f"expected (B, h, w, 3) patches, got {patches.shape}")
    _, h, w, _ = patches.shape
    if h < 3 * cell or w < 3 * cell:
        raise DimensionMismatchError(f"patch {w}x{h} is smaller than 3x3 cells of {cell}px")

    hist = cell_histograms(patches, cell)
    folded = hist[:, :INSENSITIVE_BINS] + hist[:, INSENSITIVE_BINS:]
    energy = np.sum(folded ** 2, axis=1)

    padded = np.pad(energy, ((0, 0), (1, 1), (1, 1)), mode="edge")
    blocks = padded[:, :-1, :-1] + padded[:, 1:, :-1] + padded[:, :-1, 1:] + padded[:, 1:, 1:]
    inv = 1.0 / np.sqrt(blocks + EPS)
    # Four normalizers per cell: the blocks up-left, up-right, down-left, down-right.
    norms = np.stack([inv[:, :-1, :-1], inv[:, :-1, 1:], inv[:, 1:, :-1], inv[:, 1:, 1:]], axis=1)

    sensitive = np.minimum(hist[:, :, np.newaxis] * norms[:, np.newaxis], CLIP)
    insensitive = np.minimum(folded[:, :, np.newaxis] * norms[:, np.newaxis], CLIP)

    out = np.empty((patches.shape[0], HOG_CHANNELS) + energy.shape[1:], dtype=np.float64)
    out[:, :SENSITIVE_BINS] = 0.5 * sensitive.sum(axis=2)
    out[:, SENSITIVE_BINS:SENSITIVE_BINS + INSENSITIVE_BINS] = 0.5 * insensitive.sum(axis=2)
    out[:, SENSITIVE_BINS + INSENSITIVE_BINS:] = TEXTURE_WEIGHT * sensitive.sum(axis=1)
    return out


def hog_features(patch: np.ndarray, cell: int) -> np.ndarray:
    """HOG for one (h, w, 3) patch -> (31, h // C, w // C)."""
    return hog_batch(np.asarray(patch)[np.newaxis], cell)[0]
