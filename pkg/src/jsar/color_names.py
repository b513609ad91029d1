"""Color-names lookup: RGB -> probabilities over 10 basic color terms.

Table layout (file and in memory): 32768 rows x 10 little-endian float32,
row index (R // 8) * 1024 + (G // 8) * 32 + (B // 8), one row per 8-level
RGB bucket, rows summing to 1. Columns follow COLOR_TERMS.

The tracker needs a real table file, named by the config or JSAR_CN_TABLE.
`synthesize_color_table()` builds a stand-in for tests and fixtures from ten
color prototypes: each bucket center is softly assigned to the prototypes by
a Gaussian kernel on CIE Lab distance. Same layout, same lookup.
"""

from functools import lru_cache

import cv2
import numpy as np

from tracker_utils.config import get_cn_table_path
from tracker_utils.io import read_bytes, write_bytes_atomic
from .errors import ColorTableError

COLOR_TERMS = ("black", "blue", "brown", "gray", "green", "orange", "purple", "red", "white", "yellow")
TABLE_ROWS = 32 ** 3
TABLE_COLS = len(COLOR_TERMS)

PROTOTYPES_RGB = {
    "black": (0, 0, 0),
    "blue": (0, 0, 255),
    "brown": (140, 80, 20),
    "gray": (128, 128, 128),
    "green": (0, 160, 0),
    "orange": (255, 150, 0),
    "purple": (128, 0, 128),
    "red": (255, 0, 0),
    "white": (255, 255, 255),
    "yellow": (255, 255, 0),
}
KERNEL_WIDTH = 20.0  # Lab units


def _rgb_to_lab(rgb: np.ndarray) -> np.ndarray:
    """(n, 3) RGB in [0, 255] -> (n, 3) Lab (L in [0, 100])."""
    img = (np.asarray(rgb, dtype=np.float32) / 255.0).reshape(-1, 1, 3)
    return cv2.cvtColor(img, cv2.COLOR_RGB2Lab).reshape(-1, 3).astype(np.float64)


@lru_cache(maxsize=1)
def synthesize_color_table() -> np.ndarray:
    levels = np.arange(32) * 8 + 4
    r, g, b = np.meshgrid(levels, levels, levels, indexing="ij")
    centers = np.stack([r.ravel(), g.ravel(), b.ravel()], axis=1)

    lab = _rgb_to_lab(centers)
    protos = _rgb_to_lab(np.array([PROTOTYPES_RGB[t] for t in COLOR_TERMS]))
    dist2 = np.sum((lab[:, np.newaxis, :] - protos[np.newaxis, :, :]) ** 2, axis=-1)
    logits = -dist2 / (2.0 * KERNEL_WIDTH ** 2)
    logits -= logits.max(axis=1, keepdims=True)
    weights = np.exp(logits)
    table = (weights / weights.sum(axis=1, keepdims=True)).astype(np.float32)
    table.setflags(write=False)
    return table


def _check_table(table: np.ndarray, source: str) -> np.ndarray:
    if table.shape != (TABLE_ROWS, TABLE_COLS):
        raise ColorTableError(f"{source}: expected {TABLE_ROWS}x{TABLE_COLS} table, got {table.shape}")
    if not np.all(np.isfinite(table)) or np.any(table < 0):
        raise ColorTableError(f"{source}: table has negative or non-finite entries")
    sums = table.astype(np.float64).sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > 1e-5)
    if bad.size:
        raise ColorTableError(f"{source}: row {int(bad[0])} sums to {sums[bad[0]]:.6f}, expected 1")
    return table


def load_color_table(path: str) -> np.ndarray:
    data = read_bytes(path)
    if data is None:
        raise ColorTableError(f"color table not found: {path}")
    if len(data) != TABLE_ROWS * TABLE_COLS * 4:
        raise ColorTableError(f"{path}: expected {TABLE_ROWS * TABLE_COLS * 4} bytes, got {len(data)}")
    table = np.frombuffer(data, dtype="<f4").reshape(TABLE_ROWS, TABLE_COLS)
    return _check_table(table, path)


def write_color_table(path: str, table: np.ndarray) -> None:
    table = _check_table(np.asarray(table, dtype=np.float32), path)
    write_bytes_atomic(path, table.astype("<f4").tobytes())


def resolve_color_table(path: str = "") -> np.ndarray:
    """Table from `path`, else from JSAR_CN_TABLE."""
    path = path or get_cn_table_path()
    if not path:
        raise ColorTableError("no color-names table: set cn_table in the config or JSAR_CN_TABLE")
    return load_color_table(path)


def table_index(pixels: np.ndarray) -> np.ndarray:
    """Row index for RGB uint8 pixels of shape (..., 3)."""
    q = np.asarray(pixels, dtype=np.int64) // 8
    return q[..., 0] * 1024 + q[..., 1] * 32 + q[..., 2]


def color_probabilities(pixels: np.ndarray, table: np.ndarray) -> np.ndarray:
    """(..., 3) RGB -> (..., 10) color-term probabilities."""
    return table[table_index(pixels)].astype(np.float64)
