"""Gradient edge map and EdgeBoxes-style proposal scoring.

Edges: Sobel on luminance, non-maximum suppression along the gradient
direction (a pixel survives if it is >= its neighbor behind and > its
neighbor ahead), then magnitudes below 10% of the region maximum are zeroed.
Surviving pixels are grouped greedily: starting from the strongest ungrouped
pixel, 8-connected neighbors join while their orientation (mod pi) stays
within pi/8 of the group's mean orientation.

Box objectness:

    k = max(0, enclosed mass - straddling mass) / (2 * (w + h)) ** 1.5

where a group is enclosed when its bounding box lies inside the box and
straddling when it overlaps the box without being enclosed.
"""

import math
from dataclasses import dataclass

import cv2
import numpy as np

from .features import LUMA

GROUP_TOLERANCE = math.pi / 8
NEIGHBORS = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))
MAGNITUDE_FLOOR = 0.1
KAPPA = 1.5
MAX_GROUPS = 256
SCORE_CHUNK = 4096


@dataclass(frozen=True)
class EdgeMap:
    magnitude: np.ndarray    # (h, w) >= 0, zero off edges
    orientation: np.ndarray  # (h, w) gradient angle, radians
    labels: np.ndarray       # (h, w) int, 0 = no edge, groups numbered from 1
    origin: tuple[int, int]  # (x0, y0) of the region in frame coordinates

    @property
    def group_count(self) -> int:
        return int(self.labels.max()) if self.labels.size else 0


@dataclass(frozen=True)
class EdgeGroups:
    mass: np.ndarray   # (G,) summed magnitude
    boxes: np.ndarray  # (G, 4) x0, y0, x1, y1 in frame coordinates, x1/y1 exclusive


def clamp_region(region, frame_w: int, frame_h: int) -> tuple[int, int, int, int]:
    """(x0, y0, x1, y1) float region -> integer pixel bounds inside the frame, non-empty."""
    x0, y0, x1, y1 = region
    x0 = int(min(max(math.floor(x0), 0), frame_w - 1))
    y0 = int(min(max(math.floor(y0), 0), frame_h - 1))
    x1 = int(min(max(math.ceil(x1), x0 + 1), frame_w))
    y1 = int(min(max(math.ceil(y1), y0 + 1), frame_h))
    return x0, y0, x1, y1


def _suppress(magnitude: np.ndarray, orientation: np.ndarray) -> np.ndarray:
    p = np.pad(magnitude, 1)
    left, right = p[1:-1, :-2], p[1:-1, 2:]
    up, down = p[:-2, 1:-1], p[2:, 1:-1]
    up_left, down_right = p[:-2, :-2], p[2:, 2:]
    up_right, down_left = p[:-2, 2:], p[2:, :-2]

    direction = np.floor(np.mod(orientation + np.pi / 8, np.pi) / (np.pi / 4)).astype(np.int64) % 4
    behind = np.select([direction == 0, direction == 1, direction == 2], [left, up_left, up], up_right)
    ahead = np.select([direction == 0, direction == 1, direction == 2], [right, down_right, down], down_left)
    keep = (magnitude >= behind) & (magnitude > ahead)
    return np.where(keep, magnitude, 0.0)


def group_edges(magnitude: np.ndarray, orientation: np.ndarray) -> np.ndarray:
    """Greedy 8-connected growth from the strongest ungrouped edge pixel.

    A neighbor joins while its orientation (mod pi) is within GROUP_TOLERANCE
    of the group's running mean orientation, averaged on doubled angles.
    """
    h, w = magnitude.shape
    flat_mag = magnitude.ravel()
    on_edge = (flat_mag > 0).tolist()
    doubled = 2.0 * np.mod(orientation, np.pi).ravel()
    theta = (doubled / 2.0).tolist()
    cos2, sin2 = np.cos(doubled).tolist(), np.sin(doubled).tolist()
    seeds = np.flatnonzero(flat_mag > 0)
    seeds = seeds[np.argsort(-flat_mag[seeds], kind="stable")].tolist()

    labels = [0] * (h * w)
    count = 0
    for seed in seeds:
        if labels[seed]:
            continue
        count += 1
        labels[seed] = count
        sum_c, sum_s = cos2[seed], sin2[seed]
        stack = [seed]
        while stack:
            y, x = divmod(stack.pop(), w)
            for dy, dx in NEIGHBORS:
                yy, xx = y + dy, x + dx
                if yy < 0 or yy >= h or xx < 0 or xx >= w:
                    continue
                q = yy * w + xx
                if not on_edge[q] or labels[q]:
                    continue
                diff = abs(theta[q] - 0.5 * math.atan2(sum_s, sum_c)) % math.pi
                if min(diff, math.pi - diff) < GROUP_TOLERANCE:
                    labels[q] = count
                    sum_c += cos2[q]
                    sum_s += sin2[q]
                    stack.append(q)
    return np.asarray(labels, dtype=np.int32).reshape(h, w)


def build_edge_map(frame: np.ndarray, region) -> EdgeMap:
    """Edge magnitude, orientation and orientation-coherent groups over `region`."""
    frame_h, frame_w = frame.shape[:2]
    x0, y0, x1, y1 = clamp_region(region, frame_w, frame_h)
    gray = np.asarray(frame[y0:y1, x0:x1], dtype=np.float64) @ LUMA

    gx = cv2.Sobel(gray, cv2.CV_64F, 1, 0, ksize=3)
    gy = cv2.Sobel(gray, cv2.CV_64F, 0, 1, ksize=3)
    orientation = np.arctan2(gy, gx)
    magnitude = _suppress(np.hypot(gx, gy), orientation)
    peak = magnitude.max() if magnitude.size else 0.0
    if peak <= 0:
        return EdgeMap(np.zeros_like(magnitude), orientation, np.zeros(magnitude.shape, np.int32), (x0, y0))
    magnitude[magnitude < MAGNITUDE_FLOOR * peak] = 0.0
    return EdgeMap(magnitude, orientation, group_edges(magnitude, orientation), (x0, y0))


def edge_groups(edges: EdgeMap, max_groups: int = MAX_GROUPS) -> EdgeGroups:
    """Mass and frame-coordinate bounding box per group, strongest max_groups kept."""
    n = edges.group_count
    if n == 0:
        return EdgeGroups(np.zeros(0), np.zeros((0, 4)))
    flat = edges.labels.ravel()
    mass = np.bincount(flat, weights=edges.magnitude.ravel(), minlength=n + 1)[1:]

    ys, xs = np.nonzero(edges.labels)
    ids = edges.labels[ys, xs] - 1
    boxes = np.empty((n, 4))
    boxes[:, 0] = np.full(n, np.inf)
    boxes[:, 1] = np.full(n, np.inf)
    boxes[:, 2] = np.full(n, -np.inf)
    boxes[:, 3] = np.full(n, -np.inf)
    np.minimum.at(boxes[:, 0], ids, xs)
    np.minimum.at(boxes[:, 1], ids, ys)
    np.maximum.at(boxes[:, 2], ids, xs + 1)
    np.maximum.at(boxes[:, 3], ids, ys + 1)
    boxes += np.array([edges.origin[0], edges.origin[1], edges.origin[0], edges.origin[1]], dtype=np.float64)

    if n > max_groups:
        strongest = np.sort(np.argsort(-mass, kind="stable")[:max_groups])
        mass, boxes = mass[strongest], boxes[strongest]
    return EdgeGroups(mass, boxes)


def objectness(boxes: np.ndarray, groups: EdgeGroups) -> np.ndarray:
    """EdgeBoxes score for (B, 4) boxes given as x, y, w, h."""
    boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 4)
    scores = np.zeros(len(boxes))
    if len(groups.mass) == 0 or len(boxes) == 0:
        return scores
    gx0, gy0, gx1, gy1 = (groups.boxes[:, i][np.newaxis] for i in range(4))
    for start in range(0, len(boxes), SCORE_CHUNK):
        chunk = boxes[start:start + SCORE_CHUNK]
        bx0, by0 = chunk[:, 0:1], chunk[:, 1:2]
        bx1, by1 = bx0 + chunk[:, 2:3], by0 + chunk[:, 3:4]
        enclosed = (gx0 >= bx0) & (gy0 >= by0) & (gx1 <= bx1) & (gy1 <= by1)
        overlaps = (gx0 < bx1) & (gx1 > bx0) & (gy0 < by1) & (gy1 > by0)
        straddling = overlaps & ~enclosed
        net = enclosed @ groups.mass - straddling @ groups.mass
        perimeter = 2.0 * (chunk[:, 2] + chunk[:, 3])
        scores[start:start + SCORE_CHUNK] = np.maximum(net, 0.0) / perimeter ** KAPPA
    return scores
