"""Box types: the tracker's 4-DoF state and top-left rectangles."""

import math
from dataclasses import dataclass

from .errors import DegenerateBoxError


@dataclass(frozen=True)
class Bbox4DoF:
    """Center (cx, cy) and size (w, h) in pixels."""
    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self):
        values = (self.cx, self.cy, self.w, self.h)
        if not all(math.isfinite(v) for v in values):
            raise DegenerateBoxError(f"box has non-finite values: {values}")
        if self.w <= 0 or self.h <= 0:
            raise DegenerateBoxError(f"box needs positive size, got w={self.w}, h={self.h}")

    @property
    def center(self) -> tuple[float, float]:
        return self.cx, self.cy

    @property
    def size(self) -> tuple[float, float]:
        return self.w, self.h

    def to_rect(self) -> tuple[float, float, float, float]:
        """Top-left (x, y, w, h)."""
        return self.cx - self.w / 2.0, self.cy - self.h / 2.0, self.w, self.h

    @classmethod
    def from_rect(cls, rect) -> "Bbox4DoF":
        x, y, w, h = (float(v) for v in rect)
        return cls(x + w / 2.0, y + h / 2.0, w, h)

    def with_center(self, cx: float, cy: float) -> "Bbox4DoF":
        return Bbox4DoF(cx, cy, self.w, self.h)

    def with_size(self, w: float, h: float) -> "Bbox4DoF":
        return Bbox4DoF(self.cx, self.cy, w, h)


def clamp_center(cx: float, cy: float, frame_w: int, frame_h: int) -> tuple[float, float]:
    """Keep a center on the frame's pixel grid."""
    return min(max(cx, 0.0), frame_w - 1.0), min(max(cy, 0.0), frame_h - 1.0)
