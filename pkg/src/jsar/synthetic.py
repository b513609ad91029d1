"""Deterministic synthetic sequences with exact ground truth.

A scenario is a static background plus one textured object following a
per-frame box script. Rendering is a pure function of the scenario:

    background  seeded coarse noise (upsampled, smooth) over a linear gradient,
                plus fine pixel noise
    object      seeded checkerboard with per-cell color jitter and pixel noise,
                resampled to the scripted (w, h) and composited bilinearly at
                the scripted sub-pixel center
    occlusion   frames inside an occlusion range show the background only

Presets (640x360, 60 frames):

    static        40x40 at (320, 180), no motion
    drift         40x40 from (200, 120), +2 px/frame in x, +1 px/frame in y
    zoom_in       40x50 at (320, 180), both sides +1%/frame
    aspect_shear  40x80 at (320, 180), width +1%/frame, height -1%/frame
    occlusion_20f 40x40 from (180, 180), +3 px/frame in x, hidden on frames 20-39
    teleport      40x40 from (200, 150), +1 px/frame in x, jumps (+150, +60) at frame 30

Frame indices are 0-based here; exported files are numbered from 00001.
"""

from dataclasses import dataclass, field
from pathlib import Path

import cv2
import numpy as np

from tracker_utils.io import write_image, write_text_atomic
from .errors import ScenarioError
from .evaluation import format_groundtruth

MIN_OBJECT_SIDE = 8
TEXTURE_SIDE = 64
CHECKER_CELLS = 8
FRAME_SIZE = (640, 360)
FRAME_COUNT = 60


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    frame_size: tuple[int, int]                       # (W, H)
    boxes: tuple[tuple[float, float, float, float], ...]  # per frame (cx, cy, w, h)
    occlusions: tuple[tuple[int, int], ...] = ()      # inclusive frame ranges
    teleports: tuple[tuple[int, float, float], ...] = ()  # (frame, dx, dy), already in boxes
    tags: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        if not 0 <= self.seed < 2 ** 64:
            raise ScenarioError(f"{self.name}: seed must fit in an unsigned 64-bit integer, got {self.seed}")
        width, height = self.frame_size
        if width < MIN_OBJECT_SIDE or height < MIN_OBJECT_SIDE:
            raise ScenarioError(f"{self.name}: frame size {self.frame_size} is too small")
        if not self.boxes:
            raise ScenarioError(f"{self.name}: empty trajectory")
        for t, (cx, cy, w, h) in enumerate(self.boxes):
            if w < MIN_OBJECT_SIDE or h < MIN_OBJECT_SIDE:
                raise ScenarioError(f"{self.name} frame {t}: box {w:.2f}x{h:.2f} is below {MIN_OBJECT_SIDE}px")
            if cx - w / 2 < 0 or cy - h / 2 < 0 or cx + w / 2 > width or cy + h / 2 > height:
                raise ScenarioError(f"{self.name} frame {t}: box ({cx:.2f}, {cy:.2f}, {w:.2f}, {h:.2f}) "
                                    f"leaves the {width}x{height} frame")
        for t0, t1 in self.occlusions:
            if not 0 <= t0 <= t1 < len(self.boxes):
                raise ScenarioError(f"{self.name}: occlusion range [{t0}, {t1}] outside 0..{len(self.boxes) - 1}")

    @property
    def frame_count(self) -> int:
        return len(self.boxes)

    def truth(self) -> list[tuple[float, float, float, float]]:
        """Scripted boxes as (x, y, w, h) rectangles."""
        return [(cx - w / 2, cy - h / 2, w, h) for cx, cy, w, h in self.boxes]

    def visibility(self) -> list[bool]:
        visible = [True] * self.frame_count
        for t0, t1 in self.occlusions:
            for t in range(t0, t1 + 1):
                visible[t] = False
        return visible


# =============================================================================
# Textures
# =============================================================================

def _streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    background_seq, object_seq = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(background_seq), np.random.default_rng(object_seq)


def background_texture(rng: np.random.Generator, width: int, height: int) -> np.ndarray:
    """(H, W, 3) float32 in [0, 255]: smooth blobs over a gradient, light pixel noise."""
    coarse = rng.uniform(0, 255, size=(max(2, height // 16), max(2, width // 16), 3)).astype(np.float32)
    coarse = cv2.resize(coarse, (width, height), interpolation=cv2.INTER_CUBIC)
    ramp = np.linspace(60.0, 190.0, width, dtype=np.float32)[np.newaxis, :, np.newaxis]
    fine = rng.normal(0.0, 4.0, size=(height, width, 3)).astype(np.float32)
    return np.clip(0.5 * coarse + 0.5 * ramp + fine, 0, 255)


def object_texture(rng: np.random.Generator, side: int = TEXTURE_SIDE, cells: int = CHECKER_CELLS) -> np.ndarray:
    """(side, side, 3) float32 checkerboard with per-cell color jitter."""
    yy, xx = np.mgrid[0:cells, 0:cells]
    checker = ((yy + xx) % 2).astype(np.float32)[..., np.newaxis]
    base = 30.0 + 190.0 * checker + rng.integers(-30, 31, size=(cells, cells, 3)).astype(np.float32)
    step = side // cells
    patch = np.repeat(np.repeat(base, step, axis=0), step, axis=1)
    patch += rng.normal(0.0, 10.0, size=patch.shape).astype(np.float32)
    return np.clip(patch, 0, 255)


def composite(background: np.ndarray, texture: np.ndarray, box) -> np.ndarray:
    """Paste `texture` resampled to box (cx, cy, w, h), bilinear at sub-pixel positions."""
    height, width = background.shape[:2]
    cx, cy, w, h = box
    th, tw = texture.shape[:2]
    sx, sy = w / tw, h / th
    # texture pixel centers map to box pixel centers
    affine = np.array([
        [sx, 0.0, cx - w / 2 + 0.5 * sx - 0.5],
        [0.0, sy, cy - h / 2 + 0.5 * sy - 0.5],
    ])
    obj = cv2.warpAffine(texture, affine, (width, height), flags=cv2.INTER_LINEAR, borderMode=cv2.BORDER_CONSTANT)
    mask = cv2.warpAffine(np.ones((th, tw), np.float32), affine, (width, height),
                          flags=cv2.INTER_LINEAR, borderMode=cv2.BORDER_CONSTANT, borderValue=0)
    mask = mask[..., np.newaxis]
    return background * (1.0 - mask) + obj * mask


# =============================================================================
# Rendering
# =============================================================================

def iter_frames(scenario: Scenario):
    """Yield the scenario's frames as (H, W, 3) uint8 RGB, one at a time."""
    width, height = scenario.frame_size
    background_rng, object_rng = _streams(scenario.seed)
    background = background_texture(background_rng, width, height)
    texture = object_texture(object_rng)
    still = np.rint(background).astype(np.uint8)
    for box, visible in zip(scenario.boxes, scenario.visibility()):
        if not visible:
            yield still.copy()
            continue
        yield np.rint(np.clip(composite(background, texture, box), 0, 255)).astype(np.uint8)


def render(scenario: Scenario) -> tuple[list[np.ndarray], list[tuple[float, float, float, float]]]:
    """All frames and the scripted truth rectangles."""
    return list(iter_frames(scenario)), scenario.truth()


def template_patch(scenario: Scenario, w: int, h: int) -> np.ndarray:
    """The scenario's object texture resampled to (w, h), uint8 RGB."""
    _, object_rng = _streams(scenario.seed)
    texture = object_texture(object_rng)
    return np.rint(cv2.resize(texture, (w, h), interpolation=cv2.INTER_LINEAR)).astype(np.uint8)


# =============================================================================
# Presets
# =============================================================================

def _linear(start, velocity, count=FRAME_COUNT):
    return [(start[0] + velocity[0] * t, start[1] + velocity[1] * t) for t in range(count)]


def _static(seed):
    return Scenario("static", seed, FRAME_SIZE, tuple((320.0, 180.0, 40.0, 40.0) for _ in range(FRAME_COUNT)))


def _drift(seed):
    path = _linear((200.0, 120.0), (2.0, 1.0))
    return Scenario("drift", seed, FRAME_SIZE, tuple((x, y, 40.0, 40.0) for x, y in path),
                    tags=frozenset({"camera_motion"}))


def _zoom_in(seed):
    boxes = tuple((320.0, 180.0, 40.0 * 1.01 ** t, 50.0 * 1.01 ** t) for t in range(FRAME_COUNT))
    return Scenario("zoom_in", seed, FRAME_SIZE, boxes, tags=frozenset({"scale_variation"}))


def _aspect_shear(seed):
    boxes = tuple((320.0, 180.0, 40.0 * 1.01 ** t, 80.0 * 0.99 ** t) for t in range(FRAME_COUNT))
    return Scenario("aspect_shear", seed, FRAME_SIZE, boxes,
                    tags=frozenset({"scale_variation", "aspect_ratio_change"}))


def _occlusion_20f(seed):
    path = _linear((180.0, 180.0), (3.0, 0.0))
    return Scenario("occlusion_20f", seed, FRAME_SIZE, tuple((x, y, 40.0, 40.0) for x, y in path),
                    occlusions=((20, 39),), tags=frozenset({"full_occlusion", "out_of_view"}))


def _teleport(seed):
    jump_at, jump = 30, (150.0, 60.0)
    boxes = []
    for t, (x, y) in enumerate(_linear((200.0, 150.0), (1.0, 0.0))):
        if t >= jump_at:
            x, y = x + jump[0], y + jump[1]
        boxes.append((x, y, 40.0, 40.0))
    return Scenario("teleport", seed, FRAME_SIZE, tuple(boxes), teleports=((jump_at, *jump),),
                    tags=frozenset({"fast_motion"}))


PRESETS = {
    "static": _static,
    "drift": _drift,
    "zoom_in": _zoom_in,
    "aspect_shear": _aspect_shear,
    "occlusion_20f": _occlusion_20f,
    "teleport": _teleport,
}


def preset(name: str, seed: int = 0) -> Scenario:
    if name not in PRESETS:
        raise ScenarioError(f"unknown preset {name!r}; choose one of {', '.join(PRESETS)}")
    return PRESETS[name](seed)


# =============================================================================
# Export
# =============================================================================

def export(scenario: Scenario, out_dir: str) -> str:
    """Write the scenario as a sequence directory: img/00001.png..., groundtruth.txt, tags.txt.

    Occluded frames get a NaN truth line.
    """
    root = Path(out_dir)
    for t, frame in enumerate(iter_frames(scenario)):
        write_image(str(root / "img" / f"{t + 1:05d}.png"), frame)
    truth = [rect if visible else None for rect, visible in zip(scenario.truth(), scenario.visibility())]
    write_text_atomic(str(root / "groundtruth.txt"), format_groundtruth(truth))
    if scenario.tags:
        write_text_atomic(str(root / "tags.txt"), "\n".join(sorted(scenario.tags)) + "\n")
    return str(root)
