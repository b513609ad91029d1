"""Size filter: joint scale and aspect-ratio estimation over an S x A lattice.

Grid cell (s, a) has exponents N_s = s - (S - 1) / 2 and N_a = a - (A - 1) / 2
(0-based s, a) and crops a patch of

    width  = w * gamma**N_s * phi**N_a
    height = h * gamma**N_s / phi**N_a

around the current center. Each patch is resampled to W_model x H_model,
turned into a HOG vector, and the vectors form a (C_size, S, A) stack: one
S x A plane per vector component. A 2D filter over that plane is trained
and applied with the same closed form as the translation filter; the
response argmax, read cyclically with the label peak at the origin, is
(N_s, N_a) directly. Estimates snap to grid cells.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigError, DimensionMismatchError
from .features import size_feature_batch
from .spectral import (
    FilterModel,
    correlate_spectrum,
    dft2,
    gaussian_label,
    hann_window,
    interpolate_model,
    shift_to_origin,
    signed_peak,
    train_from_spectra,
)

MIN_SIDE = 4.0


@dataclass(frozen=True)
class SizeGrid:
    S: int
    A: int
    gamma: float
    phi: float

    @property
    def scale_exponents(self) -> np.ndarray:
        return np.arange(self.S) - (self.S - 1) // 2

    @property
    def aspect_exponents(self) -> np.ndarray:
        return np.arange(self.A) - (self.A - 1) // 2

    @property
    def center_index(self) -> tuple[int, int]:
        return (self.S - 1) // 2, (self.A - 1) // 2

    def factors(self, n_s: int, n_a: int) -> tuple[float, float]:
        """(width factor, height factor) for exponents (N_s, N_a)."""
        scale = self.gamma ** n_s
        aspect = self.phi ** n_a
        return scale * aspect, scale / aspect

    @property
    def width_factors(self) -> np.ndarray:
        ns, na = np.meshgrid(self.scale_exponents, self.aspect_exponents, indexing="ij")
        return self.gamma ** ns * self.phi ** na

    @property
    def height_factors(self) -> np.ndarray:
        ns, na = np.meshgrid(self.scale_exponents, self.aspect_exponents, indexing="ij")
        return self.gamma ** ns / self.phi ** na


def build_grid(S: int, A: int, gamma: float, phi: float) -> SizeGrid:
    for key, n in (("S", S), ("A", A)):
        if n < 3 or n % 2 == 0:
            raise ConfigError(key, f"must be odd and >= 3, got {n}")
    if gamma <= 1:
        raise ConfigError("gamma", f"must be > 1, got {gamma}")
    if phi <= 1:
        raise ConfigError("phi", f"must be > 1, got {phi}")
    return SizeGrid(S=int(S), A=int(A), gamma=float(gamma), phi=float(phi))


def grid_from_config(cfg) -> SizeGrid:
    return build_grid(cfg.scale_count, cfg.aspect_count, cfg.gamma, cfg.phi)


@dataclass(frozen=True)
class SizeSample:
    data: np.ndarray  # (C_size, S, A)
    grid: SizeGrid

    @cached_property
    def spectrum(self) -> np.ndarray:
        """DFT of `data`, computed once and shared by detection and update."""
        return dft2(self.data)


@dataclass(frozen=True)
class SizeState:
    model: FilterModel
    label: np.ndarray   # (S, A), peak at the origin
    window: np.ndarray  # (S, A)
    grid: SizeGrid
    theta: float


@dataclass(frozen=True)
class SizeEstimate:
    w: float
    h: float
    n_s: int
    n_a: int
    peak: float
    response: np.ndarray
    sample: SizeSample


def size_window(grid: SizeGrid) -> np.ndarray:
    return hann_window(grid.S, grid.A)


def size_label(grid: SizeGrid, cfg) -> np.ndarray:
    return shift_to_origin(gaussian_label(grid.S, grid.A, cfg.size_sigma_factor, (grid.S, grid.A)))


def sample_size_domain(frame, center, w: float, h: float, grid: SizeGrid, cfg, window=None) -> SizeSample:
    """HOG vectors of all S x A patches around `center`, windowed over the lattice."""
    if window is None:
        window = size_window(grid)
    wf, hf = grid.width_factors.ravel(), grid.height_factors.ravel()
    sizes = [(w * a, h * b) for a, b in zip(wf, hf)]
    vectors = size_feature_batch(frame, center, sizes, cfg)            # (S*A, C)
    data = vectors.T.reshape(-1, grid.S, grid.A) * window[np.newaxis]
    return SizeSample(data=data, grid=grid)


def train_size(state: SizeState, sample: SizeSample) -> SizeState:
    """Replace the model with a fresh solve on `sample`."""
    _check_grid(state, sample)
    return SizeState(
        model=train_from_spectra(sample.spectrum, dft2(state.label), state.model.lam),
        label=state.label, window=state.window, grid=state.grid, theta=state.theta,
    )


def update_size(state: SizeState, sample: SizeSample, theta: float | None = None,
                shift: tuple[int, int] = (0, 0)) -> SizeState:
    """Interpolate a fresh solve on `sample` into the model.

    `shift` = (N_s, N_a) trains on a sample taken around the previous size:
    the label peak moves to the detected cell, which equals training on the
    sample rolled back by (N_s, N_a) with the label at the origin. Lattice
    cells that roll across the border and the window position differ from a
    resampled lattice; detection reuses the sample this way instead of
    extracting S x A patches a second time.
    """
    _check_grid(state, sample)
    theta = state.theta if theta is None else theta
    label = np.roll(state.label, shift, axis=(0, 1)) if any(shift) else state.label
    fresh = train_from_spectra(sample.spectrum, dft2(label), state.model.lam)
    return SizeState(
        model=interpolate_model(state.model, fresh, theta),
        label=state.label, window=state.window, grid=state.grid, theta=state.theta,
    )


def _check_grid(state: SizeState, sample: SizeSample) -> None:
    if sample.grid != state.grid:
        raise DimensionMismatchError(f"sample grid {sample.grid} does not match state grid {state.grid}")


def init_size(frame, center, w: float, h: float, cfg) -> SizeState:
    grid = grid_from_config(cfg)
    window = size_window(grid)
    label = size_label(grid, cfg)
    sample = sample_size_domain(frame, center, w, h, grid, cfg, window)
    return SizeState(
        model=train_from_spectra(sample.spectrum, dft2(label), cfg.lam),
        label=label, window=window, grid=grid, theta=cfg.theta_size,
    )


def detect_size(state: SizeState, frame, center, w: float, h: float, cfg) -> SizeEstimate:
    """Best (N_s, N_a) on the lattice and the resulting clamped size."""
    sample = sample_size_domain(frame, center, w, h, state.grid, cfg, state.window)
    response = correlate_spectrum(state.model, sample.spectrum)
    n_s, n_a, peak = signed_peak(response)
    fw, fh = state.grid.factors(n_s, n_a)
    frame_h, frame_w = frame.shape[:2]
    new_w = float(np.clip(w * fw, MIN_SIDE, 2.0 * frame_w))
    new_h = float(np.clip(h * fh, MIN_SIDE, 2.0 * frame_h))
    return SizeEstimate(w=new_w, h=new_h, n_s=n_s, n_a=n_a, peak=peak, response=response, sample=sample)
