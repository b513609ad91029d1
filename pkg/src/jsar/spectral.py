"""Frequency-domain machinery shared by the translation, size and decision filters.

Conventions:
- Planes are float64 arrays shaped (M, N); multi-channel stacks are (D, M, N).
- dft2 is the unnormalized forward 2D DFT; idft2 applies the 1/(MN) scaling
  and keeps the real part.
- A FilterModel stores the closed-form ridge solution as parts:
      numerator[d] = G * conj(X[d])
      denominator  = sum_d |X[d]|^2
  and the filter spectrum is numerator / (denominator + lam). Interpolating
  the parts, not the ratio, is what the update rule needs.
- Training labels have their peak moved to index (0, 0) (`shift_to_origin`),
  so a response peak at (dy, dx) means a displacement of (dy, dx) cells,
  read cyclically (`signed_peak`).
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError


@dataclass(frozen=True)
class FilterModel:
    numerator: np.ndarray    # (D, M, N) complex128
    denominator: np.ndarray  # (M, N) float64, >= 0
    lam: float

    def __post_init__(self):
        if self.numerator.ndim != 3 or self.numerator.shape[0] < 1:
            raise DimensionMismatchError(f"numerator must be (D, M, N) with D >= 1, got {self.numerator.shape}")
        if self.denominator.shape != self.numerator.shape[1:]:
            raise DimensionMismatchError(
                f"denominator {self.denominator.shape} does not match numerator planes {self.numerator.shape[1:]}"
            )
        if self.lam < 0:
            raise ValueError(f"lam must be non-negative, got {self.lam}")

    @property
    def channel_count(self) -> int:
        return self.numerator.shape[0]

    @property
    def plane_shape(self) -> tuple[int, int]:
        return self.denominator.shape


def _as_stack(sample: np.ndarray) -> np.ndarray:
    sample = np.asarray(sample, dtype=np.float64)
    if sample.ndim == 2:
        return sample[np.newaxis]
    if sample.ndim != 3:
        raise DimensionMismatchError(f"expected (M, N) or (D, M, N), got shape {sample.shape}")
    return sample


# =============================================================================
# Transforms
# =============================================================================

def dft2(plane: np.ndarray) -> np.ndarray:
    """Unnormalized forward DFT over the last two axes."""
    return np.fft.fft2(np.asarray(plane, dtype=np.float64), axes=(-2, -1))


def idft2(spectrum: np.ndarray) -> np.ndarray:
    """Inverse DFT over the last two axes (1/(MN) applied), real part."""
    return np.real(np.fft.ifft2(spectrum, axes=(-2, -1)))


# =============================================================================
# Labels and windows
# =============================================================================

def gaussian_label(rows: int, cols: int, sigma_factor: float, target_extent) -> np.ndarray:
    """Gaussian with peak exactly 1.0 at (rows // 2, cols // 2).

    `target_extent` is a scalar or a (rows, cols) pair in cells; the standard
    deviation along each axis is sigma_factor times that extent.
    """
    if rows < 1 or cols < 1:
        raise ValueError(f"label dimensions must be positive, got {rows}x{cols}")
    if sigma_factor <= 0:
        raise ValueError(f"sigma_factor must be positive, got {sigma_factor}")
    extent_r, extent_c = (target_extent, target_extent) if np.isscalar(target_extent) else target_extent
    sigma_r = sigma_factor * float(extent_r)
    sigma_c = sigma_factor * float(extent_c)
    y, x = np.ogrid[0:rows, 0:cols]
    dy = (y - rows // 2) / sigma_r
    dx = (x - cols // 2) / sigma_c
    return np.exp(-0.5 * (dy ** 2 + dx ** 2))


def shift_to_origin(label: np.ndarray) -> np.ndarray:
    """Move the center cell (rows // 2, cols // 2) to index (0, 0), cyclically."""
    return np.fft.ifftshift(label, axes=(-2, -1))


def hann_window(rows: int, cols: int) -> np.ndarray:
    """Separable Hann taper. Zero on the border rows/cols; a 1x1 window is [[1.0]]."""
    if rows < 1 or cols < 1:
        raise ValueError(f"window dimensions must be positive, got {rows}x{cols}")
    return np.outer(np.hanning(rows), np.hanning(cols))


# =============================================================================
# Training, detection, update
# =============================================================================

def train_filter(sample: np.ndarray, label: np.ndarray, lam: float) -> FilterModel:
    """Closed-form ridge regression over all cyclic shifts of `sample`."""
    stack = _as_stack(sample)
    label = np.asarray(label, dtype=np.float64)
    if stack.shape[1:] != label.shape:
        raise DimensionMismatchError(f"sample planes {stack.shape[1:]} do not match label {label.shape}")
    if lam < 0:
        raise ValueError(f"lam must be non-negative, got {lam}")
    return train_from_spectra(dft2(stack), dft2(label), lam)


def train_from_spectra(xf: np.ndarray, gf: np.ndarray, lam: float) -> FilterModel:
    """`train_filter` on a sample spectrum (D, M, N) and label spectrum (M, N) computed elsewhere."""
    if xf.shape[1:] != gf.shape:
        raise DimensionMismatchError(f"sample spectrum {xf.shape[1:]} does not match label spectrum {gf.shape}")
    numerator = gf[np.newaxis] * np.conj(xf)
    denominator = np.sum(xf.real ** 2 + xf.imag ** 2, axis=0)
    return FilterModel(numerator=numerator, denominator=denominator, lam=float(lam))


def filter_spectrum(model: FilterModel) -> np.ndarray:
    """Per-channel filter spectrum numerator / (denominator + lam); 0 where both vanish."""
    den = model.denominator + model.lam
    out = np.zeros_like(model.numerator)
    np.divide(model.numerator, den[np.newaxis], out=out, where=den[np.newaxis] > 0)
    return out


def spatial_filter(model: FilterModel) -> np.ndarray:
    """The filter in the space domain: its cyclic cross-correlation with a search
    stack reproduces `correlate_response`."""
    return idft2(np.conj(filter_spectrum(model)))


def correlate_response(model: FilterModel, search: np.ndarray) -> np.ndarray:
    """Response plane of `model` over a search stack with matching geometry."""
    stack = _as_stack(search)
    if stack.shape != model.numerator.shape:
        raise DimensionMismatchError(
            f"search stack {stack.shape} does not match model {model.numerator.shape}"
        )
    return correlate_spectrum(model, dft2(stack))


def correlate_spectrum(model: FilterModel, zf: np.ndarray) -> np.ndarray:
    """`correlate_response` on a search spectrum computed elsewhere."""
    if zf.shape != model.numerator.shape:
        raise DimensionMismatchError(f"search spectrum {zf.shape} does not match model {model.numerator.shape}")
    return idft2(np.sum(filter_spectrum(model) * zf, axis=0))


def interpolate_model(old: FilterModel, fresh: FilterModel, theta: float) -> FilterModel:
    """Linear update (1 - theta) * old + theta * fresh of both parts."""
    if old.numerator.shape != fresh.numerator.shape:
        raise DimensionMismatchError(
            f"cannot interpolate models of shape {old.numerator.shape} and {fresh.numerator.shape}"
        )
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    return FilterModel(
        numerator=(1.0 - theta) * old.numerator + theta * fresh.numerator,
        denominator=(1.0 - theta) * old.denominator + theta * fresh.denominator,
        lam=old.lam,
    )


# =============================================================================
# Peak reading
# =============================================================================

def signed_offset(index: int, length: int) -> int:
    """Cyclic index -> signed displacement in (-length/2, length/2]."""
    return index - length if index > length // 2 else index


def signed_peak(response: np.ndarray) -> tuple[int, int, float]:
    """(dy, dx, value) of the response maximum, displacement read cyclically."""
    row, col = np.unravel_index(int(np.argmax(response)), response.shape)
    rows, cols = response.shape
    return signed_offset(int(row), rows), signed_offset(int(col), cols), float(response[row, col])
