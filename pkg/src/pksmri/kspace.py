"""Centered unitary FFTs, masking and coil combination for multi-coil k-space.

Arrays follow the ``(coil, row, col)`` convention. Single images are plain
2D complex arrays; the k-space center (DC) sits at index ``n // 2`` along
each axis for both even and odd sizes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

__all__ = [
    "SamplingMask",
    "as_image",
    "as_volume",
    "fft2c",
    "ifft2c",
    "apply_mask",
    "rss_combine",
    "zero_filled_recon",
]


def _finite(x, what):
    if not np.all(np.isfinite(x)):
        raise ValidationError(f"{what} contains non-finite samples")
    return x


def as_image(img) -> np.ndarray:
    """Validate a 2D complex image and return it as ``complex128``."""
    x = np.asarray(img)
    if x.ndim != 2 or x.size == 0:
        raise ValidationError(f"expected a non-empty 2D image, got shape {x.shape}")
    return _finite(x.astype(np.complex128, copy=False), "image")


def as_volume(vol) -> np.ndarray:
    """Validate a ``(coil, row, col)`` complex volume and return it as ``complex128``."""
    x = np.asarray(vol)
    if x.ndim != 3 or x.size == 0:
        raise ValidationError(f"expected a (coil, row, col) volume, got shape {x.shape}")
    return _finite(x.astype(np.complex128, copy=False), "k-space volume")


@dataclass(frozen=True, eq=False)
class SamplingMask:
    """Binary acquisition pattern shared by every coil.

    Parameters
    ----------
    indicator : ndarray of bool, shape (rows, cols)
        ``True`` where a k-space location is acquired.
    nominal_R : float
        Acceleration factor the pattern was generated for.
    seed : int
        Seed used by the generator (0 for hand-built masks).
    label : str
        Short family name used in file names and reports.
    """

    indicator: np.ndarray
    nominal_R: float = 1.0
    seed: int = 0
    label: str = "custom"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        ind = np.asarray(self.indicator)
        if ind.ndim != 2:
            raise ValidationError(f"mask must be 2D, got shape {ind.shape}")
        if ind.dtype != np.bool_:
            if not np.all((ind == 0) | (ind == 1)):
                raise ValidationError("mask values must be exactly 0 or 1")
            ind = ind.astype(bool)
        if not ind.any():
            raise ValidationError("mask acquires no samples")
        if self.nominal_R < 1:
            raise ValidationError(f"nominal_R must be >= 1, got {self.nominal_R}")
        ind = ind.copy()
        ind.setflags(write=False)
        object.__setattr__(self, "indicator", ind)

    @property
    def shape(self):
        return self.indicator.shape

    @property
    def measured_R(self) -> float:
        return self.indicator.size / int(self.indicator.sum())

    def transpose(self) -> "SamplingMask":
        return SamplingMask(self.indicator.T, self.nominal_R, self.seed, self.label, dict(self.meta))


def _indicator(mask) -> np.ndarray:
    if isinstance(mask, SamplingMask):
        return mask.indicator
    ind = np.asarray(mask)
    if ind.dtype != np.bool_:
        if not np.all((ind == 0) | (ind == 1)):
            raise ValidationError("mask values must be exactly 0 or 1")
        ind = ind.astype(bool)
    return ind


def fft2c(img) -> np.ndarray:
    """Centered orthonormal 2D DFT over the last two axes.

    Leading axes (e.g. coils) are transformed independently.
    """
    x = np.asarray(img)
    if x.ndim < 2:
        raise ValidationError("fft2c needs at least 2 dimensions")
    _finite(x, "fft2c input")
    ax = (-2, -1)
    return np.fft.fftshift(np.fft.fft2(np.fft.ifftshift(x, axes=ax), norm="ortho"), axes=ax)


def ifft2c(ksp) -> np.ndarray:
    """Inverse of :func:`fft2c`."""
    x = np.asarray(ksp)
    if x.ndim < 2:
        raise ValidationError("ifft2c needs at least 2 dimensions")
    _finite(x, "ifft2c input")
    ax = (-2, -1)
    return np.fft.fftshift(np.fft.ifft2(np.fft.ifftshift(x, axes=ax), norm="ortho"), axes=ax)


def apply_mask(ksp, mask) -> np.ndarray:
    """Zero every unacquired location; acquired samples pass through untouched."""
    vol = np.asarray(ksp)
    ind = _indicator(mask)
    if vol.shape[-2:] != ind.shape:
        raise ValidationError(f"mask shape {ind.shape} does not match k-space {vol.shape[-2:]}")
    return np.where(ind, vol, 0).astype(vol.dtype, copy=False)


def rss_combine(coil_images) -> np.ndarray:
    """Root-sum-of-squares over the coil axis (axis 0)."""
    x = np.asarray(coil_images)
    if x.ndim == 2:
        x = x[None]
    if x.ndim != 3 or x.shape[0] == 0:
        raise ValidationError(f"expected (coil, row, col) images, got shape {x.shape}")
    return np.sqrt(np.sum(x.real ** 2 + x.imag ** 2, axis=0))


def zero_filled_recon(ksp) -> np.ndarray:
    """Magnitude image of multi-coil k-space with missing samples left at zero."""
    return rss_combine(ifft2c(as_volume(ksp)))
