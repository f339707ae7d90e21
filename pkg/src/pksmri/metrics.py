"""PSNR and SSIM on magnitude images, both normalised by the truth maximum."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .errors import ValidationError

__all__ = ["PSNR_CAP_DB", "MetricPair", "psnr", "ssim", "evaluate", "gaussian_window"]

PSNR_CAP_DB = 99.0
WIN_SIZE = 11
WIN_SIGMA = 1.5
K1, K2 = 0.01, 0.03


@dataclass(frozen=True)
class MetricPair:
    psnr_db: float
    ssim: float


def _normalised(recon, truth):
    r = np.asarray(recon, dtype=np.float64)
    t = np.asarray(truth, dtype=np.float64)
    if r.shape != t.shape or r.ndim != 2:
        raise ValidationError(f"need two 2D images of equal shape, got {r.shape} and {t.shape}")
    if not (np.all(np.isfinite(r)) and np.all(np.isfinite(t))):
        raise ValidationError("images must be finite")
    peak = np.max(np.abs(t))
    if peak == 0:
        raise ValidationError("truth image is all zero")
    return r / peak, t / peak


def psnr(recon, truth) -> float:
    """Peak SNR in dB with peak 1 after scaling by ``1 / max|truth|``.

    Exact matches (and anything above the cap) report ``PSNR_CAP_DB``.
    """
    r, t = _normalised(recon, truth)
    mse = np.mean((r - t) ** 2)
    if mse == 0:
        return PSNR_CAP_DB
    return float(min(PSNR_CAP_DB, 10 * np.log10(1.0 / mse)))


def gaussian_window(size: int = WIN_SIZE, sigma: float = WIN_SIGMA) -> np.ndarray:
    """Normalised 1D Gaussian taps; the 2D window is their outer product."""
    x = np.arange(size) - (size - 1) / 2
    g = np.exp(-(x ** 2) / (2 * sigma ** 2))
    return g / g.sum()


def _filter_valid(img, g):
    h = len(g) // 2
    out = correlate1d(correlate1d(img, g, axis=0, mode="constant"), g, axis=1, mode="constant")
    return out[h:-h, h:-h]


def ssim(recon, truth) -> float:
    """Mean structural similarity over all fully-covered 11x11 windows.

    Gaussian weights (sigma 1.5), population statistics, data range 1.
    """
    r, t = _normalised(recon, truth)
    if min(r.shape) < WIN_SIZE:
        raise ValidationError(f"images must be at least {WIN_SIZE}x{WIN_SIZE}, got {r.shape}")
    if np.array_equal(r, t):
        return 1.0
    g = gaussian_window()
    mu_x = _filter_valid(r, g)
    mu_y = _filter_valid(t, g)
    vx = _filter_valid(r * r, g) - mu_x * mu_x
    vy = _filter_valid(t * t, g) - mu_y * mu_y
    cov = _filter_valid(r * t, g) - mu_x * mu_y
    c1, c2 = K1 ** 2, K2 ** 2
    num = (2 * mu_x * mu_y + c1) * (2 * cov + c2)
    den = (mu_x ** 2 + mu_y ** 2 + c1) * (vx + vy + c2)
    return float(np.mean(num / den))


def evaluate(recon, truth) -> MetricPair:
    return MetricPair(psnr(recon, truth), ssim(recon, truth))
