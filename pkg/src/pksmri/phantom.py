"""Synthetic multi-contrast head phantom and coil sensitivities.

One ellipse anatomy is rendered once per contrast with tissue-specific
intensities, so all contrasts share edges but not grey levels. Coils are
Gaussian bumps placed on a ring outside the field of view.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from .errors import ValidationError
from .kspace import apply_mask, as_image, fft2c, ifft2c

__all__ = [
    "CONTRASTS",
    "TISSUES",
    "ELLIPSES",
    "DEFAULT_CONTRAST_PARAMS",
    "PhantomSpec",
    "label_map",
    "gen_phantom",
    "gen_coil_maps",
    "simulate_acquisition",
    "unit_disc",
]

CONTRASTS = ("T1", "T2", "PD")
TISSUES = ("fat", "csf", "grey", "white", "ventricle", "lesion")

# (tissue, x0, y0, semi-axis a, semi-axis b, rotation in degrees); later
# entries paint over earlier ones, "gap" paints background (bone).
ELLIPSES: Tuple[Tuple[str, float, float, float, float, float], ...] = (
    ("fat", 0.0, 0.0, 0.72, 0.95, 0.0),
    ("gap", 0.0, 0.0, 0.67, 0.89, 0.0),
    ("csf", 0.0, 0.0, 0.64, 0.86, 0.0),
    ("grey", 0.0, 0.0, 0.61, 0.83, 0.0),
    ("white", -0.22, 0.05, 0.20, 0.48, -10.0),
    ("white", 0.22, 0.05, 0.20, 0.48, 10.0),
    ("white", 0.0, -0.45, 0.25, 0.12, 0.0),
    ("ventricle", -0.07, 0.05, 0.05, 0.20, 15.0),
    ("ventricle", 0.07, 0.05, 0.05, 0.20, -15.0),
    ("lesion", 0.30, 0.35, 0.04, 0.04, 0.0),
    ("lesion", -0.25, -0.30, 0.03, 0.05, 30.0),
    ("lesion", 0.10, -0.60, 0.03, 0.03, 0.0),
)

# T1: bright fat and white matter, dark fluid. T2: bright fluid.
DEFAULT_CONTRAST_PARAMS: Dict[str, Dict[str, float]] = {
    "fat": {"T1": 0.85, "T2": 0.55, "PD": 0.70},
    "csf": {"T1": 0.25, "T2": 0.90, "PD": 0.80},
    "grey": {"T1": 0.50, "T2": 0.60, "PD": 0.70},
    "white": {"T1": 0.70, "T2": 0.40, "PD": 0.55},
    "ventricle": {"T1": 0.20, "T2": 1.00, "PD": 0.90},
    "lesion": {"T1": 0.35, "T2": 0.85, "PD": 0.75},
}


def _default_params():
    return {k: dict(v) for k, v in DEFAULT_CONTRAST_PARAMS.items()}


@dataclass(frozen=True)
class PhantomSpec:
    """Parameters of the synthetic slice.

    Parameters
    ----------
    size : int
        Image is ``size x size``; at least 32.
    n_coils : int
    seed : int
        Drives noise, geometry jitter and per-coil phase offsets.
    contrast_params : dict
        ``tissue -> {contrast -> intensity}`` with intensities in [0, 1].
    noise_std : float
        Std of complex Gaussian noise added to each contrast's k-space.
    jitter : float
        Max random shift of ellipse centres and relative change of semi-axes.
        Zero keeps the canonical anatomy for every seed.
    coil_width : float
        Gaussian width of each coil bump, in units of the half field of view.
    """

    size: int = 64
    n_coils: int = 4
    seed: int = 0
    contrast_params: Mapping[str, Mapping[str, float]] = field(default_factory=_default_params)
    noise_std: float = 0.0
    jitter: float = 0.0
    coil_width: float = 0.4

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 32:
            raise ValidationError(f"size must be an integer >= 32, got {self.size}")
        if int(self.n_coils) != self.n_coils or self.n_coils < 1:
            raise ValidationError(f"n_coils must be >= 1, got {self.n_coils}")
        if not (self.noise_std >= 0 and np.isfinite(self.noise_std)):
            raise ValidationError("noise_std must be finite and nonnegative")
        if not 0 <= self.jitter < 0.1:
            raise ValidationError("jitter must lie in [0, 0.1)")
        if not self.coil_width > 0:
            raise ValidationError("coil_width must be positive")
        missing = set(TISSUES) - set(self.contrast_params)
        if missing:
            raise ValidationError(f"contrast_params lacks tissues {sorted(missing)}")
        for tissue, vals in self.contrast_params.items():
            for c in CONTRASTS:
                v = vals.get(c) if hasattr(vals, "get") else None
                if v is None or not 0 <= v <= 1:
                    raise ValidationError(f"{tissue}/{c} intensity must lie in [0, 1], got {v}")


def _grid(n):
    return np.mgrid[-1 : 1 : n * 1j, -1 : 1 : n * 1j]


def unit_disc(n: int) -> np.ndarray:
    """Pixels inside the unit disc of the ``[-1, 1]^2`` grid."""
    y, x = _grid(n)
    return x ** 2 + y ** 2 <= 1


def label_map(spec: PhantomSpec) -> np.ndarray:
    """Tissue index per pixel (into ``TISSUES``), -1 for background."""
    n = spec.size
    y, x = _grid(n)
    rng = np.random.default_rng(spec.seed & 0xFFFFFFFFFFFFFFFF)
    lab = np.full((n, n), -1, dtype=int)
    for tissue, x0, y0, a, b, theta in ELLIPSES:
        if spec.jitter:
            dx, dy, sa, sb = rng.uniform(-spec.jitter, spec.jitter, 4)
            x0, y0, a, b = x0 + dx, y0 + dy, a * (1 + sa), b * (1 + sb)
        t = np.deg2rad(theta)
        c, s = np.cos(t), np.sin(t)
        xr = (x - x0) * c + (y - y0) * s
        yr = -(x - x0) * s + (y - y0) * c
        lab[(xr / a) ** 2 + (yr / b) ** 2 <= 1] = -1 if tissue == "gap" else TISSUES.index(tissue)
    return lab


def gen_phantom(spec: Optional[PhantomSpec] = None) -> Dict[str, np.ndarray]:
    """Render the anatomy once per contrast.

    Returns
    -------
    dict
        ``{"T1": img, "T2": img, "PD": img}``, complex128 images. With
        ``noise_std == 0`` they are real and nonnegative.
    """
    spec = spec or PhantomSpec()
    lab = label_map(spec)
    out = {}
    rng = np.random.default_rng((spec.seed + 1) & 0xFFFFFFFFFFFFFFFF)
    for c in CONTRASTS:
        lut = np.array([spec.contrast_params[t][c] for t in TISSUES] + [0.0])
        img = lut[lab].astype(np.complex128)
        if spec.noise_std > 0:
            noise = rng.normal(0, spec.noise_std, (2,) + img.shape)
            img = ifft2c(fft2c(img) + noise[0] + 1j * noise[1])
        out[c] = img
    return out


def gen_coil_maps(n: int, n_coils: int, seed: int = 0, width: float = 0.4) -> np.ndarray:
    """Smooth complex coil sensitivities, shape ``(n_coils, n, n)``.

    Coil ``c`` is a Gaussian bump centred at radius 1.2 and angle
    ``2 pi c / n_coils`` with a gentle linear phase ramp and a seeded
    constant phase. Maps are divided by their pixelwise root-sum-of-squares,
    so the RSS is exactly one everywhere.
    """
    if n_coils < 1:
        raise ValidationError("n_coils must be >= 1")
    if n_coils == 1:
        return np.ones((1, n, n), dtype=np.complex128)
    y, x = _grid(n)
    offsets = np.random.default_rng(seed & 0xFFFFFFFFFFFFFFFF).uniform(0, 2 * np.pi, n_coils)
    maps = np.empty((n_coils, n, n), dtype=np.complex128)
    for c in range(n_coils):
        ang = 2 * np.pi * c / n_coils
        cx, cy = 1.2 * np.cos(ang), 1.2 * np.sin(ang)
        mag = np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2 * width ** 2))
        phase = 0.5 * (np.cos(ang) * x + np.sin(ang) * y) + offsets[c]
        maps[c] = mag * np.exp(1j * phase)
    maps /= np.sqrt(np.sum(np.abs(maps) ** 2, axis=0))
    return maps


def simulate_acquisition(image, maps, mask=None) -> np.ndarray:
    """Multi-coil k-space ``apply_mask(fft2c(maps * image), mask)``."""
    img = as_image(image)
    m = np.asarray(maps)
    if m.ndim == 2:
        m = m[None]
    if m.shape[1:] != img.shape:
        raise ValidationError(f"maps {m.shape} do not match image {img.shape}")
    ksp = fft2c(m * img)
    if mask is None:
        return ksp
    return apply_mask(ksp, mask)
