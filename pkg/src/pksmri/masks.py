"""Seeded undersampling patterns: 2D random, 1D Cartesian rows, 2D Poisson disc.

None of the generators forces a fully-sampled calibration block. Variable
density patterns weight each location by its normalised distance ``d`` from
the k-space center through ``1 + (d / d_scale) ** power``: acceptance
probabilities are divided by it, Poisson-disc radii are multiplied by it.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import MaskGenerationError, ValidationError
from .kspace import SamplingMask

__all__ = [
    "FAMILIES",
    "MaskSpec",
    "gen_random2d",
    "gen_cartesian1d",
    "gen_poisson2d",
    "generate_mask",
    "measured_R",
]

logger = logging.getLogger(__name__)

FAMILIES = ("random2d", "cartesian1d", "poisson2d")
_ALIASES = {
    "random2d": "random2d", "random": "random2d", "2d_random": "random2d",
    "cartesian1d": "cartesian1d", "cartesian": "cartesian1d", "1d_cartesian": "cartesian1d",
    "poisson2d": "poisson2d", "poisson": "poisson2d", "2d_poisson": "poisson2d",
}

MAX_CALIBRATION_ITERS = 50
POISSON_TOLERANCE = 0.10


@dataclass(frozen=True)
class MaskSpec:
    """Declarative description of one sampling pattern.

    Parameters
    ----------
    family : {"random2d", "cartesian1d", "poisson2d"}
    R : float
        Target acceleration factor, ``R >= 1``.
    rows, cols : int
        Grid size, both at least 8.
    seed : int
        Any 64-bit integer.
    density : {"variable", "uniform"}
        Density profile for the 2D families; ignored by ``cartesian1d``.
    power : float
        Exponent of the variable-density weight.
    d_scale : float
        Distance, as a fraction of the center-to-corner distance, at which the
        variable-density weight reaches 2.
    """

    family: str = "random2d"
    R: float = 4.0
    rows: int = 64
    cols: int = 64
    seed: int = 0
    density: str = "variable"
    power: float = 2.0
    d_scale: float = 1.0

    def __post_init__(self):
        fam = _ALIASES.get(str(self.family).lower())
        if fam is None:
            raise ValidationError(f"unknown mask family {self.family!r}; expected one of {FAMILIES}")
        object.__setattr__(self, "family", fam)
        if not (self.R >= 1 and math.isfinite(self.R)):
            raise ValidationError(f"R must be a finite value >= 1, got {self.R}")
        if self.rows < 8 or self.cols < 8:
            raise ValidationError(f"mask grid must be at least 8x8, got {self.rows}x{self.cols}")
        if self.density not in ("variable", "uniform"):
            raise ValidationError(f"density must be 'variable' or 'uniform', got {self.density!r}")
        if self.d_scale <= 0:
            raise ValidationError("d_scale must be positive")

    @property
    def label(self) -> str:
        return self.family

    def weight(self) -> np.ndarray:
        """Variable-density weight ``1 + (d/d_scale)^power`` (ones when uniform)."""
        if self.density == "uniform":
            return np.ones((self.rows, self.cols))
        d = center_distance(self.rows, self.cols)
        dmax = d.max()
        if dmax == 0:
            return np.ones_like(d)
        return 1.0 + (d / (dmax * self.d_scale)) ** self.power


def center_distance(rows, cols) -> np.ndarray:
    """Euclidean distance of each grid point from ``(rows // 2, cols // 2)``."""
    r = np.arange(rows) - rows // 2
    c = np.arange(cols) - cols // 2
    return np.hypot(r[:, None], c[None, :])


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)


def _check_family(spec, family):
    if spec.family != family:
        raise ValidationError(f"spec family is {spec.family!r}, expected {family!r}")


def _wrap(ind, spec, **meta):
    return SamplingMask(ind, nominal_R=float(spec.R), seed=int(spec.seed), label=spec.family,
                        meta={"density": spec.density, "power": spec.power, "d_scale": spec.d_scale, **meta})


def gen_random2d(spec: MaskSpec) -> SamplingMask:
    """Independent Bernoulli draw per location with mean acceptance ``1/R``."""
    _check_family(spec, "random2d")
    shape = (spec.rows, spec.cols)
    if spec.R == 1:
        return _wrap(np.ones(shape, dtype=bool), spec)
    base = 1.0 / spec.weight()
    target = 1.0 / spec.R
    # bisection on the global scale so the clipped mean hits 1/R
    lo, hi = 0.0, 1.0 / base.min()
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.minimum(1.0, mid * base).mean() > target:
            hi = mid
        else:
            lo = mid
    prob = np.minimum(1.0, 0.5 * (lo + hi) * base)
    ind = _rng(spec.seed).random(shape) < prob
    if not ind.any():
        ind[spec.rows // 2, spec.cols // 2] = True
    return _wrap(ind, spec)


def _round_half_up(x) -> int:
    return int(math.floor(x + 0.5))


def gen_cartesian1d(spec: MaskSpec) -> SamplingMask:
    """Fully sample ``round(rows / R)`` phase-encode rows chosen uniformly at random."""
    _check_family(spec, "cartesian1d")
    n_sel = _round_half_up(spec.rows / spec.R)
    if n_sel < 1:
        raise ValidationError(f"R={spec.R} leaves no rows on a {spec.rows}-row grid")
    rows = _rng(spec.seed).choice(spec.rows, size=n_sel, replace=False)
    ind = np.zeros((spec.rows, spec.cols), dtype=bool)
    ind[np.sort(rows)] = True
    return _wrap(ind, spec)


def poisson_radius(spec: MaskSpec, scale: float) -> np.ndarray:
    """Minimum-spacing radius at every grid point for a global ``scale``."""
    return scale * spec.weight()


def poisson_disc(spec: MaskSpec, scale: float, order=None) -> np.ndarray:
    """One dart-throwing pass with a fixed candidate order.

    A candidate ``q`` is accepted when every accepted ``p`` satisfies
    ``|p - q| >= (r(p) + r(q)) / 2``.
    """
    radius = np.ascontiguousarray(poisson_radius(spec, scale), dtype=np.float64)
    if order is None:
        order = _rng(spec.seed).permutation(spec.rows * spec.cols)
    cand_r = (order // spec.cols).astype(np.int64)
    cand_c = (order % spec.cols).astype(np.int64)
    reach = int(math.ceil(radius.max()))
    return _kernels.poisson_throw(cand_r, cand_c, radius, reach)


def gen_poisson2d(spec: MaskSpec) -> SamplingMask:
    """Variable-density Poisson-disc pattern, radius scale calibrated to ``1/R``.

    The global radius scale is bisected (at most ``MAX_CALIBRATION_ITERS``
    passes) until the sampled fraction is within 1% of ``1/R``; the closest
    pass is kept and must land within 10%.
    """
    _check_family(spec, "poisson2d")
    shape = (spec.rows, spec.cols)
    if spec.R == 1:
        return _wrap(np.ones(shape, dtype=bool), spec, radius_scale=0.0)
    target = 1.0 / spec.R
    order = _rng(spec.seed).permutation(spec.rows * spec.cols)
    lo, hi = 0.0, float(max(spec.rows, spec.cols))
    best, best_err, best_scale = None, np.inf, 0.0
    for _ in range(MAX_CALIBRATION_ITERS):
        mid = 0.5 * (lo + hi)
        ind = poisson_disc(spec, mid, order)
        frac = ind.mean()
        err = abs(frac - target) / target
        if err < best_err:
            best, best_err, best_scale = ind, err, mid
        if err < 0.01:
            break
        if frac > target:
            lo = mid
        else:
            hi = mid
    if best_err > POISSON_TOLERANCE:
        raise MaskGenerationError(
            f"Poisson calibration reached fraction error {best_err:.3f} for R={spec.R} "
            f"on {spec.rows}x{spec.cols} after {MAX_CALIBRATION_ITERS} passes"
        )
    logger.debug("poisson R=%s scale=%.4f frac_err=%.4f", spec.R, best_scale, best_err)
    return _wrap(best, spec, radius_scale=best_scale)


_GENERATORS = {
    "random2d": gen_random2d,
    "cartesian1d": gen_cartesian1d,
    "poisson2d": gen_poisson2d,
}


def generate_mask(spec: MaskSpec) -> SamplingMask:
    """Dispatch on ``spec.family``."""
    return _GENERATORS[spec.family](spec)


def measured_R(mask) -> float:
    """Acceleration actually achieved: total locations over acquired ones."""
    ind = mask.indicator if isinstance(mask, SamplingMask) else np.asarray(mask).astype(bool)
    n = int(ind.sum())
    if n == 0:
        raise ValidationError("mask acquires no samples")
    return ind.size / n
