"""Block-Hankel lifting of multi-coil k-space and rank-k truncation.

Rows of the data matrix are sliding-window positions in row-major order;
columns are the row-major window pixels, concatenated coil after coil.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .errors import ValidationError

__all__ = [
    "HankelConfig",
    "hankel_forward",
    "hankel_adjoint_avg",
    "lowrank_project",
    "window_counts",
]


@dataclass(frozen=True)
class HankelConfig:
    """Sliding-window size and target rank.

    ``rank_k=None`` resolves to ``win_rows * win_cols`` at solve time.
    """

    win_rows: int = 6
    win_cols: int = 6
    rank_k: Optional[int] = None

    def __post_init__(self):
        if self.win_rows < 1 or self.win_cols < 1:
            raise ValidationError("window dimensions must be positive")
        if self.rank_k is not None and self.rank_k < 1:
            raise ValidationError("rank_k must be positive")

    def resolved_rank(self) -> int:
        return self.rank_k if self.rank_k is not None else self.win_rows * self.win_cols

    def matrix_shape(self, dims):
        nc, rows, cols = dims
        self.check_fits(rows, cols)
        return (rows - self.win_rows + 1) * (cols - self.win_cols + 1), nc * self.win_rows * self.win_cols

    def check_fits(self, rows, cols):
        if self.win_rows > rows or self.win_cols > cols:
            raise ValidationError(
                f"{self.win_rows}x{self.win_cols} window does not fit a {rows}x{cols} grid"
            )


def hankel_forward(vol, cfg: HankelConfig) -> np.ndarray:
    """Lift a ``(coil, row, col)`` volume into its block-Hankel data matrix."""
    x = np.asarray(vol)
    if x.ndim != 3:
        raise ValidationError(f"expected (coil, row, col) volume, got shape {x.shape}")
    cfg.check_fits(x.shape[1], x.shape[2])
    if not np.all(np.isfinite(x)):
        raise ValidationError("volume contains non-finite samples")
    x = np.ascontiguousarray(x, dtype=np.complex128)
    return _kernels.lift(x, cfg.win_rows, cfg.win_cols)


def window_counts(rows, cols, cfg: HankelConfig) -> np.ndarray:
    """Number of sliding windows covering each grid location."""
    nr, ncl = rows - cfg.win_rows + 1, cols - cfg.win_cols + 1
    r = np.arange(rows)
    c = np.arange(cols)
    cr = np.minimum(r, nr - 1) - np.maximum(0, r - cfg.win_rows + 1) + 1
    cc = np.minimum(c, ncl - 1) - np.maximum(0, c - cfg.win_cols + 1) + 1
    return np.outer(cr, cc).astype(np.float64)


def hankel_adjoint_avg(mat, dims, cfg: HankelConfig) -> np.ndarray:
    """Fold a data matrix back to k-space, averaging entries that share a location.

    This is the orthogonal projection onto block-Hankel structure followed by
    un-lifting, so ``hankel_adjoint_avg(hankel_forward(x)) == x``.
    """
    m = np.asarray(mat)
    nc, rows, cols = (int(d) for d in dims)
    expected = cfg.matrix_shape((nc, rows, cols))
    if m.shape != expected:
        raise ValidationError(f"data matrix shape {m.shape} does not match {expected} for dims {dims}")
    m = np.ascontiguousarray(m, dtype=np.complex128)
    total = _kernels.fold(m, nc, rows, cols, cfg.win_rows, cfg.win_cols)
    return total / window_counts(rows, cols, cfg)


def lowrank_project(mat, rank_k: int) -> np.ndarray:
    """Best rank-``rank_k`` approximation in Frobenius norm (truncated SVD).

    A rank above ``min(mat.shape)`` is clamped with a warning so parameter
    sweeps keep running.
    """
    m = np.asarray(mat)
    if m.ndim != 2:
        raise ValidationError("lowrank_project expects a 2D matrix")
    if rank_k < 1:
        raise ValidationError("rank_k must be >= 1")
    full = min(m.shape)
    if rank_k > full:
        warnings.warn(f"rank {rank_k} exceeds matrix rank bound {full}; clamped", RuntimeWarning, stacklevel=2)
        rank_k = full
    if rank_k == full:
        return np.array(m, copy=True)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    return (u[:, :rank_k] * s[:rank_k]) @ vh[:rank_k]
