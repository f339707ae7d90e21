"""SAKE: calibrationless k-space completion by alternating projections.

Each iteration lifts the current estimate to its block-Hankel matrix,
truncates it to rank ``k`` (LR), folds it back by averaging (SC) and
re-inserts the acquired samples (DC).
"""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .errors import NumericalDivergenceError, ValidationError
from .hankel import HankelConfig, hankel_adjoint_avg, hankel_forward, lowrank_project
from .kspace import _indicator, as_volume

__all__ = ["SakeConfig", "SolveReport", "sake_reconstruct", "sake_residual", "write_history_csv"]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SakeConfig:
    hankel: HankelConfig = field(default_factory=HankelConfig)
    max_iters: int = 30
    rel_tol: float = 1e-4
    record_history: bool = True

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValidationError("max_iters must be >= 1")
        if self.rel_tol < 0:
            raise ValidationError("rel_tol must be nonnegative")


@dataclass
class SolveReport:
    iterations_run: int = 0
    rel_change_history: List[float] = field(default_factory=list)
    data_residual_history: List[float] = field(default_factory=list)
    final_data_residual: float = 0.0
    rank_k: int = 0
    wall_time_s: float = 0.0


def sake_residual(x, acquired, mask) -> float:
    """Squared Frobenius norm of ``x - acquired`` over the sampled locations."""
    x = np.asarray(x)
    a = np.asarray(acquired)
    ind = _indicator(mask)
    if x.shape != a.shape or x.shape[-2:] != ind.shape:
        raise ValidationError(f"shape mismatch: x {x.shape}, acquired {a.shape}, mask {ind.shape}")
    d = (x - a)[..., ind]
    return float(np.sum(d.real ** 2 + d.imag ** 2))


def _rel_change(new, old):
    den = np.linalg.norm(old)
    num = np.linalg.norm(new - old)
    if den == 0:
        return 0.0 if num == 0 else np.inf
    return float(num / den)


def sake_reconstruct(
    acquired,
    mask,
    cfg: Optional[SakeConfig] = None,
    callback: Optional[Callable[[int, np.ndarray], None]] = None,
):
    """Complete undersampled multi-coil k-space.

    Parameters
    ----------
    acquired : ndarray, shape (coil, row, col)
        Measured k-space, zero at unsampled locations.
    mask : SamplingMask or bool ndarray
        Acquisition pattern shared by all coils.
    cfg : SakeConfig, optional
    callback : callable, optional
        Called as ``callback(iteration, x)`` after every DC projection.

    Returns
    -------
    x : ndarray
        Completed k-space; equal to ``acquired`` wherever ``mask`` is set.
    report : SolveReport
    """
    cfg = cfg or SakeConfig()
    y = as_volume(acquired)
    ind = _indicator(mask)
    if y.shape[-2:] != ind.shape:
        raise ValidationError(f"mask shape {ind.shape} does not match k-space {y.shape[-2:]}")
    hc = cfg.hankel
    hc.check_fits(*y.shape[1:])
    if np.any(y[:, ~ind] != 0):
        raise ValidationError("acquired k-space has nonzero samples outside the mask")
    n_rows, n_cols = hc.matrix_shape(y.shape)
    rank = min(hc.resolved_rank(), n_rows, n_cols)
    if rank < hc.resolved_rank():
        logger.warning("rank %d clamped to %d for %s matrix", hc.resolved_rank(), rank, (n_rows, n_cols))

    report = SolveReport(rank_k=rank)
    t_start = time.perf_counter()
    x = y.copy()
    for it in range(1, cfg.max_iters + 1):
        est = hankel_adjoint_avg(lowrank_project(hankel_forward(x, hc), rank), y.shape, hc)
        if not np.all(np.isfinite(est)):
            raise NumericalDivergenceError(it)
        x_new = np.where(ind, y, est)
        change = _rel_change(x_new, x)
        if cfg.record_history:
            report.rel_change_history.append(change)
            report.data_residual_history.append(sake_residual(est, y, ind))
        x = x_new
        report.iterations_run = it
        if callback is not None:
            callback(it, x)
        if change < cfg.rel_tol:
            break
    report.wall_time_s = time.perf_counter() - t_start
    report.final_data_residual = float(np.max(np.abs(x[:, ind] - y[:, ind]), initial=0.0))
    return x, report


def write_history_csv(report: SolveReport, path) -> None:
    """Dump per-iteration ``iteration,rel_change,data_residual`` rows."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "rel_change", "data_residual"])
        for i, (rc, dr) in enumerate(zip(report.rel_change_history, report.data_residual_history), 1):
            w.writerow([i, repr(float(rc)), repr(float(dr))])
