"""Hot inner loops: Hankel lift/fold and Poisson-disc dart throwing.

Every kernel exists twice, a numba ``@njit`` version and a pure-numpy
version with the same semantics. The numba path is used when numba imports
and ``PKSMRI_DISABLE_NUMBA`` is not set to a truthy value; both paths stay
importable so they can be cross-checked and benchmarked against each other.
"""

from __future__ import annotations

import os

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

_FLAG = "PKSMRI_DISABLE_NUMBA"
_DISABLED = os.environ.get(_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLED:
        raise ImportError(f"numba disabled by {_FLAG}")
    import numba

    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"


# --------------------------------------------------------------------------
# pure numpy
# --------------------------------------------------------------------------

def lift_numpy(vol, win_rows, win_cols):
    nc, rows, cols = vol.shape
    nr, ncl = rows - win_rows + 1, cols - win_cols + 1
    view = sliding_window_view(vol, (win_rows, win_cols), axis=(1, 2))
    # (coil, pos_r, pos_c, wr, wc) -> (pos_r, pos_c, coil, wr, wc)
    return np.ascontiguousarray(
        view.transpose(1, 2, 0, 3, 4).reshape(nr * ncl, nc * win_rows * win_cols)
    )


def fold_numpy(mat, n_coils, rows, cols, win_rows, win_cols):
    nr, ncl = rows - win_rows + 1, cols - win_cols + 1
    blocks = mat.reshape(nr, ncl, n_coils, win_rows, win_cols)
    out = np.zeros((n_coils, rows, cols), dtype=mat.dtype)
    for i in range(win_rows):
        for j in range(win_cols):
            out[:, i:i + nr, j:j + ncl] += blocks[:, :, :, i, j].transpose(2, 0, 1)
    return out


def poisson_throw_numpy(cand_r, cand_c, radius, reach):
    rows, cols = radius.shape
    taken = np.zeros((rows, cols), dtype=np.bool_)
    for q in range(cand_r.shape[0]):
        r, c = cand_r[q], cand_c[q]
        r0, r1 = max(r - reach, 0), min(r + reach + 1, rows)
        c0, c1 = max(c - reach, 0), min(c + reach + 1, cols)
        pr, pc = np.nonzero(taken[r0:r1, c0:c1])
        if pr.size:
            dr = (pr + r0 - r).astype(np.float64)
            dc = (pc + c0 - c).astype(np.float64)
            need = 0.5 * (radius[pr + r0, pc + c0] + radius[r, c])
            if np.any(dr * dr + dc * dc < need * need):
                continue
        taken[r, c] = True
    return taken


# --------------------------------------------------------------------------
# numba
# --------------------------------------------------------------------------

if HAVE_NUMBA:

    @numba.njit(cache=True)
    def lift_numba(vol, win_rows, win_cols):
        nc, rows, cols = vol.shape
        nr, ncl = rows - win_rows + 1, cols - win_cols + 1
        wsz = win_rows * win_cols
        out = np.empty((nr * ncl, nc * wsz), dtype=vol.dtype)
        for pr in range(nr):
            for pc in range(ncl):
                row = pr * ncl + pc
                for c in range(nc):
                    base = c * wsz
                    for i in range(win_rows):
                        for j in range(win_cols):
                            out[row, base + i * win_cols + j] = vol[c, pr + i, pc + j]
        return out

    @numba.njit(cache=True)
    def fold_numba(mat, n_coils, rows, cols, win_rows, win_cols):
        nr, ncl = rows - win_rows + 1, cols - win_cols + 1
        wsz = win_rows * win_cols
        out = np.zeros((n_coils, rows, cols), dtype=mat.dtype)
        # offset-major order matches fold_numpy's accumulation order
        for i in range(win_rows):
            for j in range(win_cols):
                for c in range(n_coils):
                    col = c * wsz + i * win_cols + j
                    for pr in range(nr):
                        for pc in range(ncl):
                            out[c, pr + i, pc + j] += mat[pr * ncl + pc, col]
        return out

    @numba.njit(cache=True)
    def poisson_throw_numba(cand_r, cand_c, radius, reach):
        rows, cols = radius.shape
        taken = np.zeros((rows, cols), dtype=np.bool_)
        for q in range(cand_r.shape[0]):
            r, c = cand_r[q], cand_c[q]
            rq = radius[r, c]
            ok = True
            for pr in range(max(r - reach, 0), min(r + reach + 1, rows)):
                if not ok:
                    break
                for pc in range(max(c - reach, 0), min(c + reach + 1, cols)):
                    if taken[pr, pc]:
                        dr = float(pr - r)
                        dc = float(pc - c)
                        need = 0.5 * (radius[pr, pc] + rq)
                        if dr * dr + dc * dc < need * need:
                            ok = False
                            break
            if ok:
                taken[r, c] = True
        return taken

    lift, fold, poisson_throw = lift_numba, fold_numba, poisson_throw_numba
else:
    lift_numba = fold_numba = poisson_throw_numba = None
    lift, fold, poisson_throw = lift_numpy, fold_numpy, poisson_throw_numpy
