import os
import subprocess
import sys

import numpy as np
import pytest

from pksmri import _kernels
from pksmri.masks import MaskSpec, poisson_radius

from conftest import crandn

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba unavailable")


@needs_numba
@pytest.mark.parametrize("shape,win", [((4, 32, 32), (6, 6)), ((3, 13, 9), (2, 5)), ((1, 6, 6), (6, 6))])
def test_lift_fold_backends_bit_identical(rng, shape, win):
    v = crandn(rng, *shape)
    a = _kernels.lift_numpy(v, *win)
    b = _kernels.lift_numba(v, *win)
    assert a.tobytes() == b.tobytes()
    M = crandn(rng, *a.shape)
    f1 = _kernels.fold_numpy(M, *shape, *win)
    f2 = _kernels.fold_numba(M, *shape, *win)
    assert f1.tobytes() == f2.tobytes()


@needs_numba
@pytest.mark.parametrize("seed,scale,density", [(0, 1.3, "variable"), (5, 2.2, "variable"), (9, 1.7, "uniform")])
def test_poisson_backends_identical(seed, scale, density):
    spec = MaskSpec("poisson2d", 4, 40, 36, seed, density)
    radius = poisson_radius(spec, scale)
    order = np.random.default_rng(seed).permutation(40 * 36)
    r, c = order // 36, order % 36
    reach = int(np.ceil(radius.max()))
    np.testing.assert_array_equal(
        _kernels.poisson_throw_numpy(r, c, radius, reach), _kernels.poisson_throw_numba(r, c, radius, reach)
    )


def test_env_flag_selects_numpy():
    env = dict(os.environ, PKSMRI_DISABLE_NUMBA="1")
    code = "from pksmri import _kernels as k; print(k.BACKEND, k.lift is k.lift_numpy)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["numpy", "True"]


def test_default_backend_reported():
    assert _kernels.BACKEND == ("numba" if _kernels.HAVE_NUMBA else "numpy")
