"""Time the numba and pure-numpy kernels side by side.

    python benchmarks/bench_kernels.py [--repeat 5] [--size 64] [--coils 4]

Each kernel is called once first so numba compilation is excluded. The
reported figure is the best of ``--repeat`` runs.
"""

import argparse
import sys
import timeit

import numpy as np

from pksmri import _kernels
from pksmri.masks import MaskSpec, poisson_radius


def best_of(fn, repeat):
    fn()
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--size", type=int, default=64)
    ap.add_argument("--coils", type=int, default=4)
    ap.add_argument("--window", type=int, default=6)
    a = ap.parse_args(argv)

    if not _kernels.HAVE_NUMBA:
        print("numba unavailable or disabled; only numpy timings are shown")
    rng = np.random.default_rng(0)
    n, nc, w = a.size, a.coils, a.window
    vol = rng.standard_normal((nc, n, n)) + 1j * rng.standard_normal((nc, n, n))
    mat = _kernels.lift_numpy(vol, w, w)
    spec = MaskSpec("poisson2d", 4, n, n, seed=0)
    radius = np.ascontiguousarray(poisson_radius(spec, 1.5))
    order = rng.permutation(n * n)
    cand_r, cand_c = order // n, order % n
    reach = int(np.ceil(radius.max()))

    cases = {
        "lift": (lambda: _kernels.lift_numpy(vol, w, w), lambda: _kernels.lift_numba(vol, w, w)),
        "fold": (lambda: _kernels.fold_numpy(mat, nc, n, n, w, w), lambda: _kernels.fold_numba(mat, nc, n, n, w, w)),
        "poisson": (lambda: _kernels.poisson_throw_numpy(cand_r, cand_c, radius, reach),
                    lambda: _kernels.poisson_throw_numba(cand_r, cand_c, radius, reach)),
    }
    print(f"{nc} coils, {n}x{n}, {w}x{w} window, best of {a.repeat}")
    print(f"{'kernel':<10}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for name, (np_fn, nb_fn) in cases.items():
        t_np = best_of(np_fn, a.repeat) * 1e3
        if _kernels.HAVE_NUMBA:
            t_nb = best_of(nb_fn, a.repeat) * 1e3
            print(f"{name:<10}{t_np:>12.3f}{t_nb:>12.3f}{t_np / t_nb:>9.1f}x")
        else:
            print(f"{name:<10}{t_np:>12.3f}{'-':>12}{'-':>10}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
