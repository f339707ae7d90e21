"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or directly with
``python tests/test_acceptance.py``.
"""

import csv
import io
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from pksmri.harness import TIMING_COLUMNS, VariantSpec, load_config, run_experiment, run_variant
from pksmri.hankel import HankelConfig, hankel_adjoint_avg, hankel_forward, lowrank_project
from pksmri.kspace import apply_mask, fft2c, ifft2c, zero_filled_recon
from pksmri.masks import FAMILIES, MaskSpec, generate_mask, measured_R, poisson_radius
from pksmri.metrics import psnr, ssim
from pksmri.phantom import PhantomSpec, gen_coil_maps, gen_phantom, simulate_acquisition
from pksmri.pks import ContrastSet, PartitionSpec, pks_inverse_transform, pks_transform
from pksmri.sake import SakeConfig, sake_reconstruct

CONFIG_DIR = Path(__file__).resolve().parents[1] / "src" / "pksmri" / "configs"
SEED = 0
REPORT_LINES = []


def report(n, ok, detail):
    line = f"ACCEPTANCE {n:>2} {'PASS' if ok else 'FAIL'}  {detail}"
    REPORT_LINES.append(line)
    if __name__ == "__main__":
        print(line, flush=True)
    return ok


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


_SLICE = {}


def desk_slice():
    """Seeded 64x64 4-coil phantom: fully-sampled k-space per contrast and truth."""
    if not _SLICE:
        spec = PhantomSpec(size=64, n_coils=4, seed=SEED)
        maps = gen_coil_maps(spec.size, spec.n_coils, spec.seed, spec.coil_width)
        full = {k: simulate_acquisition(v, maps) for k, v in gen_phantom(spec).items()}
        _SLICE["full"], _SLICE["truth"] = full, zero_filled_recon(full["T2"])
    return _SLICE["full"], _SLICE["truth"]


def variant_psnr(variant, mask):
    full, truth = desk_slice()
    ksp, _ = run_variant(variant, full, "T2", mask, SakeConfig())
    return psnr(zero_filled_recon(ksp), truth)


PKS_T1 = VariantSpec("pks2", "pks", PartitionSpec("row", 2), ("T1",))


# --------------------------------------------------------------------------

def check_1():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    cfg = HankelConfig(6, 6)
    v = crandn(rng, 12, 32, 32)
    hank = np.linalg.norm(hankel_adjoint_avg(hankel_forward(v, cfg), v.shape, cfg) - v) / np.linalg.norm(v)
    fft_err = 0.0
    for shape in [(64, 64), (31, 47), (128, 96)]:
        x = crandn(rng, *shape)
        fft_err = max(fft_err, abs(np.linalg.norm(fft2c(x)) - np.linalg.norm(x)) / np.linalg.norm(x),
                      np.linalg.norm(ifft2c(fft2c(x)) - x) / np.linalg.norm(x))
    lr_err = 0.0
    for m, n, k in [(64, 64, 10), (64, 40, 5), (33, 64, 20), (50, 50, 1)]:
        M = crandn(rng, m, n)
        s = np.linalg.svd(M, compute_uv=False)
        tail = np.sqrt(np.sum(s[k:] ** 2))
        lr_err = max(lr_err, abs(np.linalg.norm(M - lowrank_project(M, k)) - tail))
    dt = time.perf_counter() - t0
    ok = hank <= 1e-12 and fft_err <= 1e-10 and lr_err <= 1e-9 and dt < 10
    return report(1, ok, f"hankel roundtrip {hank:.1e}, fft {fft_err:.1e}, lowrank tail {lr_err:.1e}, {dt:.2f}s")


def check_2():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    n, nc, k = 32, 4, 6
    freqs = rng.uniform(-np.pi, np.pi, (k, 2))
    r = np.arange(n)
    modes = np.exp(1j * (freqs[:, 0, None, None] * r[:, None] + freqs[:, 1, None, None] * r[None, :]))
    x = np.einsum("ck,kij->cij", crandn(rng, nc, k), modes)
    rank = np.linalg.matrix_rank(hankel_forward(x, HankelConfig()))
    mask = rng.random((n, n)) >= 0.4
    # fixed 30-iteration budget: the default rel_tol would stop on slow progress first
    y, rep = sake_reconstruct(apply_mask(x, mask), mask, SakeConfig(HankelConfig(rank_k=k), max_iters=30, rel_tol=0))
    err = np.linalg.norm(y - x) / np.linalg.norm(x)
    dt = time.perf_counter() - t0
    ok = rank == k and err <= 1e-6 and rep.iterations_run <= 30 and dt < 60
    return report(2, ok, f"rank {rank}, {1 - mask.mean():.0%} removed, rel err {err:.1e} "
                         f"after {rep.iterations_run} it, {dt:.1f}s")


def check_3():
    t0 = time.perf_counter()
    mask = generate_mask(MaskSpec("random2d", 3, 64, 64, SEED))
    zf = variant_psnr(VariantSpec("zf", "zero_filled"), mask)
    sk = variant_psnr(VariantSpec("sake", "sake"), mask)
    pk = variant_psnr(PKS_T1, mask)
    dt = time.perf_counter() - t0
    ok = zf + 2 <= sk and pk >= sk + 0.2 and dt < 300
    return report(3, ok, f"random R=3: ZF {zf:.2f} / SAKE {sk:.2f} / PKS-2 row {pk:.2f} dB, {dt:.0f}s")


def check_4():
    t0 = time.perf_counter()
    mask = generate_mask(MaskSpec("cartesian1d", 2, 64, 64, SEED))
    alone = variant_psnr(VariantSpec("sake", "sake"), mask)
    t1 = variant_psnr(PKS_T1, mask)
    both = variant_psnr(VariantSpec("t1pd", "pks", PartitionSpec("row", 2, split_aux=True), ("T1", "PD")), mask)
    dt = time.perf_counter() - t0
    ok = alone <= t1 <= both and both - alone >= 0.3 and dt < 300
    return report(4, ok, f"cartesian R=2: T2 {alone:.2f} <= 1/2T1 {t1:.2f} <= 1/4T1+1/4PD {both:.2f} dB "
                         f"(steps {t1 - alone:+.2f}, {both - t1:+.2f}), {dt:.0f}s")


def check_5():
    mask = generate_mask(MaskSpec("poisson2d", 4, 64, 64, SEED))
    p5 = variant_psnr(VariantSpec("o5", "pks", PartitionSpec("row", 2, overlap_rows=5), ("T1",)), mask)
    p20 = variant_psnr(VariantSpec("o20", "pks", PartitionSpec("row", 2, overlap_rows=20), ("T1",)), mask)
    return report(5, p5 >= p20, f"poisson R=4: +5 rows {p5:.2f} dB, +20 rows {p20:.2f} dB")


def check_6():
    rng = np.random.default_rng(6)
    n = 48
    roundtrip = leak = transpose = True
    sentinel = 98765.0 - 4321j
    for axis in ("row", "column"):
        for p in (2, 3, 4):
            ind = rng.random((n, n + 6)) < 0.35
            tgt = crandn(rng, 3, n, n + 6)
            spec = PartitionSpec(axis, p)
            cs = ContrastSet.from_full(tgt, ind, [("T1", crandn(rng, 3, n, n + 6))])
            back = pks_inverse_transform([o.volume for o in pks_transform(cs, spec)], spec)
            roundtrip &= back.tobytes() == cs.target.tobytes()
            cs_s = ContrastSet.from_full(tgt, ind, [("T1", np.full(tgt.shape, sentinel))])
            out = pks_inverse_transform([o.volume for o in pks_transform(cs_s, spec)], spec)
            leak &= not np.any(out == sentinel)
            if axis == "column":
                col = pks_transform(cs, spec)
                row = pks_transform(cs.transposed(), PartitionSpec("row", p))
                transpose &= all(np.array_equal(c.volume, r.volume.swapaxes(1, 2))
                                 and np.array_equal(c.mask_union, r.mask_union.T) for c, r in zip(col, row))
    ok = roundtrip and leak and transpose
    return report(6, ok, f"roundtrip bit-exact {roundtrip}, no sentinel leak {leak}, column == transposed row {transpose}")


def check_7(repeats=5):
    full, _ = desk_slice()
    mask = generate_mask(MaskSpec("random2d", 3, 64, 64, SEED))
    cfg = SakeConfig(max_iters=30, rel_tol=0.0)
    variants = [VariantSpec("sake", "sake")] + [
        VariantSpec(f"pks{p}", "pks", PartitionSpec("row", p), ("T1",)) for p in (2, 3, 4)
    ]
    run_variant(VariantSpec("warm", "sake"), full, "T2", mask, SakeConfig(max_iters=2))
    # interleave repeats so slow drift of the machine hits every variant alike
    best = {v.name: np.inf for v in variants}
    for _ in range(repeats):
        for v in variants:
            t = run_variant(v, full, "T2", mask, cfg)[1] / v.num_objects
            best[v.name] = min(best[v.name], t)
    base = best["sake"]
    ratios = {p: best[f"pks{p}"] / base for p in (2, 3, 4)}
    ok = all(abs(r - 1) <= 0.15 for r in ratios.values())
    detail = ", ".join(f"p={p} {r:.3f}" for p, r in ratios.items())
    return report(7, ok, f"single-time / SAKE time ({base:.2f}s): {detail}")


def check_8():
    card = all(
        generate_mask(MaskSpec("cartesian1d", R, rows, 16, s)).indicator.all(axis=1).sum() == int(rows / R + 0.5)
        for rows in (8, 33, 64, 97) for R in (1, 2, 3, 4, 5.5) for s in range(3)
    )
    viol = 0
    for size, R, s in [(32, 4, 0), (64, 4, 1), (64, 6, 2), (96, 4, 3), (96, 6, 4)]:
        spec = MaskSpec("poisson2d", R, size, size, s)
        m = generate_mask(spec)
        rad = poisson_radius(spec, m.meta["radius_scale"])[m.indicator]
        pts = np.argwhere(m.indicator)
        d = np.hypot(*(pts[:, None, :] - pts[None, :, :]).transpose(2, 0, 1))
        np.fill_diagonal(d, np.inf)
        viol += int(np.sum(d < 0.5 * (rad[:, None] + rad[None, :]) - 1e-12))
    worst = max(abs(measured_R(generate_mask(MaskSpec(f, R, 64, 64, SEED))) / R - 1)
                for f in FAMILIES for R in (2, 3, 4, 6))
    det = all(generate_mask(MaskSpec(f, 4, 48, 40, 77)).indicator.tobytes()
              == generate_mask(MaskSpec(f, 4, 48, 40, 77)).indicator.tobytes() for f in FAMILIES)
    ok = card and viol == 0 and worst <= 0.10 and det
    return report(8, ok, f"cartesian cardinality {card}, poisson violations {viol}, "
                         f"worst |R/R0-1| {worst:.3f}, deterministic {det}")


def _ssim_loops(x, y):
    peak = np.max(np.abs(y))
    x, y = x / peak, y / peak
    ax = np.arange(11) - 5.0
    w = np.exp(-(ax[:, None] ** 2 + ax[None, :] ** 2) / 4.5)
    w /= w.sum()
    c1, c2 = 0.01 ** 2, 0.03 ** 2
    vals = []
    for i in range(x.shape[0] - 10):
        for j in range(x.shape[1] - 10):
            px, py = x[i:i + 11, j:j + 11], y[i:i + 11, j:j + 11]
            mx, my = np.sum(w * px), np.sum(w * py)
            vx, vy = np.sum(w * (px - mx) ** 2), np.sum(w * (py - my) ** 2)
            cxy = np.sum(w * (px - mx) * (py - my))
            vals.append((2 * mx * my + c1) * (2 * cxy + c2) / ((mx ** 2 + my ** 2 + c1) * (vx + vy + c2)))
    return float(np.mean(vals))


def check_9():
    psnr_err = ssim_err = 0.0
    ident = True
    for s in range(5):
        rng = np.random.default_rng(900 + s)
        t = rng.random((24, 28)) * (s + 1)
        x = t + 0.15 * (s + 1) * rng.standard_normal(t.shape)
        peak = np.max(np.abs(t))
        closed = 10 * np.log10(1 / np.mean(((x - t) / peak) ** 2))
        psnr_err = max(psnr_err, abs(psnr(x, t) - closed))
        ssim_err = max(ssim_err, abs(ssim(x, t) - _ssim_loops(x, t)))
        ident &= ssim(t, t) == 1.0
    ok = psnr_err <= 1e-9 and ssim_err <= 1e-6 and ident
    return report(9, ok, f"psnr dev {psnr_err:.1e} dB, ssim dev {ssim_err:.1e}, ssim(x,x)=1 {ident}")


def _strip_timing(path):
    rows = list(csv.DictReader(open(path)))
    keep = [c for c in rows[0] if c not in TIMING_COLUMNS] if rows else []
    buf = io.StringIO()
    csv.writer(buf).writerows([[r[c] for c in keep] for r in rows])
    return buf.getvalue()


def check_10():
    with tempfile.TemporaryDirectory() as tmp:
        outs = [Path(tmp) / "a", Path(tmp) / "b"]
        for o in outs:
            run_experiment(load_config(CONFIG_DIR / "default.toml", out=o))
        csv_same = _strip_timing(outs[0] / "results.csv") == _strip_timing(outs[1] / "results.csv")
        pngs = sorted(p.name for p in outs[0].glob("*.png"))
        png_same = pngs == sorted(p.name for p in outs[1].glob("*.png")) and all(
            (outs[0] / n).read_bytes() == (outs[1] / n).read_bytes() for n in pngs)
        n_rows = len(list(csv.DictReader(open(outs[0] / "results.csv"))))
    ok = csv_same and png_same and len(pngs) >= 6 and n_rows == 3
    return report(10, ok, f"CSV identical {csv_same} ({n_rows} rows), {len(pngs)} PNGs identical {png_same}")


CHECKS = [check_1, check_2, check_3, check_4, check_5, check_6, check_7, check_8, check_9, check_10]


@pytest.mark.parametrize("check", CHECKS, ids=[f"criterion_{i}" for i in range(1, 11)])
def test_acceptance(check):
    assert check()


if __name__ == "__main__":
    results = [c() for c in CHECKS]
    print(f"{sum(results)}/{len(results)} criteria pass")
    sys.exit(0 if all(results) else 1)
