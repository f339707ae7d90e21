"""Command line entry point: ``pksmri <subcommand> [options]``.

Exit status is 0 on success, 2 for usage or config problems, the file's
error code (3 to 5) for malformed raw files and 1 for any other failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import RawFormatError, ValidationError
from .harness import format_R, load_config, run_experiment
from .hankel import HankelConfig
from .kspace import apply_mask, zero_filled_recon
from .masks import FAMILIES, MaskSpec, generate_mask
from .metrics import evaluate
from .phantom import PhantomSpec, gen_coil_maps, gen_phantom, simulate_acquisition
from .pks import ContrastSet, PartitionSpec, sake_pks
from .rawio import export_mask_png, export_png, read_mask_raw, read_raw, write_mask_raw, write_raw
from .sake import SakeConfig, sake_reconstruct

logger = logging.getLogger("pksmri")

EXIT_OK, EXIT_STAGE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", type=Path, default=argparse.SUPPRESS, help="TOML experiment config")
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--out", type=Path, default=argparse.SUPPRESS, help="output file or directory")
    p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    p = _Parser(prog="pksmri", description="SAKE and partition-based k-space synthesis toolkit",
                parents=[common])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen-phantom", parents=[common], help="write fully-sampled T1/T2/PD k-space")
    g.add_argument("--size", type=int, default=64)
    g.add_argument("--coils", type=int, default=4)
    g.add_argument("--noise", type=float, default=0.0)

    m = sub.add_parser("gen-mask", parents=[common], help="write a sampling mask (raw + PNG)")
    m.add_argument("--family", choices=FAMILIES, default="random2d")
    m.add_argument("--R", type=float, default=4.0)
    m.add_argument("--size", type=int, default=64)
    m.add_argument("--rows", type=int)
    m.add_argument("--cols", type=int)
    m.add_argument("--density", choices=("variable", "uniform"), default="variable")

    r = sub.add_parser("recon", parents=[common], help="reconstruct one raw target")
    r.add_argument("target", type=Path, help="target k-space raw (fully sampled or masked)")
    r.add_argument("--mask", type=Path, required=True, help="mask raw file")
    r.add_argument("--method", choices=("zero_filled", "sake", "pks"), default="sake")
    r.add_argument("--aux", type=Path, action="append", default=[], help="auxiliary raw (repeatable)")
    r.add_argument("--axis", choices=("row", "column"), default="row")
    r.add_argument("--blocks", type=int, default=2)
    r.add_argument("--overlap", type=int, default=0)
    r.add_argument("--split-aux", action="store_true")
    r.add_argument("--iters", type=int, default=30)
    r.add_argument("--tol", type=float, default=1e-4)
    r.add_argument("--rank", type=int)
    r.add_argument("--truth", type=Path, help="fully-sampled reference for metrics")

    sub.add_parser("experiment", parents=[common], help="run a config grid")

    e = sub.add_parser("metrics", parents=[common], help="PSNR/SSIM of RSS images of two raw files")
    e.add_argument("truth", type=Path)
    e.add_argument("recon", type=Path)
    return p


def _cmd_gen_phantom(a) -> int:
    spec = PhantomSpec(size=a.size, n_coils=a.coils, seed=a.seed, noise_std=a.noise)
    out = a.out or Path("phantom")
    out.mkdir(parents=True, exist_ok=True)
    maps = gen_coil_maps(spec.size, spec.n_coils, spec.seed, spec.coil_width)
    for label, img in gen_phantom(spec).items():
        write_raw(out / f"{label}.raw", simulate_acquisition(img, maps), label=label, seed=spec.seed)
        export_png(np.abs(img), out / f"{label}.png")
    print(f"wrote T1/T2/PD to {out}")
    return EXIT_OK


def _cmd_gen_mask(a) -> int:
    spec = MaskSpec(a.family, a.R, a.rows or a.size, a.cols or a.size, a.seed, a.density)
    mask = generate_mask(spec)
    out = a.out or Path(f"mask_{spec.family}_{format_R(spec.R)}.raw")
    out.parent.mkdir(parents=True, exist_ok=True)
    write_mask_raw(out, mask)
    export_mask_png(mask, out.with_suffix(".png"))
    print(f"{out}: measured R {mask.measured_R:.4f} (nominal {format_R(spec.R)})")
    return EXIT_OK


def _cmd_recon(a) -> int:
    target = read_raw(a.target)
    mask = read_mask_raw(a.mask)
    acquired = apply_mask(target.data.astype(np.complex128), mask)
    scfg = SakeConfig(hankel=HankelConfig(rank_k=a.rank), max_iters=a.iters, rel_tol=a.tol)
    if a.method == "zero_filled":
        ksp = acquired
    elif a.method == "sake":
        ksp, rep = sake_reconstruct(acquired, mask, scfg)
        logger.info("sake: %d iterations", rep.iterations_run)
    else:
        if not a.aux:
            raise UsageError("pks needs at least one --aux file")
        aux = []
        for path in a.aux:
            f = read_raw(path)
            aux.append((f.label or path.stem, f.data.astype(np.complex128)))
        spec = PartitionSpec(a.axis, a.blocks, overlap_rows=a.overlap, split_aux=a.split_aux)
        ksp, _ = sake_pks(ContrastSet(acquired, mask, aux, target.label or "target"), spec, scfg)
    out = a.out or a.target.with_name(f"{a.target.stem}_{a.method}.raw")
    out.parent.mkdir(parents=True, exist_ok=True)
    ksp32 = ksp.astype(np.complex64)
    write_raw(out, ksp32, label=target.label, method=a.method)
    export_png(zero_filled_recon(ksp32), out.with_suffix(".png"))
    print(f"wrote {out}")
    if a.truth is not None:
        _print_metrics(read_raw(a.truth).data, ksp32)
    return EXIT_OK


def _print_metrics(truth, recon):
    mp = evaluate(zero_filled_recon(recon), zero_filled_recon(truth))
    print(f"psnr_db={mp.psnr_db!r}")
    print(f"ssim={mp.ssim!r}")


def _cmd_experiment(a) -> int:
    if a.config is None:
        raise UsageError("experiment needs --config")
    rows = run_experiment(a.cfg)
    for r in rows:
        print(f"{r.variant:>16} {r.mask:>12} R={r.R:<4} psnr={r.psnr_db:7.3f} ssim={r.ssim:.4f} "
              f"t={r.total_time_s:.2f}s")
    failed = (a.cfg.output_dir / "failures.csv").exists()
    print(f"results in {a.cfg.output_dir}" + (" (some cells failed, see failures.csv)" if failed else ""))
    return EXIT_STAGE if failed else EXIT_OK


def _cmd_metrics(a) -> int:
    t, r = read_raw(a.truth), read_raw(a.recon)
    if t.shape != r.shape:
        raise ValidationError(f"shape mismatch {t.shape} vs {r.shape}")
    _print_metrics(t.data, r.data)
    return EXIT_OK


_COMMANDS = {
    "gen-phantom": ("phantom", _cmd_gen_phantom),
    "gen-mask": ("mask", _cmd_gen_mask),
    "recon": ("recon", _cmd_recon),
    "experiment": ("experiment", _cmd_experiment),
    "metrics": ("metrics", _cmd_metrics),
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        a = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    for name, default in (("config", None), ("seed", None), ("out", None), ("verbose", False)):
        if not hasattr(a, name):
            setattr(a, name, default)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if a.seed is None:
        a.seed = 0
        if a.config is not None:
            a.seed = None
    if a.config is not None:
        try:
            a.cfg = load_config(a.config, seed=a.seed, out=a.out)
        except Exception as exc:  # noqa: BLE001 - any config problem is a usage error
            print(f"pksmri: config {a.config}: {exc}", file=sys.stderr)
            return EXIT_USAGE
        if a.seed is None:
            a.seed = a.cfg.seed
    stage, fn = _COMMANDS[a.command]
    try:
        return fn(a)
    except UsageError as exc:
        print(f"pksmri {a.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RawFormatError as exc:
        print(f"pksmri: {stage} stage failed: {exc}", file=sys.stderr)
        return exc.code
    except Exception as exc:  # noqa: BLE001 - reported with its stage
        print(f"pksmri: {stage} stage failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
