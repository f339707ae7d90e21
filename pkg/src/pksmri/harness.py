"""Config-driven experiment grid: masks x variants on one phantom slice.

A config is a TOML file::

    seed = 0
    output_dir = "results"
    target = "T2"

    [phantom]            # or: [phantom.raw] T1 = "t1.raw" ...
    size = 64
    n_coils = 4

    [solver]
    max_iters = 30
    rel_tol = 1e-4

    [[masks]]
    family = "random2d"
    R = 3

    [[variants]]
    name = "pks2"
    kind = "pks"             # zero_filled | sake | pks
    auxiliaries = ["T1"]
    num_blocks = 2

Every cell writes its completed k-space as raw, a magnitude PNG and an
error-map PNG; metrics rows go to ``results.csv`` and failed cells to
``failures.csv``.
"""

from __future__ import annotations

import csv
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ValidationError
from .hankel import HankelConfig
from .kspace import apply_mask, zero_filled_recon
from .masks import MaskSpec, generate_mask
from .metrics import evaluate
from .phantom import CONTRASTS, PhantomSpec, gen_coil_maps, gen_phantom, simulate_acquisition
from .pks import ContrastSet, PartitionSpec, build_objects, pks_inverse_transform
from .rawio import export_mask_png, export_png, read_raw, write_mask_raw, write_raw
from .sake import SakeConfig, sake_reconstruct

__all__ = [
    "CSV_COLUMNS",
    "TIMING_COLUMNS",
    "VARIANT_KINDS",
    "VariantSpec",
    "ExperimentConfig",
    "ResultRow",
    "load_config",
    "config_from_dict",
    "load_contrasts",
    "run_variant",
    "run_experiment",
    "format_R",
]

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("variant", "mask", "R", "seed", "psnr_db", "ssim", "total_time_s", "single_time_s")
TIMING_COLUMNS = ("total_time_s", "single_time_s")
VARIANT_KINDS = ("zero_filled", "sake", "pks")
_KIND_ALIASES = {"zero_filled": "zero_filled", "zf": "zero_filled", "zerofilled": "zero_filled",
                 "sake": "sake", "pks": "pks", "sake_pks": "pks"}


@dataclass(frozen=True)
class VariantSpec:
    """One reconstruction method applied to every mask."""

    name: str
    kind: str = "sake"
    partition: Optional[PartitionSpec] = None
    auxiliaries: Tuple[str, ...] = ()

    def __post_init__(self):
        kind = _KIND_ALIASES.get(str(self.kind).lower())
        if kind is None:
            raise ValidationError(f"variant {self.name!r}: unknown kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if not self.name or any(ch in self.name for ch in "/\\ ,"):
            raise ValidationError(f"variant name {self.name!r} must be a non-empty token")
        if kind == "pks":
            if self.partition is None:
                object.__setattr__(self, "partition", PartitionSpec())
            if not self.auxiliaries:
                raise ValidationError(f"variant {self.name!r}: pks needs auxiliaries")
        object.__setattr__(self, "auxiliaries", tuple(self.auxiliaries))

    @property
    def num_objects(self) -> int:
        return self.partition.num_blocks if self.kind == "pks" else 1


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one run needs; see the module docstring for the file form."""

    variants: Tuple[VariantSpec, ...]
    masks: Tuple[MaskSpec, ...]
    phantom: Optional[PhantomSpec] = field(default_factory=PhantomSpec)
    raw_paths: Optional[Dict[str, str]] = None
    solver: SakeConfig = field(default_factory=SakeConfig)
    output_dir: Path = Path("results")
    seed: int = 0
    target: str = "T2"
    error_scale: float = 5.0
    workers: int = 1
    save_raw: bool = True

    def __post_init__(self):
        if not self.variants:
            raise ValidationError("config needs at least one variant")
        if not self.masks:
            raise ValidationError("config needs at least one mask")
        names = [v.name for v in self.variants]
        if len(set(names)) != len(names):
            raise ValidationError(f"duplicate variant names in {names}")
        if (self.phantom is None) == (self.raw_paths is None):
            raise ValidationError("give exactly one of a phantom spec or raw contrast files")
        available = set(CONTRASTS) if self.raw_paths is None else set(self.raw_paths)
        wanted = {self.target} | {a for v in self.variants for a in v.auxiliaries}
        if wanted - available:
            raise ValidationError(f"contrasts {sorted(wanted - available)} are not available")
        if self.target in {a for v in self.variants for a in v.auxiliaries}:
            raise ValidationError("the target contrast cannot also be an auxiliary")
        if self.workers < 1:
            raise ValidationError("workers must be >= 1")


@dataclass
class ResultRow:
    variant: str
    mask: str
    R: str
    seed: int
    psnr_db: float
    ssim: float
    total_time_s: float
    single_time_s: float

    def as_csv(self) -> List[str]:
        return [self.variant, self.mask, self.R, str(self.seed), repr(self.psnr_db), repr(self.ssim),
                f"{self.total_time_s:.6f}", f"{self.single_time_s:.6f}"]


def format_R(R: float) -> str:
    """``3.0 -> "3"``, ``2.5 -> "2.5"``; used in labels and file names."""
    return str(int(R)) if float(R).is_integer() else repr(float(R))


def _variant(d: dict) -> VariantSpec:
    d = dict(d)
    name = d.pop("name", None) or d.get("kind", "")
    kind = d.pop("kind", "sake")
    aux = tuple(d.pop("auxiliaries", ()))
    part = None
    if _KIND_ALIASES.get(str(kind).lower()) == "pks":
        if "boundaries" in d and d["boundaries"] is not None:
            d["boundaries"] = tuple(d["boundaries"])
        keys = {"axis", "num_blocks", "boundaries", "overlap_rows", "split_aux", "aux_order"}
        unknown = set(d) - keys
        if unknown:
            raise ValidationError(f"variant {name!r}: unknown keys {sorted(unknown)}")
        part = PartitionSpec(**d)
    elif d:
        raise ValidationError(f"variant {name!r}: unknown keys {sorted(d)}")
    return VariantSpec(name=name, kind=kind, partition=part, auxiliaries=aux)


def config_from_dict(d: dict, base_dir=".", seed: Optional[int] = None, out=None) -> ExperimentConfig:
    """Build a config from parsed TOML; ``seed`` and ``out`` override the file."""
    d = dict(d)
    base = Path(base_dir)
    seed = int(d.get("seed", 0)) if seed is None else int(seed)
    ph = dict(d.get("phantom", {}))
    raw = ph.pop("raw", None)
    if raw is not None:
        raw_paths = {k: str(base / v) for k, v in raw.items()}
        phantom = None
        size = read_raw(raw_paths[d.get("target", "T2")]).shape[1:]
    else:
        raw_paths = None
        ph.setdefault("seed", seed)
        phantom = PhantomSpec(**ph)
        size = (phantom.size, phantom.size)
    solver = dict(d.get("solver", {}))
    hk = {k: solver.pop(k) for k in ("win_rows", "win_cols", "rank_k") if k in solver}
    scfg = SakeConfig(hankel=HankelConfig(**hk), **solver)
    masks = []
    for m in d.get("masks", []):
        m = dict(m)
        m.setdefault("seed", seed)
        m.setdefault("rows", size[0])
        m.setdefault("cols", size[1])
        masks.append(MaskSpec(**m))
    variants = tuple(_variant(v) for v in d.get("variants", []))
    output_dir = Path(out) if out is not None else base / d.get("output_dir", "results")
    return ExperimentConfig(
        variants=variants,
        masks=tuple(masks),
        phantom=phantom,
        raw_paths=raw_paths,
        solver=scfg,
        output_dir=output_dir,
        seed=seed,
        target=d.get("target", "T2"),
        error_scale=float(d.get("error_scale", 5.0)),
        workers=int(d.get("workers", 1)),
        save_raw=bool(d.get("save_raw", True)),
    )


def load_config(path, seed: Optional[int] = None, out=None) -> ExperimentConfig:
    """Read a TOML config. Relative paths inside it resolve against its folder."""
    path = Path(path)
    with open(path, "rb") as fh:
        d = tomllib.load(fh)
    return config_from_dict(d, path.parent, seed=seed, out=out)


def load_contrasts(cfg: ExperimentConfig) -> Dict[str, np.ndarray]:
    """Fully-sampled multi-coil k-space per contrast label."""
    if cfg.raw_paths is not None:
        vols = {k: read_raw(p).data.astype(np.complex128) for k, p in cfg.raw_paths.items()}
        shapes = {v.shape for v in vols.values()}
        if len(shapes) != 1:
            raise ValidationError(f"raw contrasts disagree in shape: {sorted(shapes)}")
        return vols
    spec = cfg.phantom
    images = gen_phantom(spec)
    maps = gen_coil_maps(spec.size, spec.n_coils, spec.seed, spec.coil_width)
    return {k: simulate_acquisition(img, maps) for k, img in images.items()}


def run_variant(variant: VariantSpec, full: Dict[str, np.ndarray], target: str, mask, scfg: SakeConfig,
                workers: int = 1):
    """Reconstruct ``target`` under ``mask`` with one variant.

    Returns
    -------
    ksp : ndarray
        Completed target k-space.
    total : float
        Wall time in seconds.
    """
    acquired = apply_mask(full[target], mask)
    t0 = time.perf_counter()
    if variant.kind == "zero_filled":
        ksp = acquired
    elif variant.kind == "sake":
        ksp, _ = sake_reconstruct(acquired, mask, scfg)
    else:
        cs = ContrastSet(acquired, mask, [(a, full[a]) for a in variant.auxiliaries], target)
        objects = build_objects(cs, variant.partition)

        def solve(obj):
            return sake_reconstruct(obj.volume, obj.mask_union, scfg)[0]

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                recons = list(pool.map(solve, objects))
        else:
            recons = [solve(o) for o in objects]
        ksp = pks_inverse_transform(recons, variant.partition)
    return ksp, max(time.perf_counter() - t0, 1e-9)


def _stem(variant, mask_spec) -> str:
    return f"{variant.name}_{mask_spec.family}_{format_R(mask_spec.R)}"


def _run_cell(cfg, variant, mspec, mask, full, truth_img, out):
    ksp, total = run_variant(variant, full, cfg.target, mask, cfg.solver)
    # metrics use the stored precision so that rows are recomputable from files
    ksp32 = ksp.astype(np.complex64)
    img = zero_filled_recon(ksp32)
    mp = evaluate(img, truth_img)
    if not (np.isfinite(mp.psnr_db) and np.isfinite(mp.ssim)):
        raise ValidationError("non-finite metric")
    stem = _stem(variant, mspec)
    if cfg.save_raw:
        write_raw(out / f"{stem}.raw", ksp32, label=cfg.target, variant=variant.name,
                  mask=mspec.family, R=format_R(mspec.R), seed=mspec.seed)
    peak = np.max(truth_img)
    export_png(img, out / f"{stem}_mag.png")
    export_png(img / peak, out / f"{stem}_err.png", mode="error", reference=truth_img / peak,
               scale=cfg.error_scale)
    return ResultRow(variant.name, mspec.family, format_R(mspec.R), mspec.seed, mp.psnr_db, mp.ssim,
                     total, total / variant.num_objects)


def run_experiment(cfg: ExperimentConfig) -> List[ResultRow]:
    """Run every (mask, variant) cell and write CSV, PNG and raw artifacts.

    A failing cell is logged and listed in ``failures.csv``; the rest of the
    grid still runs. Rows come back in mask-major, variant-minor order.
    """
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    full = load_contrasts(cfg)
    truth32 = full[cfg.target].astype(np.complex64)
    truth_img = zero_filled_recon(truth32)
    if cfg.save_raw:
        write_raw(out / f"truth_{cfg.target}.raw", truth32, label=cfg.target, seed=cfg.seed)
    export_png(truth_img, out / f"truth_{cfg.target}_mag.png")

    cells = []
    for mspec in cfg.masks:
        try:
            mask = generate_mask(mspec)
        except Exception as exc:  # noqa: BLE001 - recorded per cell
            logger.error("mask %s failed: %s", mspec, exc)
            cells.extend((v, mspec, None, f"mask: {exc}") for v in cfg.variants)
            continue
        mstem = f"mask_{mspec.family}_{format_R(mspec.R)}"
        write_mask_raw(out / f"{mstem}.raw", mask)
        export_mask_png(mask, out / f"{mstem}.png")
        cells.extend((v, mspec, mask, None) for v in cfg.variants)

    def run(cell):
        variant, mspec, mask, err = cell
        if err is not None:
            return None, err
        try:
            return _run_cell(cfg, variant, mspec, mask, full, truth_img, out), None
        except Exception as exc:  # noqa: BLE001 - recorded per cell
            logger.error("cell %s failed: %s", _stem(variant, mspec), exc)
            return None, f"{variant.kind}: {type(exc).__name__}: {exc}"

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(run, cells))
    else:
        results = [run(c) for c in cells]

    rows = [r for r, _ in results if r is not None]
    with open(out / "results.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in rows:
            w.writerow(r.as_csv())
    failures = [(c, e) for c, (_, e) in zip(cells, results) if e is not None]
    fail_path = out / "failures.csv"
    if failures:
        with open(fail_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["variant", "mask", "R", "seed", "error"])
            for (v, m, _, _), e in failures:
                w.writerow([v.name, m.family, format_R(m.R), m.seed, e])
    elif fail_path.exists():
        os.remove(fail_path)
    return rows
