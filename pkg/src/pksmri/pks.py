"""Partition-based k-space synthesis (PKS).

The under-sampled target contrast and one or more fully-sampled auxiliary
contrasts of the same slice are cut into slabs along rows (or columns).
Object ``i`` keeps the target slab ``i`` and fills every other slab from an
auxiliary contrast; auxiliary locations count as acquired. Each object is
completed independently and the target is reassembled from the slab each
object owns.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import ValidationError
from .kspace import SamplingMask, apply_mask, as_volume
from .sake import SakeConfig, sake_reconstruct

__all__ = [
    "PartitionSpec",
    "ContrastSet",
    "HybridObject",
    "decompose",
    "pks_transform",
    "compose_multi_aux",
    "build_objects",
    "pks_inverse_transform",
    "sake_pks",
]

logger = logging.getLogger(__name__)

_AXES = {"row": "row", "rows": "row", "column": "column", "col": "column", "columns": "column"}
_ORDERS = ("inner_first", "outer_first")


@dataclass(frozen=True)
class PartitionSpec:
    """How contrasts are cut and recombined.

    Parameters
    ----------
    axis : {"row", "column"}
    num_blocks : int
        Number of slabs, 1 to 4. One slab degenerates to plain SAKE.
    boundaries : tuple of int, optional
        Split indices. Defaults to ``floor(i * n / num_blocks)``.
    overlap_rows : int
        Extra target rows each object takes past every interior boundary it
        touches. Rows claimed by two objects are averaged on reassembly.
    split_aux : bool
        Fill each object's auxiliary half with two auxiliary contrasts, one
        quarter each (requires ``num_blocks == 2`` and two auxiliaries).
    aux_order : {"inner_first", "outer_first"}
        For ``split_aux``: whether the first auxiliary sits next to the target
        slab or at the volume edge.
    """

    axis: str = "row"
    num_blocks: int = 2
    boundaries: Optional[Tuple[int, ...]] = None
    overlap_rows: int = 0
    split_aux: bool = False
    aux_order: str = "inner_first"

    def __post_init__(self):
        ax = _AXES.get(str(self.axis).lower())
        if ax is None:
            raise ValidationError(f"axis must be 'row' or 'column', got {self.axis!r}")
        object.__setattr__(self, "axis", ax)
        if not 1 <= self.num_blocks <= 4:
            raise ValidationError(f"num_blocks must be in 1..4, got {self.num_blocks}")
        if self.boundaries is not None:
            b = tuple(int(v) for v in self.boundaries)
            if len(b) + 1 != self.num_blocks:
                raise ValidationError(f"{len(b)} boundaries cannot make {self.num_blocks} blocks")
            object.__setattr__(self, "boundaries", b)
        if self.overlap_rows < 0:
            raise ValidationError("overlap_rows must be nonnegative")
        if self.aux_order not in _ORDERS:
            raise ValidationError(f"aux_order must be one of {_ORDERS}")
        if self.split_aux and self.num_blocks != 2:
            raise ValidationError("split_aux needs num_blocks == 2")

    def resolve(self, n: int) -> Tuple[int, ...]:
        """Concrete, validated boundaries for an axis of length ``n``."""
        if self.boundaries is None:
            b = tuple((i * n) // self.num_blocks for i in range(1, self.num_blocks))
        else:
            b = self.boundaries
        edges = (0,) + b + (n,)
        if any(lo >= hi for lo, hi in zip(edges, edges[1:])):
            raise ValidationError(f"boundaries {b} are not strictly increasing inside (0, {n})")
        m = self.overlap_rows
        p = self.num_blocks
        for j, (lo, hi) in enumerate(zip(edges, edges[1:])):
            ext = m * ((j > 0) + (j < p - 1))
            if ext >= hi - lo and p > 1 and m > 0:
                raise ValidationError(
                    f"overlap {m} leaves block {j} ({hi - lo} rows) with no auxiliary rows"
                )
        return b

    def blocks(self, n: int) -> List[Tuple[int, int]]:
        edges = (0,) + self.resolve(n) + (n,)
        return list(zip(edges, edges[1:]))

    def target_span(self, i: int, n: int) -> Tuple[int, int]:
        """Rows owned by object ``i``: its block widened by the overlap."""
        blocks = self.blocks(n)
        lo, hi = blocks[i]
        if i > 0:
            lo -= self.overlap_rows
        if i < len(blocks) - 1:
            hi += self.overlap_rows
        return lo, hi


@dataclass
class ContrastSet:
    """Under-sampled target plus fully-sampled auxiliaries of the same slice."""

    target: np.ndarray
    mask: SamplingMask
    auxiliaries: List[Tuple[str, np.ndarray]] = field(default_factory=list)
    target_label: str = "T2"

    def __post_init__(self):
        self.target = as_volume(self.target)
        if not isinstance(self.mask, SamplingMask):
            self.mask = SamplingMask(self.mask)
        if self.target.shape[-2:] != self.mask.shape:
            raise ValidationError(f"mask {self.mask.shape} does not match target {self.target.shape}")
        if np.any(self.target[:, ~self.mask.indicator] != 0):
            raise ValidationError("target has samples outside its mask; use ContrastSet.from_full")
        aux = []
        for label, vol in self.auxiliaries:
            v = as_volume(vol)
            if v.shape != self.target.shape:
                raise ValidationError(f"auxiliary {label!r} has shape {v.shape}, target {self.target.shape}")
            aux.append((str(label), v))
        self.auxiliaries = aux

    @classmethod
    def from_full(cls, target_full, mask, auxiliaries=(), target_label="T2"):
        """Build from fully-sampled target k-space by applying ``mask``."""
        if not isinstance(mask, SamplingMask):
            mask = SamplingMask(mask)
        return cls(apply_mask(as_volume(target_full), mask), mask, list(auxiliaries), target_label)

    @property
    def labels(self):
        return [lab for lab, _ in self.auxiliaries]

    def transposed(self) -> "ContrastSet":
        return ContrastSet(
            self.target.swapaxes(1, 2),
            self.mask.transpose(),
            [(lab, v.swapaxes(1, 2)) for lab, v in self.auxiliaries],
            self.target_label,
        )


@dataclass
class HybridObject:
    """One recombined k-space object.

    ``block_sources`` lists ``(start, stop, label)`` slabs along the partition
    axis; ``mask_union`` is the acquisition mask on target slabs and ones on
    auxiliary slabs.
    """

    volume: np.ndarray
    mask_union: np.ndarray
    block_sources: List[Tuple[int, int, str]]
    target_span: Tuple[int, int]
    axis: str = "row"

    def source_map(self) -> np.ndarray:
        """Label of the contrast feeding every position along the partition axis."""
        n = self.volume.shape[1] if self.axis == "row" else self.volume.shape[2]
        out = np.empty(n, dtype=object)
        for lo, hi, lab in self.block_sources:
            out[lo:hi] = lab
        return out


def decompose(vol, spec: PartitionSpec) -> List[np.ndarray]:
    """Cut a volume into contiguous slabs along ``spec.axis``."""
    v = np.asarray(vol)
    if v.ndim != 3:
        raise ValidationError(f"expected (coil, row, col) volume, got shape {v.shape}")
    axis = 1 if spec.axis == "row" else 2
    return [np.take(v, np.arange(lo, hi), axis=axis) for lo, hi in spec.blocks(v.shape[axis])]


def _row_objects(cs: ContrastSet, spec: PartitionSpec, tgt_label: str) -> List[HybridObject]:
    if not cs.auxiliaries:
        raise ValidationError("PKS needs at least one auxiliary contrast")
    n = cs.target.shape[1]
    blocks = spec.blocks(n)
    ind = cs.mask.indicator
    objects = []
    for i in range(spec.num_blocks):
        t0, t1 = spec.target_span(i, n)
        vol = np.empty_like(cs.target)
        mu = np.ones(ind.shape, dtype=bool)
        sources = []
        k = 0
        for j, (lo, hi) in enumerate(blocks):
            if j == i:
                vol[:, t0:t1] = cs.target[:, t0:t1]
                mu[t0:t1] = ind[t0:t1]
                sources.append((t0, t1, tgt_label))
                continue
            lo, hi = (lo, min(hi, t0)) if j < i else (max(lo, t1), hi)
            label, aux = cs.auxiliaries[k % len(cs.auxiliaries)]
            k += 1
            vol[:, lo:hi] = aux[:, lo:hi]
            sources.append((lo, hi, label))
        objects.append(HybridObject(vol, mu, sources, (t0, t1), "row"))
    return objects


def _row_multi_aux(cs: ContrastSet, spec: PartitionSpec, tgt_label: str) -> List[HybridObject]:
    if len(cs.auxiliaries) != 2:
        raise ValidationError(f"multi-auxiliary composition needs exactly 2 auxiliaries, got {len(cs.auxiliaries)}")
    if spec.num_blocks != 2:
        raise ValidationError("multi-auxiliary composition needs num_blocks == 2")
    n = cs.target.shape[1]
    ind = cs.mask.indicator
    first, second = cs.auxiliaries
    inner, outer = (first, second) if spec.aux_order == "inner_first" else (second, first)
    objects = []
    for i in range(2):
        t0, t1 = spec.target_span(i, n)
        vol = np.empty_like(cs.target)
        mu = np.ones(ind.shape, dtype=bool)
        vol[:, t0:t1] = cs.target[:, t0:t1]
        mu[t0:t1] = ind[t0:t1]
        if i == 0:
            mid = t1 + (n - t1) // 2
            parts = [(t0, t1, tgt_label), (t1, mid, inner), (mid, n, outer)]
        else:
            mid = t0 // 2
            parts = [(0, mid, outer), (mid, t0, inner), (t0, t1, tgt_label)]
        sources = []
        for lo, hi, src in parts:
            if isinstance(src, tuple):
                vol[:, lo:hi] = src[1][:, lo:hi]
                src = src[0]
            sources.append((lo, hi, src))
        objects.append(HybridObject(vol, mu, sources, (t0, t1), "row"))
    return objects


def _on_axis(builder, cs, spec):
    if spec.axis == "row":
        return builder(cs, spec, cs.target_label)
    objs = builder(cs.transposed(), spec, cs.target_label)
    for o in objs:
        o.volume = np.ascontiguousarray(o.volume.swapaxes(1, 2))
        o.mask_union = np.ascontiguousarray(o.mask_union.T)
        o.axis = "column"
    return objs


def pks_transform(cs: ContrastSet, spec: PartitionSpec) -> List[HybridObject]:
    """Build one hybrid object per slab, target slab ``i`` in object ``i``.

    Non-target slabs take auxiliaries in list order, cycling when there are
    more slabs than auxiliaries.
    """
    return _on_axis(_row_objects, cs, spec)


def compose_multi_aux(cs: ContrastSet, spec: PartitionSpec) -> List[HybridObject]:
    """Two-slab objects whose auxiliary half is shared by two auxiliary contrasts."""
    return _on_axis(_row_multi_aux, cs, spec)


def build_objects(cs: ContrastSet, spec: PartitionSpec) -> List[HybridObject]:
    return compose_multi_aux(cs, spec) if spec.split_aux else pks_transform(cs, spec)


def pks_inverse_transform(recons: Sequence[np.ndarray], spec: PartitionSpec) -> np.ndarray:
    """Reassemble the target from the slab each object owns.

    Rows owned by two neighbouring objects (``overlap_rows > 0``) take the
    mean of both reconstructions.
    """
    vols = [np.asarray(v) for v in recons]
    if len(vols) != spec.num_blocks:
        raise ValidationError(f"expected {spec.num_blocks} reconstructions, got {len(vols)}")
    shape = vols[0].shape
    if len(shape) != 3 or any(v.shape != shape for v in vols):
        raise ValidationError("reconstructions must share one (coil, row, col) shape")
    if spec.axis == "column":
        vols = [v.swapaxes(1, 2) for v in vols]
    n = vols[0].shape[1]
    out = np.zeros(vols[0].shape, dtype=np.result_type(*vols))
    owners = np.zeros(n, dtype=int)
    spans = [spec.target_span(i, n) for i in range(spec.num_blocks)]
    for lo, hi in spans:
        owners[lo:hi] += 1
    for v, (lo, hi) in zip(vols, spans):
        single = np.arange(lo, hi)[owners[lo:hi] == 1]
        out[:, single] = v[:, single]
    for i in range(len(spans) - 1):
        lo, hi = spans[i + 1][0], spans[i][1]
        if hi > lo:
            out[:, lo:hi] = 0.5 * (vols[i][:, lo:hi] + vols[i + 1][:, lo:hi])
    if spec.axis == "column":
        out = out.swapaxes(1, 2)
    return np.ascontiguousarray(out)


def sake_pks(
    cs: ContrastSet,
    spec: PartitionSpec,
    scfg: Optional[SakeConfig] = None,
    workers: int = 1,
):
    """Transform, complete every object with SAKE, and reassemble the target.

    Auxiliary slabs are pinned by data consistency through each object's
    ``mask_union``. ``workers > 1`` completes objects concurrently.

    Returns
    -------
    target : ndarray
        Completed target k-space.
    reports : list of SolveReport
        One per object, with ``wall_time_s`` set.
    """
    scfg = scfg or SakeConfig()
    objects = build_objects(cs, spec)

    def solve(obj):
        return sake_reconstruct(obj.volume, obj.mask_union, scfg)

    if workers > 1 and len(objects) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(solve, objects))
    else:
        results = [solve(o) for o in objects]
    recon = pks_inverse_transform([x for x, _ in results], spec)
    # acquired target samples stay exact even where two objects were averaged
    ind = cs.mask.indicator
    recon[:, ind] = cs.target[:, ind]
    return recon, [r for _, r in results]
