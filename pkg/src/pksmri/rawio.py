"""Raw k-space files and PNG export.

Raw layout: ASCII ``key=value`` header lines, one blank line, then the
payload as little-endian float32 ``(real, imag)`` pairs in coil-major,
row-major order. ``coils``, ``rows`` and ``cols`` are mandatory keys.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Dict

import numpy as np
from PIL import Image

from .errors import RawHeaderError, RawSizeMismatchError, RawTruncatedError, ValidationError
from .kspace import SamplingMask

__all__ = [
    "FORMAT_TAG",
    "RawKSpaceFile",
    "read_raw",
    "write_raw",
    "read_mask_raw",
    "write_mask_raw",
    "to_uint8",
    "export_png",
    "export_mask_png",
    "read_png",
]

FORMAT_TAG = "pksmri-raw-1"
_DIMS = ("coils", "rows", "cols")
_LE_C64 = np.dtype("<c8")


@dataclass
class RawKSpaceFile:
    """Header metadata plus a ``(coil, row, col)`` complex64 payload."""

    header: Dict[str, str]
    data: np.ndarray

    @property
    def shape(self):
        return self.data.shape

    @property
    def label(self) -> str:
        return self.header.get("label", "")


def _clean(key, value) -> str:
    s = str(value)
    if "\n" in s or "\r" in s:
        raise ValidationError(f"header value for {key!r} contains a newline")
    return s


def _header_bytes(shape, meta) -> bytes:
    lines = [f"format={FORMAT_TAG}"]
    lines += [f"{k}={n}" for k, n in zip(_DIMS, shape)]
    for k, v in meta.items():
        if k in _DIMS or k == "format":
            continue
        if not k or "=" in k or "\n" in k or k.strip() != k:
            raise ValidationError(f"bad header key {k!r}")
        lines.append(f"{k}={_clean(k, v)}")
    return ("\n".join(lines) + "\n\n").encode("ascii")


def write_raw(path, vol, **meta) -> None:
    """Write a volume (or a :class:`RawKSpaceFile`) to ``path``.

    Extra keyword arguments become header keys, in the given order. Values
    are stored as text; the payload is rounded to complex64.
    """
    if isinstance(vol, RawKSpaceFile):
        meta = {**vol.header, **meta}
        vol = vol.data
    arr = np.asarray(vol)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3 or arr.size == 0:
        raise ValidationError(f"expected (coil, row, col) data, got shape {arr.shape}")
    payload = np.ascontiguousarray(arr, dtype=_LE_C64).tobytes()
    with open(path, "wb") as fh:
        fh.write(_header_bytes(arr.shape, meta))
        fh.write(payload)


def _parse_header(raw: bytes, path) -> Dict[str, str]:
    try:
        text = raw.decode("ascii")
    except UnicodeDecodeError as exc:
        raise RawHeaderError(f"{path}: header is not ASCII") from exc
    header = {}
    for line in text.split("\n"):
        key, sep, value = line.partition("=")
        if not sep or not key:
            raise RawHeaderError(f"{path}: malformed header line {line!r}")
        header[key] = value
    if header.get("format") != FORMAT_TAG:
        raise RawHeaderError(f"{path}: not a {FORMAT_TAG} file")
    for k in _DIMS:
        v = header.get(k, "")
        if not v.isdigit() or int(v) < 1:
            raise RawHeaderError(f"{path}: header key {k!r} must be a positive integer, got {v!r}")
    return header


def read_raw(path) -> RawKSpaceFile:
    """Parse a raw file, checking the payload size against the header.

    Raises
    ------
    RawHeaderError
        Missing terminator, malformed lines or bad dimensions (code 3).
    RawTruncatedError
        Payload ends early or mid-sample (code 4).
    RawSizeMismatchError
        Payload holds whole planes but not the number the header states (code 5).
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    end = blob.find(b"\n\n")
    if end < 0:
        raise RawHeaderError(f"{path}: header has no blank-line terminator")
    header = _parse_header(blob[:end], path)
    payload = memoryview(blob)[end + 2 :]
    shape = tuple(int(header[k]) for k in _DIMS)
    plane = shape[1] * shape[2] * _LE_C64.itemsize
    expected = shape[0] * plane
    got = len(payload)
    if got != expected:
        if got > expected or (got % plane == 0):
            raise RawSizeMismatchError(
                f"{path}: header declares {shape[0]} coil(s) ({expected} bytes), payload has {got} bytes"
            )
        raise RawTruncatedError(f"{path}: payload truncated, {got} of {expected} bytes")
    data = np.frombuffer(payload, dtype=_LE_C64).reshape(shape).astype(np.complex64)
    return RawKSpaceFile(header, data)


def write_mask_raw(path, mask: SamplingMask) -> None:
    """Store a mask as a one-coil raw file with 0/1 real samples."""
    meta = {
        "kind": "mask",
        "family": mask.label,
        "R": repr(float(mask.nominal_R)),
        "seed": str(int(mask.seed)),
    }
    meta.update({k: v for k, v in mask.meta.items() if isinstance(v, (int, float, str))})
    write_raw(path, mask.indicator.astype(np.complex64)[None], **meta)


def read_mask_raw(path) -> SamplingMask:
    f = read_raw(path)
    if f.header.get("kind") != "mask" or f.data.shape[0] != 1:
        raise RawHeaderError(f"{path}: not a mask file")
    try:
        nominal = float(f.header.get("R", "1"))
        seed = int(f.header.get("seed", "0"))
    except ValueError as exc:
        raise RawHeaderError(f"{path}: bad mask metadata") from exc
    return SamplingMask(f.data[0].real, nominal_R=nominal, seed=seed, label=f.header.get("family", "custom"))


def to_uint8(values) -> np.ndarray:
    """Clip to [0, 1] and quantize to 8 bits (round half to even)."""
    return np.round(np.clip(values, 0.0, 1.0) * 255).astype(np.uint8)


def export_png(img, path, mode: str = "magnitude", reference=None, scale: float = 1.0) -> None:
    """Write an 8-bit grayscale PNG.

    Parameters
    ----------
    img : ndarray
        Real 2D image (complex input is reduced to magnitude).
    mode : {"magnitude", "error"}
        ``magnitude`` min-max normalises ``img``; a constant image becomes
        mid grey. ``error`` writes ``|img - reference| * scale`` clipped to
        [0, 1].
    """
    x = np.asarray(img)
    if np.iscomplexobj(x):
        x = np.abs(x)
    x = x.astype(np.float64)
    if x.ndim != 2 or not np.all(np.isfinite(x)):
        raise ValidationError("export_png needs a finite 2D image")
    if mode == "magnitude":
        lo, hi = x.min(), x.max()
        v = np.full(x.shape, 0.5) if hi == lo else (x - lo) / (hi - lo)
    elif mode == "error":
        if reference is None:
            raise ValidationError("error mode needs a reference image")
        ref = np.asarray(reference)
        if np.iscomplexobj(ref):
            ref = np.abs(ref)
        if ref.shape != x.shape:
            raise ValidationError(f"reference {ref.shape} does not match image {x.shape}")
        v = np.abs(x - ref) * scale
    else:
        raise ValidationError(f"unknown PNG mode {mode!r}")
    Image.fromarray(to_uint8(v)).save(os.fspath(path), format="PNG")


def export_mask_png(mask, path) -> None:
    """White where sampled."""
    ind = mask.indicator if isinstance(mask, SamplingMask) else np.asarray(mask, dtype=bool)
    Image.fromarray(ind.astype(np.uint8) * 255).save(os.fspath(path), format="PNG")


def read_png(path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("L"))
