"""Image files and the GLUP parameter-field container.

GLUP layout (little-endian)::

    0   magic  b"GLUP"
    4   u32    version (1)
    8   u32    highW, highH, scale, lowW, lowH
    28  u8     mode (0 fast, 1 exact, 2 gnu)
    29  u8     optimized flag
    30  2 x u8 reserved, zero
    32  f32    low-res RGB, lowW*lowH*3
    ..  rec    highW*highH records of (u32 a, u32 b, f32 weight), row-major
"""
from __future__ import annotations

import os
import struct
from pathlib import Path

import cv2
import numpy as np

from .core import GridSpec, as_image
from .glu import MODES, ParamField

MAGIC = b"GLUP"
VERSION = 1
HEADER = struct.Struct("<4sIIIIII BB2s")
RECORD = np.dtype([("a", "<u4"), ("b", "<u4"), ("w", "<f4")])

assert HEADER.size == 32


class GlupFormatError(ValueError):
    """Malformed GLUP file; ``field`` names the check that failed."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


# --- raster images --------------------------------------------------------

def load_image(path) -> np.ndarray:
    """Read an 8/16-bit PNG or binary PPM/PGM as float32 RGB in ``[0, 1]``."""
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise OSError(f"{path}: no such file")
    raw = cv2.imread(path, cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise OSError(f"{path}: unreadable or unsupported image")
    if raw.dtype == np.uint8:
        peak = 255.0
    elif raw.dtype == np.uint16:
        peak = 65535.0
    else:
        raise OSError(f"{path}: unsupported sample type {raw.dtype}")
    if raw.ndim == 2:
        raw = np.repeat(raw[:, :, None], 3, axis=2)
    elif raw.shape[2] == 4:
        raw = raw[:, :, :3]
    elif raw.shape[2] == 1:
        raw = np.repeat(raw, 3, axis=2)
    rgb = raw[:, :, ::-1].astype(np.float32) / np.float32(peak)
    return np.ascontiguousarray(rgb)


def save_image(path, img, bits: int = 8) -> None:
    """Write float RGB in ``[0, 1]`` as PNG or PPM with 8 or 16 bits per sample."""
    path = os.fspath(path)
    img = as_image(img)
    if bits == 8:
        raw = np.rint(np.clip(img, 0, 1) * 255.0).astype(np.uint8)
    elif bits == 16:
        raw = np.rint(np.clip(img, 0, 1).astype(np.float64) * 65535.0).astype(np.uint16)
    else:
        raise ValueError(f"bits must be 8 or 16, got {bits}")
    ok = cv2.imwrite(path, np.ascontiguousarray(raw[:, :, ::-1]))
    if not ok:
        raise OSError(f"{path}: could not write image")


# --- GLUP -----------------------------------------------------------------

def glup_bytes(low, theta: ParamField) -> bytes:
    grid = theta.grid
    low = as_image(low, "low-res image")
    grid.check_low(low)
    header = HEADER.pack(MAGIC, VERSION, grid.high_w, grid.high_h, grid.scale,
                         grid.low_w, grid.low_h, MODES.index(theta.mode),
                         1 if theta.optimized else 0, b"\0\0")
    rec = np.empty(grid.high_w * grid.high_h, dtype=RECORD)
    rec["a"] = theta.a.reshape(-1)
    rec["b"] = theta.b.reshape(-1)
    rec["w"] = theta.weight.reshape(-1)
    return header + low.astype("<f4").tobytes() + rec.tobytes()


def write_glup(path, low, theta: ParamField) -> None:
    data = glup_bytes(low, theta)
    tmp = Path(str(path) + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def parse_glup(data: bytes) -> tuple[np.ndarray, ParamField]:
    if len(data) < HEADER.size:
        raise GlupFormatError("length", f"{len(data)} bytes is shorter than the 32-byte header")
    magic, version, hw, hh, scale, lw, lh, mode, flag, reserved = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise GlupFormatError("magic", f"expected {MAGIC!r}, got {magic!r}")
    if version != VERSION:
        raise GlupFormatError("version", f"unsupported version {version}")
    if scale < 2:
        raise GlupFormatError("scale", f"scale must be >= 2, got {scale}")
    if hw == 0 or hh == 0:
        raise GlupFormatError("dimensions", "empty image")
    grid = GridSpec(scale, hw, hh)
    if (lw, lh) != (grid.low_w, grid.low_h):
        raise GlupFormatError("dimensions", f"low-res {lw}x{lh} inconsistent with "
                              f"{hw}x{hh} at scale {scale}")
    if mode >= len(MODES):
        raise GlupFormatError("mode", f"unknown mode {mode}")
    if flag > 1:
        raise GlupFormatError("optimized", f"flag must be 0 or 1, got {flag}")
    if reserved != b"\0\0":
        raise GlupFormatError("reserved", "reserved bytes must be zero")
    expected = HEADER.size + 12 * lw * lh + 12 * hw * hh
    if len(data) != expected:
        raise GlupFormatError("length", f"expected {expected} bytes, got {len(data)}")

    nlow = lw * lh
    low = np.frombuffer(data, dtype="<f4", count=nlow * 3, offset=HEADER.size)
    low = low.astype(np.float32).reshape(lh, lw, 3)
    rec = np.frombuffer(data, dtype=RECORD, count=hw * hh, offset=HEADER.size + 12 * nlow)
    a = rec["a"].astype(np.uint32)
    b = rec["b"].astype(np.uint32)
    if a.size and (a.max() >= nlow or b.max() >= nlow):
        raise GlupFormatError("index", f"parameter index out of range (low-res has {nlow} cells)")
    w = rec["w"].astype(np.float32)
    if not np.isfinite(w).all():
        raise GlupFormatError("weight", "non-finite interpolation weight")
    theta = ParamField(grid, a.reshape(hh, hw), b.reshape(hh, hw), w.reshape(hh, hw),
                       MODES[mode], bool(flag))
    return low, theta


def read_glup(path) -> tuple[np.ndarray, ParamField]:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise OSError(f"{path}: {exc.strerror or exc}") from exc
    return parse_glup(data)
