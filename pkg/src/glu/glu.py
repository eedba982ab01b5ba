"""Two-pixel linear interpolation upsampling.

Every high-res pixel ``p`` is reconstructed as ``w * low[a] + (1 - w) * low[b]``
with ``a`` and ``b`` taken from the window around the cell owning ``p``.
The per-pixel search has three flavors:

* ``fast``: ``a`` is the closest color, ``b`` is searched linearly and the
  weight is the distance ratio (always in ``[0, 1)``).
* ``exact``: all unordered pairs (including ``a == b``) with the projection
  weight onto the color line.
* ``gnu``: nearest color only, weight fixed to 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numba
import numpy as np

from .core import GluConfig, GridSpec, as_image

MODES = ("fast", "exact", "gnu")
FAST, EXACT, GNU = 0, 1, 2

_CHUNK = 2048


class PixelParams(NamedTuple):
    a: int
    b: int
    weight: float
    residual: float


@dataclass
class ParamField:
    """Per-pixel ``(a, b, weight)`` over the high-res grid, stored row-major."""

    grid: GridSpec
    a: np.ndarray        # uint32 (H, W), low-res linear index
    b: np.ndarray        # uint32 (H, W)
    weight: np.ndarray   # float32 (H, W)
    mode: str = "fast"
    optimized: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        shape = self.grid.high_shape
        for name in ("a", "b", "weight"):
            if getattr(self, name).shape != shape:
                raise ValueError(f"{name}: expected shape {shape}, got {getattr(self, name).shape}")

    def copy(self) -> "ParamField":
        return ParamField(self.grid, self.a.copy(), self.b.copy(), self.weight.copy(),
                          self.mode, self.optimized)

    def params_at(self, x: int, y: int) -> PixelParams:
        return PixelParams(int(self.a[y, x]), int(self.b[y, x]), float(self.weight[y, x]), math.nan)


def _mode_code(mode: str) -> int:
    try:
        return MODES.index(mode)
    except ValueError:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}") from None


# --- scalar kernels -------------------------------------------------------

@numba.njit(cache=True)
def _weight_exact(p0, p1, p2, a0, a1, a2, b0, b1, b2, eps):
    u0 = a0 - b0
    u1 = a1 - b1
    u2 = a2 - b2
    num = (p0 - b0) * u0 + (p1 - b1) * u1 + (p2 - b2) * u2
    return num / (u0 * u0 + u1 * u1 + u2 * u2 + eps)


@numba.njit(cache=True)
def _weight_fast(p0, p1, p2, a0, a1, a2, b0, b1, b2, eps):
    da = math.sqrt((p0 - a0) ** 2 + (p1 - a1) ** 2 + (p2 - a2) ** 2)
    db = math.sqrt((p0 - b0) ** 2 + (p1 - b1) ** 2 + (p2 - b2) ** 2)
    return db / (da + db + eps)


@numba.njit(cache=True)
def _residual_sq(p0, p1, p2, a0, a1, a2, b0, b1, b2, w):
    r0 = w * a0 + (1.0 - w) * b0 - p0
    r1 = w * a1 + (1.0 - w) * b1 - p1
    r2 = w * a2 + (1.0 - w) * b2 - p2
    return r0 * r0 + r1 * r1 + r2 * r2


@numba.njit(cache=True)
def _solve(p0, p1, p2, cand, k, eps, mode):
    """Best ``(ia, ib, w, residual^2)`` over the first ``k`` rows of ``cand``.

    Columns 0-2 of ``cand`` hold colors, column 3 is scratch.

    Rows are in ascending low-res index order, so strict comparisons give
    lowest-index tie-breaking.
    """
    if mode == EXACT:
        bi = 0
        bj = 0
        bw = 0.0
        best = np.inf
        for i in range(k):
            a0, a1, a2 = cand[i, 0], cand[i, 1], cand[i, 2]
            for j in range(i, k):
                b0, b1, b2 = cand[j, 0], cand[j, 1], cand[j, 2]
                w = _weight_exact(p0, p1, p2, a0, a1, a2, b0, b1, b2, eps)
                r = _residual_sq(p0, p1, p2, a0, a1, a2, b0, b1, b2, w)
                if r < best:
                    best = r
                    bi = i
                    bj = j
                    bw = w
        return bi, bj, bw, best

    ia = 0
    best = np.inf
    for i in range(k):
        d = (p0 - cand[i, 0]) ** 2 + (p1 - cand[i, 1]) ** 2 + (p2 - cand[i, 2]) ** 2
        cand[i, 3] = d
        if d < best:
            best = d
            ia = i
    if mode == GNU:
        return ia, ia, 1.0, best

    a0, a1, a2 = cand[ia, 0], cand[ia, 1], cand[ia, 2]
    da = math.sqrt(best)
    bj = ia
    bw = 1.0
    best = np.inf
    for j in range(k):
        b0, b1, b2 = cand[j, 0], cand[j, 1], cand[j, 2]
        db = math.sqrt(cand[j, 3])
        w = db / (da + db + eps)
        r = _residual_sq(p0, p1, p2, a0, a1, a2, b0, b1, b2, w)
        if r < best:
            best = r
            bj = j
            bw = w
    return ia, bj, bw, best


@numba.njit(cache=True)
def _gather(low, qx, qy, radius, cand, cidx):
    lh, lw = low.shape[0], low.shape[1]
    k = 0
    for cy in range(max(qy - radius, 0), min(qy + radius, lh - 1) + 1):
        for cx in range(max(qx - radius, 0), min(qx + radius, lw - 1) + 1):
            cand[k, 0] = low[cy, cx, 0]
            cand[k, 1] = low[cy, cx, 1]
            cand[k, 2] = low[cy, cx, 2]
            cidx[k] = cy * lw + cx
            k += 1
    return k


@numba.njit(cache=True)
def _fit_pixel(img, low, scale, radius, eps, mode, p, cand, cidx, cache, A, B, W, E):
    """Optimize flat high-res pixel ``p`` and write its parameters and error.

    ``cache`` holds ``[cell, k]`` of the candidates currently in ``cand``.
    """
    width = img.shape[1]
    y = p // width
    x = p - y * width
    qx = x // scale
    qy = y // scale
    q = qy * low.shape[1] + qx
    if cache[0] != q:
        cache[0] = q
        cache[1] = _gather(low, qx, qy, radius, cand, cidx)
    k = cache[1]
    p0 = np.float64(img[y, x, 0])
    p1 = np.float64(img[y, x, 1])
    p2 = np.float64(img[y, x, 2])
    ia, ib, w, _ = _solve(p0, p1, p2, cand, k, eps, mode)
    w32 = np.float32(w)
    A[p] = cidx[ia]
    B[p] = cidx[ib]
    W[p] = w32
    # error uses the stored float32 weight so it matches what apply_field produces
    E[p] = math.sqrt(_residual_sq(p0, p1, p2,
                                  cand[ia, 0], cand[ia, 1], cand[ia, 2],
                                  cand[ib, 0], cand[ib, 1], cand[ib, 2], np.float64(w32)))


@numba.njit(parallel=True, cache=True)
def _fit_list(img, low, scale, window, eps, mode, pixels, A, B, W, E):
    radius = window // 2
    n = pixels.size
    nchunks = (n + _CHUNK - 1) // _CHUNK
    for c in numba.prange(nchunks):
        cand = np.empty((window * window, 4))
        cidx = np.empty(window * window, dtype=np.int64)
        cache = np.full(2, -1, dtype=np.int64)
        for i in range(c * _CHUNK, min((c + 1) * _CHUNK, n)):
            _fit_pixel(img, low, scale, radius, eps, mode, pixels[i], cand, cidx, cache, A, B, W, E)


@numba.njit(parallel=True, cache=True)
def _fit_all(img, low, scale, window, eps, mode, A, B, W, E):
    radius = window // 2
    n = img.shape[0] * img.shape[1]
    nchunks = (n + _CHUNK - 1) // _CHUNK
    for c in numba.prange(nchunks):
        cand = np.empty((window * window, 4))
        cidx = np.empty(window * window, dtype=np.int64)
        cache = np.full(2, -1, dtype=np.int64)
        for p in range(c * _CHUNK, min((c + 1) * _CHUNK, n)):
            _fit_pixel(img, low, scale, radius, eps, mode, p, cand, cidx, cache, A, B, W, E)


# --- python API -----------------------------------------------------------

def _rgb(v) -> tuple[float, float, float]:
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    if v.size == 1:
        return (float(v[0]),) * 3
    if v.size != 3:
        raise ValueError(f"expected an RGB triple, got {v.size} values")
    return float(v[0]), float(v[1]), float(v[2])


def weight_exact(ip, ia, ib, eps: float = 1e-3) -> float:
    """Projection weight of ``ip`` onto the line through ``ia`` and ``ib``."""
    return float(_weight_exact(*_rgb(ip), *_rgb(ia), *_rgb(ib), eps))


def weight_fast(ip, ia, ib, eps: float = 1e-3) -> float:
    """Distance-ratio weight, exact when ``ip`` lies on the segment; in ``[0, 1)``."""
    return float(_weight_fast(*_rgb(ip), *_rgb(ia), *_rgb(ib), eps))


def interpolation_residual(ip, ia, ib, w: float) -> float:
    return math.sqrt(_residual_sq(*_rgb(ip), *_rgb(ia), *_rgb(ib), float(w)))


def _optimize_pixel(ip, candidates: Sequence[tuple[int, object]], eps: float, mode: int) -> PixelParams:
    if len(candidates) == 0:
        raise ValueError("candidate list is empty")
    cands = sorted(((int(i), _rgb(c)) for i, c in candidates), key=lambda t: t[0])
    colors = np.zeros((len(cands), 4))
    colors[:, :3] = [c for _, c in cands]
    ia, ib, w, r = _solve(*_rgb(ip), colors, len(cands), float(eps), mode)
    return PixelParams(cands[ia][0], cands[ib][0], float(w), math.sqrt(r))


def optimize_pixel_fast(ip, candidates, eps: float = 1e-3) -> PixelParams:
    """Closest color as ``a``, then linear search of ``b`` with the fast weight.

    ``candidates`` is a sequence of ``(low_res_index, rgb)`` pairs.
    """
    return _optimize_pixel(ip, candidates, eps, FAST)


def optimize_pixel_exact(ip, candidates, eps: float = 1e-3) -> PixelParams:
    """Exhaustive search over unordered pairs with the projection weight."""
    return _optimize_pixel(ip, candidates, eps, EXACT)


def optimize_pixel_gnu(ip, candidates, eps: float = 1e-3) -> PixelParams:
    return _optimize_pixel(ip, candidates, eps, GNU)


def fit_field(image, low, grid: GridSpec, cfg: GluConfig | None = None,
              mode: str = "fast") -> tuple[ParamField, np.ndarray]:
    """Optimize every pixel; returns the field and the self-upsampling error map."""
    cfg = cfg or GluConfig()
    image = as_image(image, "source")
    low = as_image(low, "low-res source")
    grid.check_high(image, "source")
    grid.check_low(low, "low-res source")
    code = _mode_code(mode)
    n = grid.high_w * grid.high_h
    A = np.empty(n, dtype=np.uint32)
    B = np.empty(n, dtype=np.uint32)
    W = np.empty(n, dtype=np.float32)
    E = np.empty(n, dtype=np.float64)
    _fit_all(image, low, grid.scale, cfg.window, float(cfg.eps), code, A, B, W, E)
    shape = grid.high_shape
    theta = ParamField(grid, A.reshape(shape), B.reshape(shape), W.reshape(shape), mode)
    return theta, E.reshape(shape)


def optimize_field(image, low, grid: GridSpec, cfg: GluConfig | None = None,
                   mode: str = "fast") -> ParamField:
    return fit_field(image, low, grid, cfg, mode)[0]


def refit_pixels(image, low, theta: ParamField, errors: np.ndarray, pixels: np.ndarray,
                 cfg: GluConfig) -> None:
    """Re-optimize the flat pixel indices ``pixels`` in place."""
    _fit_list(image, low, theta.grid.scale, cfg.window, float(cfg.eps),
                       _mode_code(theta.mode), np.asarray(pixels, dtype=np.int64),
                       theta.a.reshape(-1), theta.b.reshape(-1), theta.weight.reshape(-1),
                       errors.reshape(-1))


def interpolate(theta: ParamField, target_low) -> np.ndarray:
    """Apply the field to a low-res target without clamping (float64)."""
    target_low = as_image(target_low, "low-res target")
    theta.grid.check_low(target_low, "low-res target")
    flat = target_low.reshape(-1, 3).astype(np.float64)
    w = theta.weight.astype(np.float64)[..., None]
    return w * flat[theta.a] + (1.0 - w) * flat[theta.b]


def apply_field(theta: ParamField, target_low, clamp: bool = True) -> np.ndarray:
    """Upsample ``target_low`` with the interpolation field.

    Output is float32 clamped to ``[0, 1]``; exact-mode weights may extrapolate.
    """
    out = interpolate(theta, target_low)
    if clamp:
        np.clip(out, 0.0, 1.0, out=out)
    return out.astype(np.float32)


def error_map(image, approx) -> np.ndarray:
    """Per-pixel Euclidean RGB distance."""
    image = np.asarray(image, dtype=np.float64)
    approx = np.asarray(approx, dtype=np.float64)
    if image.shape != approx.shape:
        raise ValueError(f"shape mismatch: {image.shape} vs {approx.shape}")
    return np.sqrt(((image - approx) ** 2).sum(axis=-1))
