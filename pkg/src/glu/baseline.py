"""Reference upsamplers: joint bilateral, nearest and bilinear."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .core import GridSpec, as_image


@dataclass(frozen=True)
class JbuParams:
    window: int = 5
    sigma_d: float = 0.5   # low-res pixel units
    sigma_r: float = 0.1

    def __post_init__(self):
        if self.window < 1 or self.window % 2 == 0:
            raise ValueError(f"window must be odd, got {self.window}")
        if self.sigma_d <= 0 or self.sigma_r <= 0:
            raise ValueError("sigmas must be positive")

    def describe(self) -> str:
        return f"{self.window}x{self.window}, sigma_d={self.sigma_d:g}, sigma_r={self.sigma_r:g}"


@numba.njit(parallel=True, cache=True)
def _jbu(img, low, target, scale, radius, sigma_d, sigma_r, out, fallback):
    height, width = img.shape[0], img.shape[1]
    lh, lw = low.shape[0], low.shape[1]
    inv_d = 1.0 / (2.0 * sigma_d * sigma_d)
    inv_r = 1.0 / (2.0 * sigma_r * sigma_r)
    for y in numba.prange(height):
        qy = y // scale
        cyf = (y + 0.5) / scale - 0.5
        for x in range(width):
            qx = x // scale
            cxf = (x + 0.5) / scale - 0.5
            p0 = np.float64(img[y, x, 0])
            p1 = np.float64(img[y, x, 1])
            p2 = np.float64(img[y, x, 2])
            wsum = 0.0
            acc0 = 0.0
            acc1 = 0.0
            acc2 = 0.0
            for cy in range(max(qy - radius, 0), min(qy + radius, lh - 1) + 1):
                for cx in range(max(qx - radius, 0), min(qx + radius, lw - 1) + 1):
                    ds = (cx - cxf) ** 2 + (cy - cyf) ** 2
                    dr = (p0 - low[cy, cx, 0]) ** 2 + (p1 - low[cy, cx, 1]) ** 2 \
                        + (p2 - low[cy, cx, 2]) ** 2
                    w = math.exp(-ds * inv_d) * math.exp(-dr * inv_r)
                    wsum += w
                    acc0 += w * target[cy, cx, 0]
                    acc1 += w * target[cy, cx, 1]
                    acc2 += w * target[cy, cx, 2]
            if wsum > 0.0:
                out[y, x, 0] = acc0 / wsum
                out[y, x, 1] = acc1 / wsum
                out[y, x, 2] = acc2 / wsum
            else:
                out[y, x, 0] = target[qy, qx, 0]
                out[y, x, 1] = target[qy, qx, 1]
                out[y, x, 2] = target[qy, qx, 2]
                fallback[y] += 1


def jbu_upsample(image, low, target_low, grid: GridSpec, params: JbuParams | None = None,
                 stats: dict | None = None) -> np.ndarray:
    """Joint bilateral upsampling of ``target_low`` guided by ``image``.

    Spatial distances are measured from the pixel's continuous low-res position
    ``(x + 0.5) / s - 0.5``.  Pixels whose weights all underflow take the value
    of their own low-res cell; their count is stored in ``stats["fallback"]``.
    """
    params = params or JbuParams()
    image = as_image(image, "guide")
    low = as_image(low, "low-res guide")
    target_low = as_image(target_low, "low-res target")
    grid.check_high(image, "guide")
    grid.check_low(low, "low-res guide")
    grid.check_low(target_low, "low-res target")
    out = np.empty(image.shape, dtype=np.float64)
    fallback = np.zeros(grid.high_h, dtype=np.int64)
    _jbu(image, low, target_low, grid.scale, params.window // 2, float(params.sigma_d),
         float(params.sigma_r), out, fallback)
    if stats is not None:
        stats["fallback"] = int(fallback.sum())
    return out.astype(np.float32)


def nearest_upsample(target_low, grid: GridSpec) -> np.ndarray:
    target_low = as_image(target_low, "low-res target")
    grid.check_low(target_low, "low-res target")
    ys = np.arange(grid.high_h) // grid.scale
    xs = np.arange(grid.high_w) // grid.scale
    return np.ascontiguousarray(target_low[ys[:, None], xs[None, :]])


def _tent_coords(n_high: int, n_low: int, scale: int):
    # low-res sample q sits on high-res pixel q*s + s//2
    u = (np.arange(n_high) - scale // 2) / scale
    u = np.clip(u, 0.0, n_low - 1)
    i0 = np.floor(u).astype(np.int64)
    i1 = np.minimum(i0 + 1, n_low - 1)
    return i0, i1, u - i0


def bilinear_upsample(target_low, grid: GridSpec) -> np.ndarray:
    """Tent-kernel interpolation between grid sample positions, clamped at borders."""
    target_low = as_image(target_low, "low-res target")
    grid.check_low(target_low, "low-res target")
    t = target_low.astype(np.float64)
    x0, x1, fx = _tent_coords(grid.high_w, grid.low_w, grid.scale)
    y0, y1, fy = _tent_coords(grid.high_h, grid.low_h, grid.scale)
    fx = fx[None, :, None]
    rows0 = t[y0][:, x0] * (1 - fx) + t[y0][:, x1] * fx
    rows1 = t[y1][:, x0] * (1 - fx) + t[y1][:, x1] * fx
    fy = fy[:, None, None]
    return (rows0 * (1 - fy) + rows1 * fy).astype(np.float32)
