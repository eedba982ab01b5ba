"""Image containers, grid mapping and neighborhood enumeration.

Images are ``float32`` arrays of shape ``(height, width, 3)`` with samples in
``[0, 1]``.  Low-resolution cells are addressed either by ``(x, y)`` or by the
row-major linear index ``y * low_w + x``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def as_image(arr, name: str = "image") -> np.ndarray:
    """Validate and convert ``arr`` to a contiguous float32 RGB raster."""
    img = np.asarray(arr)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"{name}: expected shape (H, W, 3), got {img.shape}")
    if img.shape[0] == 0 or img.shape[1] == 0:
        raise ValueError(f"{name}: empty image")
    return np.ascontiguousarray(img, dtype=np.float32)


@dataclass(frozen=True)
class GridSpec:
    scale: int
    high_w: int
    high_h: int

    def __post_init__(self):
        if self.scale < 2:
            raise ValueError(f"scale must be >= 2, got {self.scale}")
        if self.high_w < 1 or self.high_h < 1:
            raise ValueError("grid dimensions must be positive")

    @property
    def low_w(self) -> int:
        return -(-self.high_w // self.scale)

    @property
    def low_h(self) -> int:
        return -(-self.high_h // self.scale)

    @property
    def offset(self) -> int:
        return self.scale // 2

    @property
    def high_shape(self) -> tuple[int, int]:
        return (self.high_h, self.high_w)

    @property
    def low_shape(self) -> tuple[int, int]:
        return (self.low_h, self.low_w)

    def map_down(self, x: int, y: int) -> tuple[int, int]:
        return (x // self.scale, y // self.scale)

    def sample_position(self, qx: int, qy: int) -> tuple[int, int]:
        """High-res pixel copied into low-res cell ``(qx, qy)`` by grid sampling."""
        return (min(qx * self.scale + self.offset, self.high_w - 1),
                min(qy * self.scale + self.offset, self.high_h - 1))

    def low_index(self, qx: int, qy: int) -> int:
        return qy * self.low_w + qx

    def low_coords(self, index: int) -> tuple[int, int]:
        return (index % self.low_w, index // self.low_w)

    def check_high(self, img: np.ndarray, name: str = "image") -> None:
        if img.shape[:2] != self.high_shape:
            raise ValueError(f"{name}: expected {self.high_w}x{self.high_h}, "
                             f"got {img.shape[1]}x{img.shape[0]}")

    def check_low(self, img: np.ndarray, name: str = "low-res image") -> None:
        if img.shape[:2] != self.low_shape:
            raise ValueError(f"{name}: expected {self.low_w}x{self.low_h}, "
                             f"got {img.shape[1]}x{img.shape[0]}")


@dataclass(frozen=True)
class GluConfig:
    """Upsampler settings: window side, error threshold, joint iterations, weight guard."""

    window: int = 3
    tau: float = 30 / 255
    iterations: int = 3
    eps: float = 1e-3

    def __post_init__(self):
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError(f"window must be an odd integer >= 3, got {self.window}")
        if not 0.0 <= self.tau <= math.sqrt(3.0):
            raise ValueError(f"tau must lie in [0, sqrt(3)], got {self.tau}")
        if self.iterations < 0:
            raise ValueError(f"iterations must be >= 0, got {self.iterations}")
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")


def make_grid(width: int, height: int, scale: int) -> GridSpec:
    grid = GridSpec(int(scale), int(width), int(height))
    if scale >= min(width, height):
        raise ValueError(f"scale {scale} must be smaller than min(width, height)="
                         f"{min(width, height)}")
    return grid


def sample_indices(grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    xs = np.minimum(np.arange(grid.low_w) * grid.scale + grid.offset, grid.high_w - 1)
    ys = np.minimum(np.arange(grid.low_h) * grid.scale + grid.offset, grid.high_h - 1)
    return xs, ys


def grid_downsample(src, scale: int) -> tuple[np.ndarray, GridSpec]:
    """Regular grid downsampling: every low-res pixel copies one source pixel.

    No prefiltering is applied; the copied pixel is the block center
    ``(qx*s + s//2, qy*s + s//2)`` clamped to the image.
    """
    src = as_image(src, "source")
    grid = make_grid(src.shape[1], src.shape[0], scale)
    xs, ys = sample_indices(grid)
    low = np.ascontiguousarray(src[ys[:, None], xs[None, :]])
    return low, grid


def neighborhood(p_low: tuple[int, int], grid: GridSpec, window: int) -> list[tuple[int, int]]:
    """Low-res cells of the ``window`` x ``window`` box centered on ``p_low``.

    Border windows are truncated, never padded; order is raster order.
    """
    qx, qy = p_low
    if not (0 <= qx < grid.low_w and 0 <= qy < grid.low_h):
        raise ValueError(f"cell {p_low} outside low-res grid {grid.low_w}x{grid.low_h}")
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be odd, got {window}")
    r = window // 2
    return [(x, y)
            for y in range(max(qy - r, 0), min(qy + r, grid.low_h - 1) + 1)
            for x in range(max(qx - r, 0), min(qx + r, grid.low_w - 1) + 1)]


def footprint(q: tuple[int, int], grid: GridSpec) -> list[tuple[int, int]]:
    """High-res pixels owned by low-res cell ``q``."""
    qx, qy = q
    if not (0 <= qx < grid.low_w and 0 <= qy < grid.low_h):
        raise ValueError(f"cell {q} outside low-res grid {grid.low_w}x{grid.low_h}")
    s = grid.scale
    return [(x, y)
            for y in range(qy * s, min((qy + 1) * s, grid.high_h))
            for x in range(qx * s, min((qx + 1) * s, grid.high_w))]
