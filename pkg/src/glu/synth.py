"""Synthetic test images: ramps, steps, thin lines and random mixtures."""
from __future__ import annotations

import numpy as np


def constant(width: int, height: int, value=0.5) -> np.ndarray:
    img = np.empty((height, width, 3), dtype=np.float32)
    img[...] = value
    return img


def ramp(width: int, height: int, c0=(0.0, 0.0, 0.0), c1=(1.0, 1.0, 1.0),
         axis: int = 1) -> np.ndarray:
    n = width if axis == 1 else height
    t = np.arange(n) / max(n - 1, 1)
    c0 = np.asarray(c0, dtype=np.float64)
    c1 = np.asarray(c1, dtype=np.float64)
    line = (1 - t)[:, None] * c0 + t[:, None] * c1
    if axis == 1:
        img = np.broadcast_to(line[None, :, :], (height, width, 3))
    else:
        img = np.broadcast_to(line[:, None, :], (height, width, 3))
    return np.ascontiguousarray(img, dtype=np.float32)


def step(width: int, height: int, x0: int, left=(0.1, 0.2, 0.3),
         right=(0.9, 0.7, 0.5)) -> np.ndarray:
    img = np.empty((height, width, 3), dtype=np.float32)
    img[:, :x0] = left
    img[:, x0:] = right
    return img


def thin_lines(size: int = 1024, width: int = 2, spacing: int = 97, background=0.05,
               foreground=0.95) -> np.ndarray:
    """Dark image crossed by bright horizontal, vertical and diagonal lines."""
    img = np.full((size, size, 3), background, dtype=np.float32)
    for start in range(spacing // 2, size, spacing):
        img[start:start + width, :] = foreground
        img[:, start + 7:start + 7 + width] = foreground
    yy, xx = np.mgrid[0:size, 0:size]
    for off in range(-size, size, 3 * spacing):
        d = xx - yy - off
        img[(d >= 0) & (d < width)] = foreground
    return img


def random_scene(rng: np.random.Generator, width: int = 96, height: int = 96) -> np.ndarray:
    """Mixture of a smooth ramp, a few rectangles and some thin lines."""
    c0, c1 = rng.random(3), rng.random(3)
    img = ramp(width, height, c0, c1, axis=int(rng.integers(0, 2))).astype(np.float64)
    for _ in range(int(rng.integers(1, 4))):
        x0, y0 = rng.integers(0, width - 8), rng.integers(0, height - 8)
        w, h = rng.integers(4, width // 2), rng.integers(4, height // 2)
        img[y0:y0 + h, x0:x0 + w] = rng.random(3)
    for _ in range(int(rng.integers(0, 4))):
        lw = int(rng.integers(1, 3))
        color = rng.random(3)
        if rng.random() < 0.5:
            y = int(rng.integers(0, height - lw))
            img[y:y + lw, :] = color
        else:
            x = int(rng.integers(0, width - lw))
            img[:, x:x + lw] = color
    return img.astype(np.float32)
