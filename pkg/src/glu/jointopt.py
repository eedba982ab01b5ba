"""Joint optimization of the low-res image and the interpolation field.

Starting from grid downsampling, pixels whose self-upsampling error exceeds
``tau`` are grouped into 4-connected components.  For each component the
low-res cells it covers are overwritten with the component's worst pixel per
cell, the affected pixels are refit, and the change is kept only if their
summed error does not grow.  Otherwise every touched value is restored.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np
from scipy import ndimage

from .core import GluConfig, GridSpec, as_image, grid_downsample
from .glu import ParamField, fit_field, refit_pixels


@dataclass
class LargeErrorSet:
    mask: np.ndarray       # bool (H, W)
    labels: np.ndarray     # int32 (H, W), 0 outside the mask
    components: list[np.ndarray] = field(default_factory=list)  # flat indices, raster order

    def __len__(self) -> int:
        return len(self.components)


@dataclass
class JointState:
    """Mutable optimization state: low-res image, field and error map."""

    image: np.ndarray
    low: np.ndarray
    theta: ParamField
    errors: np.ndarray

    def snapshot(self) -> tuple[np.ndarray, ...]:
        return (self.low.copy(), self.theta.a.copy(), self.theta.b.copy(),
                self.theta.weight.copy(), self.errors.copy())


@dataclass
class JointResult:
    low: np.ndarray
    theta: ParamField
    errors: np.ndarray
    iterations: int
    accepted: int = 0
    rejected: int = 0


_CROSS = ndimage.generate_binary_structure(2, 1)


def find_large_error(errors: np.ndarray, tau: float) -> LargeErrorSet:
    """Pixels with error strictly above ``tau``, split into 4-connected components.

    Components are ordered by their first pixel in raster order.
    """
    if tau < 0:
        raise ValueError(f"tau must be non-negative, got {tau}")
    mask = np.asarray(errors) > tau
    labels, n = ndimage.label(mask, structure=_CROSS)
    if n == 0:
        return LargeErrorSet(mask, labels, [])
    flat = labels.reshape(-1)
    idx = np.flatnonzero(flat)
    lab = flat[idx]
    order = np.argsort(lab, kind="stable")
    bounds = np.searchsorted(lab[order], np.arange(1, n + 2))
    comps = [idx[order[bounds[i]:bounds[i + 1]]] for i in range(n)]
    # scipy numbers labels in raster order of first occurrence; enforce it anyway
    comps.sort(key=lambda c: c[0])
    return LargeErrorSet(mask, labels, comps)


@numba.njit(cache=True)
def _plan_trial(width, height, lw, lh, errors, comp, scale, window, literal, stamp, best, epoch):
    """Cells to replace, their source pixels, and the pixels to refit.

    ``stamp``/``best`` are low-res scratch arrays; entries stamped ``epoch`` or
    ``epoch + 1`` belong to this call, so nothing needs clearing between calls.
    """
    radius = window // 2
    qs = np.empty(comp.size, dtype=np.int64)
    nq = 0
    # comp is in raster order, so strict comparison keeps the lowest index on ties
    for i in range(comp.size):
        p = comp[i]
        y = p // width
        q = (y // scale) * lw + (p - y * width) // scale
        if stamp[q] != epoch:
            stamp[q] = epoch
            best[q] = p
            qs[nq] = q
            nq += 1
        elif errors[p] > errors[best[q]]:
            best[q] = p
    qs = np.sort(qs[:nq])
    src = np.empty(nq, dtype=np.int64)
    for i in range(nq):
        src[i] = best[qs[i]]
    if literal:
        return qs, src, comp.copy()

    # every cell whose window contains a replaced cell
    cells = np.empty(nq * window * window, dtype=np.int64)
    nc = 0
    for i in range(nq):
        qy = qs[i] // lw
        qx = qs[i] - qy * lw
        for cy in range(max(qy - radius, 0), min(qy + radius, lh - 1) + 1):
            for cx in range(max(qx - radius, 0), min(qx + radius, lw - 1) + 1):
                c = cy * lw + cx
                if stamp[c] != epoch + 1:
                    stamp[c] = epoch + 1
                    cells[nc] = c
                    nc += 1
    cells = np.sort(cells[:nc])
    count = 0
    for i in range(nc):
        cy = cells[i] // lw
        cx = cells[i] - cy * lw
        count += (min((cy + 1) * scale, height) - cy * scale) * \
            (min((cx + 1) * scale, width) - cx * scale)
    pixels = np.empty(count, dtype=np.int64)
    k = 0
    for i in range(nc):
        cy = cells[i] // lw
        cx = cells[i] - cy * lw
        for y in range(cy * scale, min((cy + 1) * scale, height)):
            for x in range(cx * scale, min((cx + 1) * scale, width)):
                pixels[k] = y * width + x
                k += 1
    return qs, src, pixels


class _Scratch:
    def __init__(self, grid: GridSpec):
        n = grid.low_w * grid.low_h
        self.stamp = np.zeros(n, dtype=np.int64)
        self.best = np.zeros(n, dtype=np.int64)
        self.epoch = 1

    def next_epoch(self) -> int:
        e = self.epoch
        self.epoch += 2
        return e


def affected_pixels(state: JointState, component: np.ndarray, cfg: GluConfig,
                    literal: bool = False) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(cells, source_pixels, affected)`` for a trial on ``component`` (flat indices)."""
    grid = state.theta.grid
    scratch = _Scratch(grid)
    return _plan_trial(grid.high_w, grid.high_h, grid.low_w, grid.low_h,
                       state.errors.reshape(-1), np.asarray(component, dtype=np.int64),
                       grid.scale, cfg.window, literal, scratch.stamp, scratch.best,
                       scratch.next_epoch())


def trial_update_component(state: JointState, component: np.ndarray, cfg: GluConfig,
                           literal: bool = False, scratch: _Scratch | None = None) -> bool:
    """Try replacing the low-res cells under ``component``; roll back on failure.

    Acceptance compares the summed error over the affected set: the component
    plus every pixel whose candidate window contains a replaced cell.  With
    ``literal=True`` only the component itself is refit and compared.
    """
    component = np.asarray(component, dtype=np.int64)
    if component.size == 0:
        raise ValueError("component is empty")
    theta = state.theta
    grid = theta.grid
    scratch = scratch or _Scratch(grid)
    a, b, w = theta.a.reshape(-1), theta.b.reshape(-1), theta.weight.reshape(-1)
    errors = state.errors.reshape(-1)
    low = state.low.reshape(-1, 3)

    cells, src, pixels = _plan_trial(grid.high_w, grid.high_h, grid.low_w, grid.low_h,
                                     errors, component, grid.scale, cfg.window, literal,
                                     scratch.stamp, scratch.best, scratch.next_epoch())
    backup = (low[cells], a[pixels], b[pixels], w[pixels], errors[pixels])
    e0 = errors[pixels].sum()

    low[cells] = state.image.reshape(-1, 3)[src]
    refit_pixels(state.image, state.low, theta, state.errors, pixels, cfg)
    if errors[pixels].sum() <= e0:
        return True

    low[cells], a[pixels], b[pixels], w[pixels], errors[pixels] = backup
    return False


def joint_optimize(image, scale: int, cfg: GluConfig | None = None, mode: str = "fast",
                   literal: bool = False) -> JointResult:
    """Optimize the downsampled image together with the interpolation field."""
    cfg = cfg or GluConfig()
    image = as_image(image, "source")
    low, grid = grid_downsample(image, scale)
    theta, errors = fit_field(image, low, grid, cfg, mode)
    state = JointState(image, low, theta, errors)
    scratch = _Scratch(grid)
    iterations = accepted = rejected = 0
    for _ in range(cfg.iterations):
        large = find_large_error(state.errors, cfg.tau)
        if not large.components:
            break
        iterations += 1
        for comp in large.components:
            if trial_update_component(state, comp, cfg, literal, scratch):
                accepted += 1
            else:
                rejected += 1
    theta.optimized = True
    return JointResult(state.low, theta, state.errors, iterations, accepted, rejected)
