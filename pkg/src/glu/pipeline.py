"""Upsampling methods behind one interface.

A method is split into a target-free ``prepare`` stage (downsampling and, for
the GLU family, parameter optimization) and an ``upsample`` stage that only
needs the low-res target.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .baseline import JbuParams, bilinear_upsample, jbu_upsample, nearest_upsample
from .core import GluConfig, GridSpec, as_image, grid_downsample
from .glu import ParamField, apply_field, fit_field
from .jointopt import joint_optimize
from .simop import SimOperator, apply_operator

METHODS = ("glu", "glu-minus", "glu-exact", "gnu", "jbu", "nearest", "bilinear")


@dataclass
class Prepared:
    method: str
    image: np.ndarray
    grid: GridSpec
    low: np.ndarray
    theta: ParamField | None = None
    iterations: int = 0
    accepted: int = 0
    rejected: int = 0
    times_ms: dict = field(default_factory=dict)


def _ms(t0: float) -> float:
    return (time.perf_counter() - t0) * 1000.0


def prepare(image, scale: int, method: str = "glu", cfg: GluConfig | None = None) -> Prepared:
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    cfg = cfg or GluConfig()
    image = as_image(image, "source")
    t0 = time.perf_counter()
    if method == "glu":
        res = joint_optimize(image, scale, cfg)
        return Prepared(method, image, res.theta.grid, res.low, res.theta, res.iterations,
                        res.accepted, res.rejected, {"optimize": _ms(t0)})
    low, grid = grid_downsample(image, scale)
    prep = Prepared(method, image, grid, low, times_ms={"downsample": _ms(t0)})
    mode = {"glu-minus": "fast", "glu-exact": "exact", "gnu": "gnu"}.get(method)
    if mode is not None:
        t0 = time.perf_counter()
        prep.theta, _ = fit_field(image, low, grid, cfg, mode)
        prep.times_ms["optimize"] = _ms(t0)
    return prep


def upsample(prep: Prepared, target_low, jbu: JbuParams | None = None,
             stats: dict | None = None) -> np.ndarray:
    t0 = time.perf_counter()
    if prep.theta is not None:
        out = apply_field(prep.theta, target_low)
    elif prep.method == "jbu":
        out = jbu_upsample(prep.image, prep.low, target_low, prep.grid, jbu, stats)
    elif prep.method == "nearest":
        out = nearest_upsample(target_low, prep.grid)
    else:
        out = bilinear_upsample(target_low, prep.grid)
    prep.times_ms["upsample"] = _ms(t0)
    return out


def run_operator(prep: Prepared, op: SimOperator | None, jbu: JbuParams | None = None):
    """Reference target at full resolution and its upsampled estimate."""
    if op is None:
        return prep.image, upsample(prep, prep.low, jbu)
    reference = apply_operator(op, prep.image)
    return reference, upsample(prep, apply_operator(op, prep.low), jbu)
