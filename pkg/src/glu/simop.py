"""Pointwise stand-ins for black-box image operators.

All members act on each pixel independently, so applying them before or
after grid downsampling gives the same low-res image.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import as_image

KINDS = ("gain", "mix", "gray", "gamma", "invert")
GRAY = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True)
class SimOperator:
    kind: str
    params: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown operator kind {self.kind!r}")

    @property
    def matrix(self) -> np.ndarray | None:
        """3x3 color matrix for the linear members, else None."""
        if self.kind == "gain":
            return np.eye(3) * self.params[0]
        if self.kind == "mix":
            return np.asarray(self.params, dtype=np.float64).reshape(3, 3)
        if self.kind == "gray":
            return np.tile(GRAY, (3, 1))
        return None

    @property
    def label(self) -> str:
        if not self.params:
            return self.kind
        return f"{self.kind}:" + ",".join(f"{v:g}" for v in self.params)


def scalar_gain(c: float) -> SimOperator:
    return SimOperator("gain", (float(c),))


def channel_mix(m) -> SimOperator:
    m = np.asarray(m, dtype=np.float64)
    if m.shape != (3, 3):
        raise ValueError(f"channel mix must be 3x3, got {m.shape}")
    return SimOperator("mix", tuple(float(v) for v in m.reshape(-1)))


def grayscale() -> SimOperator:
    return SimOperator("gray")


def gamma_curve(gamma: float) -> SimOperator:
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return SimOperator("gamma", (float(gamma),))


def invert() -> SimOperator:
    return SimOperator("invert")


def parse_operator(text: str) -> SimOperator:
    """Parse ``gain:0.5``, ``mix:m00,...,m22``, ``gray``, ``gamma:2.2`` or ``invert``."""
    kind, _, rest = text.strip().partition(":")
    try:
        values = [float(v) for v in rest.split(",")] if rest else []
    except ValueError:
        raise ValueError(f"bad operator parameters in {text!r}") from None
    if kind == "gain" and len(values) == 1:
        return scalar_gain(values[0])
    if kind == "mix" and len(values) == 9:
        return channel_mix(np.reshape(values, (3, 3)))
    if kind == "gamma" and len(values) == 1:
        return gamma_curve(values[0])
    if kind in ("gray", "invert") and not values:
        return SimOperator(kind)
    raise ValueError(f"cannot parse operator {text!r}")


def apply_operator(op: SimOperator, img, clamp: bool = True) -> np.ndarray:
    img = as_image(img).astype(np.float64)
    m = op.matrix
    if m is not None:
        out = img @ m.T
    elif op.kind == "gamma":
        out = np.power(img, op.params[0])
    else:
        out = 1.0 - img
    if clamp:
        np.clip(out, 0.0, 1.0, out=out)
    return out.astype(np.float32)
