"""Timing harness and quality sweeps."""
from __future__ import annotations

import csv
import os
import statistics
import time
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from .baseline import JbuParams
from .core import GluConfig
from .io import load_image
from .metrics import psnr, ssim
from .pipeline import prepare, run_operator, upsample
from .simop import parse_operator

TIMING_COLUMNS = ("label", "width", "height", "scale", "method", "ms_median", "reps")
SWEEP_COLUMNS = ("image", "scale", "method", "operator", "psnr_db", "ssim",
                 "optimize_ms", "upsample_ms")


@dataclass
class TimingSample:
    label: str
    width: int
    height: int
    scale: int
    method: str
    ms_median: float
    reps: int


def time_method(image, scale: int, method: str, reps: int = 5,
                cfg: GluConfig | None = None) -> float:
    """Median wall time (ms) of prepare + self-upsample, after one warm-up run."""
    if reps < 5:
        raise ValueError(f"reps must be >= 5, got {reps}")

    def once():
        prep = prepare(image, scale, method, cfg)
        upsample(prep, prep.low)

    once()
    samples = []
    for _ in range(reps):
        t0 = time.perf_counter()
        once()
        samples.append((time.perf_counter() - t0) * 1000.0)
    return statistics.median(samples)


def run_timing(suite: Iterable[tuple[str, np.ndarray, int, str]], reps: int = 5,
               cfg: GluConfig | None = None) -> list[TimingSample]:
    """Time each ``(label, image, scale, method)`` entry."""
    out = []
    for label, image, scale, method in suite:
        ms = time_method(image, scale, method, reps, cfg)
        out.append(TimingSample(label, image.shape[1], image.shape[0], scale, method, ms, reps))
    return out


def write_timing_csv(stream, samples: Sequence[TimingSample]) -> None:
    w = csv.DictWriter(stream, fieldnames=TIMING_COLUMNS, lineterminator="\n")
    w.writeheader()
    for s in samples:
        row = asdict(s)
        row["ms_median"] = f"{s.ms_median:.3f}"
        w.writerow(row)


def _external_paths(operator_dir: str, stem: str, tag: str, scale: int, method: str):
    source = "glu" if method == "glu" else "grid"
    return (os.path.join(operator_dir, f"{stem}.{tag}.png"),
            os.path.join(operator_dir, f"{stem}.{tag}.x{scale}.{source}.png"))


def sweep(images: dict[str, np.ndarray], scales: Sequence[int], methods: Sequence[str],
          operators: Sequence[str] = ("self",), cfg: GluConfig | None = None,
          jbu: JbuParams | None = None, operator_dir: str | None = None) -> list[dict]:
    """One row per (image, scale, method, operator).

    ``self`` is self-upsampling, ``file:TAG`` reads operator outputs computed
    outside the tool (``STEM.TAG.png`` at full resolution and
    ``STEM.TAG.xSCALE.{grid,glu}.png`` at low resolution), anything else is a
    synthetic operator spec.  Failures produce a row with ``ERROR`` markers.
    """
    rows = []
    for stem, image in images.items():
        for scale in scales:
            for method in methods:
                prep = prepare(image, scale, method, cfg)
                for opname in operators:
                    row = {"image": stem, "scale": scale, "method": method, "operator": opname,
                           "optimize_ms": f"{prep.times_ms.get('optimize', 0.0):.3f}"}
                    try:
                        if opname == "self":
                            ref, est = run_operator(prep, None, jbu)
                        elif opname.startswith("file:"):
                            if operator_dir is None:
                                raise OSError("no operator directory given")
                            ref_path, low_path = _external_paths(operator_dir, stem, opname[5:],
                                                                 scale, method)
                            for p in (ref_path, low_path):
                                if not os.path.isfile(p):
                                    raise OSError(f"missing {p}")
                            ref = load_image(ref_path)
                            est = upsample(prep, load_image(low_path), jbu)
                        else:
                            ref, est = run_operator(prep, parse_operator(opname), jbu)
                        row.update(psnr_db=f"{psnr(ref, est):.4f}", ssim=f"{ssim(ref, est):.6f}",
                                   upsample_ms=f"{prep.times_ms['upsample']:.3f}")
                    except (OSError, ValueError) as exc:
                        row.update(psnr_db=f"ERROR: {exc}", ssim="ERROR", upsample_ms="")
                    rows.append(row)
    return rows


def write_sweep_csv(stream, rows: Sequence[dict]) -> None:
    w = csv.DictWriter(stream, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
