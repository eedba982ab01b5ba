"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 validation error.
Reports go to stdout; diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import json
import logging
import sys
import time

import numba

from . import bench
from .baseline import JbuParams, jbu_upsample
from .core import GluConfig, grid_downsample
from .glu import MODES, apply_field, fit_field
from .io import load_image, read_glup, save_image, write_glup
from .jointopt import joint_optimize
from .metrics import psnr, ssim
from .simop import apply_operator, parse_operator

log = logging.getLogger("glu")

EXIT_USAGE, EXIT_IO, EXIT_VALIDATION = 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _ms(t0: float) -> float:
    return round((time.perf_counter() - t0) * 1000.0, 3)


def _config(args) -> GluConfig:
    return GluConfig(window=args.window, tau=args.tau, iterations=args.iters)


def _optimize(args):
    """Shared optimize stage: returns (image, low, theta, report)."""
    times = {}
    t0 = time.perf_counter()
    image = load_image(args.input)
    times["load"] = _ms(t0)
    cfg = _config(args)
    t0 = time.perf_counter()
    if args.no_downsample_opt:
        low, grid = grid_downsample(image, args.scale)
        theta, _ = fit_field(image, low, grid, cfg, args.mode)
        iterations = accepted = rejected = 0
    else:
        res = joint_optimize(image, args.scale, cfg, args.mode)
        low, theta = res.low, res.theta
        iterations, accepted, rejected = res.iterations, res.accepted, res.rejected
    times["optimize"] = _ms(t0)
    log.debug("optimized %s at %dx: %d iterations, %d/%d trials accepted", args.input,
              args.scale, iterations, accepted, accepted + rejected)
    report = {"stage_times_ms": times, "iterations": iterations,
              "trials_accepted": accepted, "trials_rejected": rejected,
              "scale": args.scale, "mode": args.mode}
    return image, low, theta, report


def _score(report, reference, estimate):
    t0 = time.perf_counter()
    report["psnr_db"] = psnr(reference, estimate)
    report["ssim"] = ssim(reference, estimate)
    report["stage_times_ms"]["metrics"] = _ms(t0)


def _emit(report, fmt: str = "json"):
    if fmt == "json":
        sys.stdout.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
        return
    row = {k: v for k, v in report.items() if k != "stage_times_ms"}
    for stage, ms in report["stage_times_ms"].items():
        row[f"{stage}_ms"] = ms
    buf = _io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(row), lineterminator="\n")
    w.writeheader()
    w.writerow(row)
    sys.stdout.write(buf.getvalue())


def cmd_optimize(args):
    image, low, theta, report = _optimize(args)
    t0 = time.perf_counter()
    selfup = apply_field(theta, low)
    report["stage_times_ms"]["upsample"] = _ms(t0)
    _score(report, image, selfup)
    write_glup(args.out_glup, low, theta)
    if args.out_low:
        save_image(args.out_low, low, args.bits)
    _emit(report)


def cmd_selfcheck(args):
    image, low, theta, report = _optimize(args)
    reference, target_low = image, low
    if args.simop:
        op = parse_operator(args.simop)
        reference, target_low = apply_operator(op, image), apply_operator(op, low)
        report["operator"] = op.label
    t0 = time.perf_counter()
    out = apply_field(theta, target_low)
    report["stage_times_ms"]["upsample"] = _ms(t0)
    _score(report, reference, out)
    if args.out:
        save_image(args.out, out, args.bits)
    _emit(report, args.report)


def cmd_upsample(args):
    t0 = time.perf_counter()
    low, theta = read_glup(args.glup)
    target = load_image(args.target_low)
    t1 = time.perf_counter()
    out = apply_field(theta, target)
    save_image(args.out, out, args.bits)
    _emit({"stage_times_ms": {"load": round((t1 - t0) * 1000, 3), "upsample": _ms(t1)},
           "scale": theta.grid.scale, "mode": theta.mode,
           "width": theta.grid.high_w, "height": theta.grid.high_h})


def cmd_jbu(args):
    params = JbuParams(args.window, args.sigma_d, args.sigma_r)
    image = load_image(args.input)
    low, grid = grid_downsample(image, args.scale)
    target = load_image(args.target_low) if args.target_low else low
    stats = {}
    t0 = time.perf_counter()
    out = jbu_upsample(image, low, target, grid, params, stats)
    report = {"stage_times_ms": {"upsample": _ms(t0)}, "scale": args.scale,
              "method": "jbu", "params": params.describe(), "fallback_pixels": stats["fallback"]}
    if args.target_low is None:
        _score(report, image, out)
    if args.out:
        save_image(args.out, out, args.bits)
    _emit(report)


def cmd_metrics(args):
    a = load_image(args.reference)
    b = load_image(args.estimate)
    _emit({"stage_times_ms": {}, "psnr_db": psnr(a, b), "ssim": ssim(a, b)})


def _load_many(paths):
    images = {}
    for p in paths:
        stem = p.rsplit("/", 1)[-1].rsplit(".", 1)[0]
        images[stem] = load_image(p)
    return images


def cmd_bench(args):
    images = _load_many(args.images)
    cfg = GluConfig(window=args.window, tau=args.tau, iterations=args.iters)
    rows = bench.sweep(images, args.scales, args.methods, args.operators, cfg,
                       operator_dir=args.operator_dir)
    bench.write_sweep_csv(sys.stdout, rows)


def cmd_timing(args):
    images = _load_many(args.images)
    suite = [(stem, img, s, m) for stem, img in images.items() for s in args.scales
             for m in args.methods]
    bench.write_timing_csv(sys.stdout, bench.run_timing(suite, args.reps))


def _opt_flags(p):
    p.add_argument("--input", required=True)
    p.add_argument("--scale", type=int, required=True)
    p.add_argument("--no-downsample-opt", action="store_true",
                   help="plain grid downsampling (GLU-minus)")
    p.add_argument("--mode", choices=MODES, default="fast")
    p.add_argument("--window", type=int, default=3)
    p.add_argument("--tau", type=float, default=30 / 255)
    p.add_argument("--iters", type=int, default=3)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="glu", description="Guided linear upsampling")
    parser.add_argument("--threads", type=int, default=None,
                        help="numba worker threads (results do not depend on it)")
    parser.add_argument("--bits", type=int, choices=(8, 16), default=8,
                        help="bit depth of written images")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("optimize", help="optimize low-res image and parameters, write GLUP")
    _opt_flags(p)
    p.add_argument("--out-glup", required=True)
    p.add_argument("--out-low", help="also write the low-res source image")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("upsample", help="apply a GLUP file to a low-res target")
    p.add_argument("--glup", required=True)
    p.add_argument("--target-low", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_upsample)

    p = sub.add_parser("selfcheck", help="round trip one image and report quality")
    _opt_flags(p)
    p.add_argument("--simop", help="synthetic operator, e.g. gain:0.5 or gamma:2.2")
    p.add_argument("--report", choices=("json", "csv"), default="json")
    p.add_argument("--out", help="write the upsampled image")
    p.set_defaults(func=cmd_selfcheck)

    p = sub.add_parser("jbu", help="joint bilateral upsampling baseline")
    p.add_argument("--input", required=True)
    p.add_argument("--scale", type=int, required=True)
    p.add_argument("--target-low", help="low-res target (default: the source itself)")
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--sigma-d", type=float, default=0.5)
    p.add_argument("--sigma-r", type=float, default=0.1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_jbu)

    p = sub.add_parser("metrics", help="PSNR and SSIM between two images")
    p.add_argument("--reference", required=True)
    p.add_argument("--estimate", required=True)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("bench", help="quality sweep, CSV to stdout")
    p.add_argument("--images", nargs="+", required=True)
    p.add_argument("--scales", type=int, nargs="+", default=[8, 16, 32])
    p.add_argument("--methods", nargs="+", default=["glu", "glu-minus", "gnu", "jbu",
                                                    "nearest", "bilinear"])
    p.add_argument("--operators", nargs="+", default=["self"],
                   help="self, file:TAG or a synthetic operator spec")
    p.add_argument("--operator-dir")
    p.add_argument("--window", type=int, default=3)
    p.add_argument("--tau", type=float, default=30 / 255)
    p.add_argument("--iters", type=int, default=3)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("timing", help="median-of-k timings, CSV to stdout")
    p.add_argument("--images", nargs="+", required=True)
    p.add_argument("--scales", type=int, nargs="+", default=[8])
    p.add_argument("--methods", nargs="+", default=["glu", "glu-minus"])
    p.add_argument("--reps", type=int, default=5)
    p.set_defaults(func=cmd_timing)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(message)s")
    if args.threads:
        numba.set_num_threads(min(args.threads, numba.config.NUMBA_NUM_THREADS))
    try:
        args.func(args)
    except OSError as exc:
        print(f"glu: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"glu: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return 0


if __name__ == "__main__":
    sys.exit(main())
