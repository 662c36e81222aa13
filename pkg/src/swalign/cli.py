"""Command-line interface.

Subcommands: dist, align, radon, mnist-exp, noise-exp, tomo-sweep, bench,
convergence.  Exit codes: 0 ok, 2 bad arguments, 3 data error, 4 numeric
failure.
"""

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .align import align as _align
from .align import brute_rotation_profile
from .errors import (
    BadMagicError,
    CountMismatchError,
    DimMismatchError,
    EmptySetError,
    SwalignError,
)
from .experiments import (
    ExperimentConfig,
    convergence_study,
    run_alignment_experiment,
    run_manifest,
    run_noise_experiment,
    run_timing_bench,
)
from .image import Image, normalize_to_probability
from .io import read_swim, read_swv, write_swim
from .metrics import MetricKind, MetricParams, evaluate_metric
from .nufft import NufftConfig
from .polar import ramp_sinogram, sinogram
from .tomo import Volume, viewing_sweep

DATA_ERRORS = (
    BadMagicError,
    DimMismatchError,
    CountMismatchError,
    EmptySetError,
    FileNotFoundError,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


def _load_probability_image(path):
    return normalize_to_probability(Image(read_swim(path)), clamp_all=True)


def _emit(payload, out_path=None):
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out_path:
        Path(out_path).write_text(text + "\n")
    else:
        print(text)


def _write_table(rows, header, path=None, fmt="csv"):
    if fmt == "json":
        text = json.dumps([{h: row[h] for h in header} for row in rows], indent=2)
        text += "\n"
    else:
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(_cell(row[h]) for h in header))
        text = "\n".join(lines) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _cell(value):
    if isinstance(value, float):
        return f"{value:.10g}"
    return "" if value is None else str(value)


def cmd_dist(args):
    F = _load_probability_image(args.a)
    G = _load_probability_image(args.b)
    kind = MetricKind.from_string(args.metric)
    params = MetricParams(
        n=args.n or 0,
        cfg=NufftConfig(eps=args.eps),
        seed=args.seed,
        lam=args.lam,
        iters=args.iters,
    )
    start = time.perf_counter()
    value = evaluate_metric(kind, F, G, params)
    elapsed = time.perf_counter() - start
    _emit(
        {
            "metric": kind.value,
            "value": value,
            "value_sqrt": float(np.sqrt(max(value, 0.0))),
            "params": {
                "n": params.angles(F.L),
                "eps": args.eps,
                "seed": args.seed,
                "lambda": args.lam,
                "iters": args.iters,
            },
            "wall_time_s": elapsed,
        }
    )
    return EXIT_OK


def cmd_align(args):
    F = _load_probability_image(args.ref)
    G = _load_probability_image(args.target)
    kind = MetricKind.from_string(args.metric)
    n = args.n or F.L
    cfg = NufftConfig(eps=args.eps)
    if kind in (MetricKind.SINKHORN, MetricKind.EXACT_W2, MetricKind.MCSW2):
        params = MetricParams(n=n, cfg=cfg, seed=args.seed, lam=args.lam, iters=args.iters)
        start = time.perf_counter()
        prof = brute_rotation_profile(F, G, kind, n, params)
        elapsed = time.perf_counter() - start
        angle, value = prof.best_angle, prof.best_value
    else:
        result = _align(F, G, kind, n, cfg)
        prof, angle, value, elapsed = (
            result.profile,
            result.angle,
            result.value,
            result.wall_time_s,
        )
    if args.profile_out:
        rows = [
            {"l": l, "angle_deg": np.degrees(a), "d2": v}
            for l, (a, v) in enumerate(zip(prof.angles, prof.values))
        ]
        _write_table(rows, ["l", "angle_deg", "d2"], args.profile_out)
    _emit(
        {
            "angle_rad": angle,
            "angle_deg": float(np.degrees(angle)),
            "value": value,
            "metric": kind.value,
            "wall_time_s": elapsed,
        }
    )
    return EXIT_OK


def cmd_radon(args):
    img = _load_probability_image(args.image)
    n = args.n or img.L
    cfg = NufftConfig(eps=args.eps)
    if args.ramp:
        signed = ramp_sinogram(img, n, cfg)
        data = signed.pos.data - signed.neg.data
    else:
        data = sinogram(img, n, cfg).data
    if args.dump_sinogram:
        write_swim(args.dump_sinogram, data)
    _emit({"rows": data.shape[0], "cols": data.shape[1], "ramp": bool(args.ramp)})
    return EXIT_OK


def _experiment_config(args):
    return ExperimentConfig(
        digit=args.digit,
        shifts_px=tuple(args.shifts),
        snrs=tuple(args.snrs) if hasattr(args, "snrs") else (100.0, 10.0, 1.0, 0.1),
        n_angles=args.n or 0,
        seed=args.seed,
        threads=args.threads,
        limit=args.limit,
    )


def _write_report(report, cfg, out_dir, stem):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{stem}_curves.csv").write_text(report.curves_csv())
    (out / f"{stem}_records.csv").write_text(report.records_csv())
    (out / f"{stem}_manifest.json").write_text(run_manifest(cfg) + "\n")
    print(f"wrote {stem}_curves.csv, {stem}_records.csv, {stem}_manifest.json to {out}")


def cmd_mnist_exp(args):
    cfg = _experiment_config(args)
    report = run_alignment_experiment(
        cfg, images_path=args.images, labels_path=args.labels
    )
    _write_report(report, cfg, args.out_dir, f"mnist_digit{args.digit}")
    return EXIT_OK


def cmd_noise_exp(args):
    cfg = _experiment_config(args)
    report = run_noise_experiment(
        cfg, images_path=args.images, labels_path=args.labels
    )
    _write_report(report, cfg, args.out_dir, f"noise_digit{args.digit}")
    return EXIT_OK


def cmd_tomo_sweep(args):
    path = Path(args.volume)
    if path.suffix == ".json":
        spec = json.loads(path.read_text())
        vol = Volume.mixture(spec["centers"], spec["weights"], spec["sigmas"])
    else:
        vol = Volume.from_grid(read_swv(args.volume))
    rows = viewing_sweep(
        vol,
        axis=args.axis,
        theta_max=np.radians(args.theta_max),
        steps=args.steps,
        L=args.L,
        metrics=tuple(args.metrics.split(",")),
        n=args.n or None,
    )
    _write_table(rows, ["theta_deg", "metric", "value_sqrt"], args.out, args.format)
    return EXIT_OK


def cmd_bench(args):
    result = run_timing_bench(
        sizes=tuple(args.sizes), trials=args.trials, seed=args.seed,
        metrics=tuple(args.metrics.split(",")), isolate=True,
    )
    rows = result["rows"]
    for (metric, mode), slope in sorted(result["slopes"].items()):
        rows.append({"metric": metric, "mode": f"{mode}-loglog-slope", "L": 0,
                     "seconds": slope})
    _write_table(rows, ["metric", "mode", "L", "seconds"], args.out, args.format)
    return EXIT_OK


def cmd_convergence(args):
    result = convergence_study(
        sizes=tuple((L, L) for L in args.sizes),
        ref_L=args.ref_size,
        ref_n=args.ref_angles,
    )
    payload = {
        "reference": result["reference"],
        "slope": result["slope"],
        "rows": result["rows"],
    }
    _emit(payload, args.out)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="swalign",
        description="Rotational image alignment with sliced Wasserstein metrics",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out-dir", default="out")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--eps", type=float, default=1e-6)
        p.add_argument("--n", type=int, default=0, help="angle count (0 = image size)")

    p = sub.add_parser("dist", help="distance between two SWIM images")
    common(p)
    p.add_argument("--metric", required=True,
                   choices=[k.value for k in MetricKind])
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--lambda", dest="lam", type=float, default=0.01)
    p.add_argument("--iters", type=int, default=3)
    p.set_defaults(fn=cmd_dist)

    p = sub.add_parser("align", help="rotational alignment of target to reference")
    common(p)
    p.add_argument("--metric", required=True,
                   choices=[k.value for k in MetricKind])
    p.add_argument("ref")
    p.add_argument("target")
    p.add_argument("--profile-out")
    p.add_argument("--lambda", dest="lam", type=float, default=0.01)
    p.add_argument("--iters", type=int, default=3)
    p.set_defaults(fn=cmd_align)

    p = sub.add_parser("radon", help="sinogram of a SWIM image")
    common(p)
    p.add_argument("image")
    p.add_argument("--ramp", action="store_true")
    p.add_argument("--dump-sinogram")
    p.set_defaults(fn=cmd_radon)

    p = sub.add_parser("mnist-exp", help="MNIST rotational alignment experiment")
    common(p)
    p.add_argument("--images", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--digit", type=int, default=2)
    p.add_argument("--shifts", type=int, nargs="+", default=[0, 2, 4, 6])
    p.add_argument("--limit", type=int, default=0)
    p.set_defaults(fn=cmd_mnist_exp)

    p = sub.add_parser("noise-exp", help="noisy MNIST alignment experiment")
    common(p)
    p.add_argument("--images", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--digit", type=int, default=2)
    p.add_argument("--shifts", type=int, nargs="+", default=[0, 3])
    p.add_argument("--snrs", type=float, nargs="+", default=[100.0, 10.0, 1.0, 0.1])
    p.add_argument("--limit", type=int, default=0)
    p.set_defaults(fn=cmd_noise_exp)

    p = sub.add_parser("tomo-sweep", help="viewing-angle stability sweep")
    common(p)
    p.add_argument("--volume", required=True,
                   help="mixture spec .json or .swv grid volume")
    p.add_argument("--axis", choices=("x", "y"), default="x")
    p.add_argument("--theta-max", type=float, default=45.0)
    p.add_argument("--steps", type=int, default=46)
    p.add_argument("--L", type=int, default=96)
    p.add_argument("--metrics", default="sw2,rfsw2,euclidean")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_tomo_sweep)

    p = sub.add_parser("bench", help="timing benchmark with complexity slopes")
    common(p)
    p.add_argument("--sizes", type=int, nargs="+", default=[32, 64, 96, 128])
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--metrics", default="sw2,rfsw2")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("convergence", help="estimator convergence study")
    common(p)
    p.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256])
    p.add_argument("--ref-size", type=int, default=512)
    p.add_argument("--ref-angles", type=int, default=1024)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_convergence)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except DATA_ERRORS as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (SwalignError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
