"""Experiment runners: MNIST alignment accuracy, noise robustness, timing,
and estimator convergence, with deterministic CSV/JSON reporting.

Every random draw is seeded from (master seed, configuration indices,
image index), so results are byte-identical across runs and independent
of worker scheduling.
"""

import gc
import json
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__ as _version
from .align import (
    RotationProfile,
    _shift_profile,
    rotation_profile_euclidean,
)
from .errors import CountMismatchError, EmptySetError
from .image import (
    Image,
    NoiseSpec,
    Shift2D,
    add_gaussian_noise,
    apply_rotation,
    apply_shift,
    gaussian_blob,
    normalize_to_probability,
    pad_to,
    split_signed,
)
from .io import read_idx_images, read_idx_labels
from .metrics import (
    euclidean_squared,
    plain_quantiles,
    ramp_quantiles,
    rfsw2_squared,
    sinkhorn_squared,
    sw2_squared,
)
from .nufft import NufftConfig

__all__ = [
    "ExperimentConfig",
    "AlignmentReport",
    "load_mnist",
    "pick_reference",
    "perturb_dataset",
    "run_alignment_experiment",
    "run_noise_experiment",
    "run_timing_bench",
    "convergence_study",
    "smooth_test_pair",
]

ALIGN_METRICS = ("euclidean", "sw2", "rfsw2")
CURVE_MAX_DEG = 45
SUMMARY_DEGS = (15, 45)


@dataclass(frozen=True)
class ExperimentConfig:
    digit: int = 2
    image_size: int = 39
    shifts_px: tuple = (0, 2, 4, 6)
    snrs: tuple = (100.0, 10.0, 1.0, 0.1)
    n_angles: int = 0  # 0 -> image_size
    metrics: tuple = ALIGN_METRICS
    seed: int = 0
    eps: float = 1e-6
    threads: int = 1
    limit: int = 0  # 0 = use every image

    @property
    def n(self):
        return self.n_angles or self.image_size

    @property
    def nufft(self):
        return NufftConfig(eps=self.eps)


@dataclass
class AlignmentReport:
    """Per-image alignment records plus cumulative accuracy curves."""

    records: list = field(default_factory=list)
    curves: list = field(default_factory=list)
    summary: list = field(default_factory=list)

    def percent_within(self, metric, deg, shift_px=None, snr=None):
        for row in self.summary:
            if (
                row["metric"] == metric
                and (shift_px is None or row["shift_px"] == shift_px)
                and (snr is None or row["snr"] == snr)
            ):
                return row[f"pct{deg}"]
        raise KeyError(f"no summary row for metric={metric} shift={shift_px} snr={snr}")

    def curves_csv(self):
        lines = ["metric,shift_px,snr,threshold_deg,percent"]
        for row in self.curves:
            lines.append(
                f"{row['metric']},{row['shift_px']},{_fmt(row['snr'])},"
                f"{row['threshold_deg']},{_fmt(row['percent'])}"
            )
        return "\n".join(lines) + "\n"

    def records_csv(self):
        lines = ["image_id,shift_px,snr,metric,theta_true_deg,theta_est_deg,error_deg"]
        for row in self.records:
            lines.append(
                f"{row['image_id']},{row['shift_px']},{_fmt(row['snr'])},"
                f"{row['metric']},{_fmt(row['theta_true_deg'])},"
                f"{_fmt(row['theta_est_deg'])},{_fmt(row['error_deg'])}"
            )
        return "\n".join(lines) + "\n"


def _fmt(value):
    if value is None:
        return ""
    return f"{value:.10g}"


def run_manifest(cfg: ExperimentConfig, extra=None):
    info = {
        "config": {
            "digit": cfg.digit,
            "image_size": cfg.image_size,
            "shifts_px": list(cfg.shifts_px),
            "snrs": list(cfg.snrs),
            "n_angles": cfg.n,
            "metrics": list(cfg.metrics),
            "seed": cfg.seed,
            "eps": cfg.eps,
        },
        "version": _version,
        "host": {"platform": platform.platform(), "python": platform.python_version()},
    }
    if extra:
        info.update(extra)
    return json.dumps(info, indent=2, sort_keys=True)


def load_mnist(images_path, labels_path, digit, image_size=39):
    """MNIST digits as probability images zero-padded to image_size."""
    raw = read_idx_images(images_path)
    labels = read_idx_labels(labels_path)
    if raw.shape[0] != labels.shape[0]:
        raise CountMismatchError(
            f"{raw.shape[0]} images vs {labels.shape[0]} labels"
        )
    picked = raw[labels == digit]
    if picked.shape[0] == 0:
        raise EmptySetError(f"no images with digit {digit}")
    images = []
    for arr in picked:
        img = Image(arr.astype(np.float64) / 255.0)
        img = pad_to(normalize_to_probability(img), image_size)
        images.append(Image(img.data, probability=True))
    return images


def pick_reference(images):
    """Index and image minimizing Euclidean distance to the pixelwise mean."""
    if not images:
        raise EmptySetError("cannot pick a reference from an empty set")
    mean = Image(np.mean([img.data for img in images], axis=0))
    dists = [euclidean_squared(img, mean) for img in images]
    idx = int(np.argmin(dists))
    return idx, images[idx]


def perturb_dataset(images, shift_px, seed):
    """Rotate each image by theta ~ U[0, 2pi) and shift by (+-shift_px, +-shift_px).

    Signs are drawn independently per axis.  Returns (image, theta_true)
    pairs; images are renormalized to probability after interpolation.
    """
    out = []
    for i, img in enumerate(images):
        rng = np.random.default_rng([seed, shift_px, i])
        theta = rng.uniform(0.0, 2.0 * np.pi)
        perturbed = apply_rotation(img, theta)
        if shift_px:
            sx = int(shift_px) * (1 if rng.integers(0, 2) else -1)
            sy = int(shift_px) * (1 if rng.integers(0, 2) else -1)
            perturbed = apply_shift(
                perturbed, Shift2D.from_pixels(sx, sy, img.L), "integer"
            )
        out.append((normalize_to_probability(perturbed, clamp_all=True), theta))
    return out


def circular_error_deg(a, b):
    d = abs(a - b) % (2.0 * np.pi)
    return np.degrees(min(d, 2.0 * np.pi - d))


class _ReferenceAligner:
    """Aligns targets against one fixed reference, reusing its transforms."""

    def __init__(self, reference: Image, metrics, n, cfg):
        self.reference = reference
        self.metrics = tuple(metrics)
        self.n = n
        self.cfg = cfg
        self.L = None
        if "sw2" in self.metrics:
            self.U = plain_quantiles(reference, n, cfg)
            self.L = self.U.L
        if "rfsw2" in self.metrics:
            self.Up, self.Un = ramp_quantiles(reference, n, cfg)
            self.L = self.Up.L

    def angles(self, target: Image):
        est = {}
        n = self.n
        if "euclidean" in self.metrics:
            prof = rotation_profile_euclidean(self.reference, target, n)
            est["euclidean"] = prof.best_angle
        if "sw2" in self.metrics:
            V = plain_quantiles(target, n, self.cfg)
            prof = RotationProfile(_shift_profile(self.U, V) / (n * self.L))
            est["sw2"] = prof.best_angle
        if "rfsw2" in self.metrics:
            Vp, Vn = ramp_quantiles(target, n, self.cfg)
            vals = _shift_profile(self.Up, Vp) + _shift_profile(self.Un, Vn)
            prof = RotationProfile(vals / (n * self.Up.L))
            est["rfsw2"] = prof.best_angle
        return est


def _cumulative_rows(errors, metric, shift_px, snr):
    errors = np.asarray(errors)
    total = errors.shape[0]
    curve = []
    for deg in range(0, CURVE_MAX_DEG + 1):
        pct = 100.0 * np.count_nonzero(errors <= deg + 0.5) / total
        curve.append(
            {
                "metric": metric,
                "shift_px": shift_px,
                "snr": snr,
                "threshold_deg": deg,
                "percent": pct,
            }
        )
    summary = {"metric": metric, "shift_px": shift_px, "snr": snr}
    for deg in SUMMARY_DEGS:
        summary[f"pct{deg}"] = 100.0 * np.count_nonzero(errors <= deg + 0.5) / total
    return curve, summary


def _run_alignment(cfg, reference, target_sets, report):
    """target_sets: list of (shift_px, snr, [(image, theta_true), ...])."""
    aligner = _ReferenceAligner(reference, cfg.metrics, cfg.n, cfg.nufft)

    def one(item):
        idx, (img, theta) = item
        return idx, theta, aligner.angles(img)

    for shift_px, snr, targets in target_sets:
        items = list(enumerate(targets))
        if cfg.threads > 1:
            with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
                results = list(pool.map(one, items))
        else:
            results = [one(item) for item in items]
        per_metric = {m: [] for m in cfg.metrics}
        for idx, theta, est in results:
            for metric in cfg.metrics:
                err = circular_error_deg(theta, est[metric])
                per_metric[metric].append(err)
                report.records.append(
                    {
                        "image_id": idx,
                        "shift_px": shift_px,
                        "snr": snr,
                        "metric": metric,
                        "theta_true_deg": np.degrees(theta),
                        "theta_est_deg": np.degrees(est[metric]),
                        "error_deg": err,
                    }
                )
        for metric in cfg.metrics:
            curve, summary = _cumulative_rows(per_metric[metric], metric, shift_px, snr)
            report.curves.extend(curve)
            report.summary.append(summary)
    return report


def _limited(images, cfg):
    return images[: cfg.limit] if cfg.limit else images


def run_alignment_experiment(cfg: ExperimentConfig, images=None,
                             images_path=None, labels_path=None):
    """Rotated/shifted alignment accuracy (the clean-data experiment).

    ``images`` may be supplied directly; otherwise MNIST IDX paths are
    loaded and filtered by cfg.digit.  The reference is excluded from the
    target set.
    """
    if images is None:
        images = load_mnist(images_path, labels_path, cfg.digit, cfg.image_size)
    ref_idx, reference = pick_reference(images)
    targets = [img for i, img in enumerate(images) if i != ref_idx]
    targets = _limited(targets, cfg)
    sets = []
    for shift_px in cfg.shifts_px:
        sets.append((shift_px, None, perturb_dataset(targets, shift_px, cfg.seed)))
    return _run_alignment(cfg, reference, sets, AlignmentReport())


def run_noise_experiment(cfg: ExperimentConfig, images=None,
                         images_path=None, labels_path=None,
                         shifts_px=(0, 3)):
    """Noisy alignment: add white noise, keep the positive part, renormalize.

    The alignment is computed between the clean reference and g+ at each
    SNR in cfg.snrs, with and without +-3 pixel shifts.
    """
    if images is None:
        images = load_mnist(images_path, labels_path, cfg.digit, cfg.image_size)
    ref_idx, reference = pick_reference(images)
    targets = [img for i, img in enumerate(images) if i != ref_idx]
    targets = _limited(targets, cfg)
    sets = []
    for shift_px in shifts_px:
        perturbed = perturb_dataset(targets, shift_px, cfg.seed)
        for snr_idx, snr in enumerate(cfg.snrs):
            noisy = []
            for i, (img, theta) in enumerate(perturbed):
                spec = NoiseSpec(snr=snr, seed=_noise_seed(cfg.seed, shift_px, snr_idx, i))
                gplus, _ = split_signed(add_gaussian_noise(img, spec))
                noisy.append((normalize_to_probability(gplus), theta))
            sets.append((shift_px, snr, noisy))
    return _run_alignment(cfg, reference, sets, AlignmentReport())


def _noise_seed(seed, shift_px, snr_idx, image_idx):
    seq = np.random.SeedSequence((seed, shift_px, snr_idx, image_idx))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def smooth_test_pair(L):
    """Fixed smooth Lipschitz image pair, rendered at resolution L."""
    a = gaussian_blob(L, Shift2D(0.18, -0.05), 0.16).data
    a = a + 0.6 * gaussian_blob(L, Shift2D(-0.22, 0.15), 0.21).data
    b = gaussian_blob(L, Shift2D(-0.05, 0.22), 0.18).data
    b = b + 0.8 * gaussian_blob(L, Shift2D(0.1, -0.25), 0.14).data
    F = normalize_to_probability(Image(a))
    G = normalize_to_probability(Image(b))
    return F, G


def convergence_study(sizes=((64, 64), (128, 128), (256, 256)),
                      ref_L=512, ref_n=1024, ref_eps=1e-12, eps=1e-12):
    """Discretization error of sw2_squared against a fine-grid reference."""
    F, G = smooth_test_pair(ref_L)
    reference = sw2_squared(F, G, ref_n, NufftConfig(eps=ref_eps))
    rows = []
    for L, n in sizes:
        F, G = smooth_test_pair(L)
        val = sw2_squared(F, G, n, NufftConfig(eps=eps))
        rows.append(
            {"L": L, "n": n, "value": val, "error": abs(val - reference)}
        )
    errs = np.array([r["error"] for r in rows])
    Ls = np.array([r["L"] for r in rows], dtype=float)
    slope = np.polyfit(np.log(1.0 / Ls), np.log(errs), 1)[0]
    return {"reference": reference, "rows": rows, "slope": float(slope)}


def _timed_medians(tasks, trials, warm_budget):
    """Median wall time per task over consecutive repetitions.

    Each task is warmed until JIT, FFT twiddle, allocator, and cache state
    settle (cheap tasks need many repetitions), then timed back to back so
    samples do not pay another task's cache refill.  Collection pauses
    would skew the small sizes, so the garbage collector is paused around
    the timed region (as timeit does)."""
    block_medians = {key: [] for key, _ in tasks}
    gc_was_enabled = gc.isenabled()
    gc.collect()
    gc.disable()
    try:
        for _, fn in tasks:
            fn()
            start = time.perf_counter()
            reps = 0
            while reps < 100 and time.perf_counter() - start < warm_budget:
                fn()
                reps += 1
        # two separated passes per task: a transient load burst on the host
        # would have to hit both blocks of the same task to survive the min
        for _ in range(2):
            for key, fn in tasks:
                samples = []
                for _ in range(trials):
                    t0 = time.perf_counter()
                    fn()
                    samples.append(time.perf_counter() - t0)
                block_medians[key].append(float(np.median(samples)))
    finally:
        if gc_was_enabled:
            gc.enable()
    return {key: min(blocks) for key, blocks in block_medians.items()}


def run_timing_bench(sizes=(32, 64, 96, 128), trials=5, seed=0,
                     metrics=("sw2", "rfsw2"), sinkhorn_sizes=(32, 64),
                     eps=1e-6, isolate=False):
    """Median wall times for single distances and full rotation profiles.

    Returns rows (metric, mode, L, seconds) plus per-(metric, mode) log-log
    slope fits of time against L.  Uses dense uniform random images.

    ``isolate`` reruns the measurement in a fresh interpreter so inherited
    heap and huge-page state cannot skew the scaling fit.
    """
    if isolate:
        return _run_timing_bench_isolated(
            sizes, trials, seed, metrics, sinkhorn_sizes, eps
        )
    rng = np.random.default_rng(seed)
    cfg = NufftConfig(eps=eps)
    pairs = {}
    for L in sorted(set(sizes) | set(sinkhorn_sizes)):
        F = normalize_to_probability(Image(rng.random((L, L))))
        G = normalize_to_probability(Image(rng.random((L, L))))
        pairs[L] = (F, G)

    tasks = []
    for L in sizes:
        F, G = pairs[L]
        if "sw2" in metrics:
            tasks.append(("sw2", "single", L, lambda F=F, G=G, L=L: sw2_squared(F, G, L, cfg)))
            tasks.append(
                ("sw2", "profile", L,
                 lambda F=F, G=G, L=L: RotationProfile(
                     _shift_profile(plain_quantiles(F, L, cfg), plain_quantiles(G, L, cfg)) / (L * L)
                 ))
            )
        if "rfsw2" in metrics:
            tasks.append(("rfsw2", "single", L, lambda F=F, G=G, L=L: rfsw2_squared(F, G, L, cfg)))

            def rf_profile(F=F, G=G, L=L):
                Up, Un = ramp_quantiles(F, L, cfg)
                Vp, Vn = ramp_quantiles(G, L, cfg)
                return RotationProfile(
                    (_shift_profile(Up, Vp) + _shift_profile(Un, Vn)) / (L * Up.L)
                )

            tasks.append(("rfsw2", "profile", L, rf_profile))
        if "euclidean" in metrics:
            tasks.append(
                ("euclidean", "profile", L,
                 lambda F=F, G=G, L=L: rotation_profile_euclidean(F, G, L, variant="sino"))
            )
    if "sinkhorn" in metrics:
        for L in sinkhorn_sizes:
            F, G = pairs[L]
            tasks.append(("sinkhorn", "single", L,
                          lambda F=F, G=G: sinkhorn_squared(F, G, 0.01, 3)))

    keyed = [((metric, mode, L), fn) for metric, mode, L, fn in tasks]
    # warm and time the dense-kernel metrics after the fast-path group: their
    # hundred-MB temporaries would otherwise thrash the allocator between the
    # small fast-path samples
    light = [item for item in keyed if item[0][0] != "sinkhorn"]
    heavy = [item for item in keyed if item[0][0] == "sinkhorn"]
    medians = _timed_medians(light, trials, warm_budget=0.4)
    medians.update(_timed_medians(heavy, trials, warm_budget=0.0))
    rows = [
        {"metric": metric, "mode": mode, "L": L, "seconds": medians[(metric, mode, L)]}
        for metric, mode, L in (k for k, _ in keyed)
    ]

    slopes = {}
    for metric, mode in {(r["metric"], r["mode"]) for r in rows}:
        sub = [r for r in rows if r["metric"] == metric and r["mode"] == mode]
        if len(sub) >= 2:
            Ls = np.log([r["L"] for r in sub])
            ts = np.log([r["seconds"] for r in sub])
            slopes[(metric, mode)] = float(np.polyfit(Ls, ts, 1)[0])
    return {"rows": rows, "slopes": slopes}


_BENCH_CHILD_SRC = """
import json, sys
from swalign.experiments import run_timing_bench

args = json.loads(sys.argv[1])
args["metrics"] = tuple(args["metrics"])
args["sizes"] = tuple(args["sizes"])
args["sinkhorn_sizes"] = tuple(args["sinkhorn_sizes"])
result = run_timing_bench(**args)
result["slopes"] = {f"{m}|{mode}": v for (m, mode), v in result["slopes"].items()}
print(json.dumps(result))
"""


def _run_timing_bench_isolated(sizes, trials, seed, metrics, sinkhorn_sizes, eps):
    import subprocess
    import sys

    payload = json.dumps(
        {
            "sizes": list(sizes),
            "trials": trials,
            "seed": seed,
            "metrics": list(metrics),
            "sinkhorn_sizes": list(sinkhorn_sizes),
            "eps": eps,
        }
    )
    proc = subprocess.run(
        [sys.executable, "-c", _BENCH_CHILD_SRC, payload],
        capture_output=True, text=True,
    )
    if proc.returncode != 0:
        raise RuntimeError(f"isolated bench failed: {proc.stderr.strip()}")
    result = json.loads(proc.stdout.splitlines()[-1])
    result["slopes"] = {
        tuple(key.split("|")): value for key, value in result["slopes"].items()
    }
    return result
