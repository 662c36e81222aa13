"""Acceptance suite: one test per primary criterion, at the stated tolerances.

Each test prints a single PASS/FAIL line (visible with ``pytest -s`` or on
failure).  The two MNIST-dependent criteria skip unless SWALIGN_MNIST_DIR
points at the t10k IDX files.
"""

import time

import numpy as np
import pytest

from conftest import mnist_paths, needs_mnist
from swalign.align import (
    brute_rotation_profile,
    rotation_profile_euclidean,
    rotation_profile_rfsw2,
    rotation_profile_sw2,
)
from swalign.errors import SwalignError
from swalign.experiments import (
    ExperimentConfig,
    convergence_study,
    load_mnist,
    run_alignment_experiment,
    run_noise_experiment,
    run_timing_bench,
)
from swalign.image import (
    Image,
    Shift2D,
    apply_rotation,
    apply_shift,
    gaussian_blob,
    normalize_to_probability,
)
from swalign.metrics import (
    MetricKind,
    exact_w2_squared_lp,
    rfsw2_squared,
    sw2_squared,
)
from swalign.nufft import NufftConfig
from swalign.polar import build_polar_grid, nudft_polar_slices, nufft_polar_slices
from swalign.tomo import Volume, viewing_sweep

SW2_SHIFT_CONSTANT = 2.0**-0.5  # Gamma(3/2) / (sqrt(pi) Gamma(2)), sqrt
VIEWING_BOUND_CONSTANT = np.sqrt(1.0 - 4.0 / (3.0 * np.pi))  # ~0.75868


def report(name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {name}: {status} {detail}")
    assert ok, f"{name}: {detail}"


class TestTranslationLaw:
    def test_translation_law(self):
        start = time.perf_counter()
        L = 85
        sigma = 0.035
        f = gaussian_blob(L, Shift2D(0.0, 0.0), sigma)
        worst_sw = 0.0
        worst_rf = 0.0
        for k in range(1, 21):
            s = Shift2D.from_pixels(k, 0, L)
            g = normalize_to_probability(apply_shift(f, s, "integer"))
            r_sw = np.sqrt(sw2_squared(f, g, L)) / s.magnitude
            r_rf = np.sqrt(rfsw2_squared(f, g, L)) / s.magnitude
            if k >= 3:
                worst_sw = max(worst_sw, abs(r_sw / SW2_SHIFT_CONSTANT - 1.0))
                worst_rf = max(worst_rf, abs(r_rf - 1.0))
        elapsed = time.perf_counter() - start
        report(
            "translation-law",
            worst_sw <= 0.05 and worst_rf <= 0.07 and elapsed < 10.0,
            f"(sw2 dev {worst_sw:.3f} <= 0.05, rfsw2 dev {worst_rf:.3f} <= 0.07, "
            f"{elapsed:.1f}s < 10s)",
        )


class TestRotationRecovery:
    def test_rotation_recovery(self):
        start = time.perf_counter()
        L, n = 85, 180
        f = gaussian_blob(L, Shift2D.from_pixels(2, 0, L), 0.09)
        shifted = apply_shift(f, Shift2D.from_pixels(20, 0, L), "integer")
        g = normalize_to_probability(
            apply_rotation(Image(shifted.data), np.pi), clamp_all=True
        )
        p_sw = rotation_profile_sw2(f, g, n)
        p_rf = rotation_profile_rfsw2(f, g, n)
        p_eu = rotation_profile_euclidean(f, g, n, variant="exact")
        step = 360.0 / n
        err_sw = abs(np.degrees(p_sw.best_angle) - 180.0)
        err_rf = abs(np.degrees(p_rf.best_angle) - 180.0)
        flat = (p_eu.values.max() - p_eu.values.min()) / p_eu.values.max()
        elapsed = time.perf_counter() - start
        report(
            "rotation-recovery",
            err_sw <= step and err_rf <= step and flat < 0.01 and elapsed < 10.0,
            f"(sw2 at {180 + err_sw:.1f} or {180 - err_sw:.1f} deg, rfsw2 within "
            f"{err_rf:.1f} deg, euclid variation {flat * 100:.2f}% < 1%, "
            f"{elapsed:.1f}s < 10s)",
        )


def _acceptance_mixture(seed):
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-0.4, 0.4, size=(3, 3))
    sigmas = rng.uniform(0.06, 0.11, size=3)
    radii = np.linalg.norm(centers, axis=1)
    scale = np.minimum(1.0, (0.9 - 3 * sigmas) / np.maximum(radii, 1e-9))
    weights = rng.uniform(0.5, 1.5, size=3)
    return Volume.mixture(
        centers * scale[:, None], weights / weights.sum(), sigmas
    )


class TestViewingAngleBound:
    def test_viewing_angle_bound(self):
        start = time.perf_counter()
        worst_slack = -np.inf
        for seed in range(5):
            vol = _acceptance_mixture(100 + seed)
            rows = viewing_sweep(
                vol, "x", np.radians(45.0), 46, 96, metrics=("sw2",)
            )
            for row in rows:
                theta = np.radians(row["theta_deg"])
                slack = row["value_sqrt"] - (VIEWING_BOUND_CONSTANT * theta + 0.05)
                worst_slack = max(worst_slack, slack)
        elapsed = time.perf_counter() - start
        report(
            "viewing-angle-bound",
            worst_slack <= 0.0 and elapsed < 120.0,
            f"(max excess over 0.75868*theta+0.05: {worst_slack:.4f} <= 0, "
            f"{elapsed:.1f}s < 120s)",
        )


class TestEstimatorConvergence:
    def test_theorem_convergence(self):
        start = time.perf_counter()
        result = convergence_study(
            sizes=((64, 64), (128, 128), (256, 256)),
            ref_L=512, ref_n=1024, ref_eps=1e-12, eps=1e-12,
        )
        errs = [row["error"] for row in result["rows"]]
        monotone = all(b < a for a, b in zip(errs, errs[1:]))
        elapsed = time.perf_counter() - start
        report(
            "estimator-convergence",
            monotone and result["slope"] >= 0.45 and elapsed < 300.0,
            f"(errors {['%.2e' % e for e in errs]} decreasing={monotone}, "
            f"slope {result['slope']:.2f} >= 0.45, {elapsed:.1f}s < 300s)",
        )


class TestOracleEquivalences:
    def test_oracle_equivalences(self):
        start = time.perf_counter()
        # (a) NUFFT against direct summation on 100 random 32x32 images
        cfg = NufftConfig(eps=1e-6)
        grid = build_polar_grid(32, 32)
        rng = np.random.default_rng(7)
        worst_nufft = 0.0
        for _ in range(100):
            img = Image(rng.random((32, 32)))
            fast = nufft_polar_slices(img, grid, cfg)
            exact = nudft_polar_slices(img, grid)
            rel = np.linalg.norm(fast - exact, axis=0) / np.linalg.norm(exact, axis=0)
            worst_nufft = max(worst_nufft, rel.max())

        # (b) fast rotation profiles against brute column shifts, 20 pairs
        worst_prof = 0.0
        for trial in range(20):
            F = normalize_to_probability(Image(rng.random((64, 64))))
            G = normalize_to_probability(Image(rng.random((64, 64))))
            fast_sw = rotation_profile_sw2(F, G, 64).values
            brute_sw = brute_rotation_profile(F, G, MetricKind.SW2, 64).values
            worst_prof = max(
                worst_prof, np.abs(fast_sw - brute_sw).max() / np.abs(brute_sw).max()
            )
            fast_rf = rotation_profile_rfsw2(F, G, 64).values
            brute_rf = brute_rotation_profile(F, G, MetricKind.RFSW2, 64).values
            worst_prof = max(
                worst_prof, np.abs(fast_rf - brute_rf).max() / np.abs(brute_rf).max()
            )

        # (c) sliced below full Wasserstein on 10 smooth 12x12 pairs
        dominated = True
        for trial in range(10):
            F = normalize_to_probability(Image(
                gaussian_blob(12, Shift2D(*rng.uniform(-0.3, 0.3, 2)),
                              rng.uniform(0.2, 0.4)).data + 0.2 / 144))
            G = normalize_to_probability(Image(
                gaussian_blob(12, Shift2D(*rng.uniform(-0.3, 0.3, 2)),
                              rng.uniform(0.2, 0.4)).data + 0.2 / 144))
            if sw2_squared(F, G, 64) > 1.05 * exact_w2_squared_lp(F, G):
                dominated = False
        elapsed = time.perf_counter() - start
        report(
            "oracle-equivalences",
            worst_nufft <= cfg.eps and worst_prof <= 1e-10 and dominated
            and elapsed < 180.0,
            f"(nufft rel {worst_nufft:.2e} <= {cfg.eps}, profile rel "
            f"{worst_prof:.2e} <= 1e-10, sliced<=1.05*W2 {dominated}, "
            f"{elapsed:.1f}s < 180s)",
        )


class TestComplexityScaling:
    def test_complexity_scaling(self):
        start = time.perf_counter()
        result = run_timing_bench(
            sizes=(32, 64, 96, 128), trials=5,
            metrics=("sw2", "rfsw2", "sinkhorn"), sinkhorn_sizes=(32, 64),
            isolate=True,
        )
        slopes = result["slopes"]
        sw = slopes[("sw2", "profile")]
        rf = slopes[("rfsw2", "profile")]
        sk = slopes[("sinkhorn", "single")]
        # the full rotation profile adds only row FFTs on top of the single
        # distance, so it must stay within 2x at every size
        seconds = {(r["metric"], r["mode"], r["L"]): r["seconds"]
                   for r in result["rows"]}
        profile_cheap = all(
            seconds[("sw2", "profile", L)] <= 2.0 * seconds[("sw2", "single", L)]
            for L in (32, 64, 96, 128)
        )
        elapsed = time.perf_counter() - start
        report(
            "complexity-scaling",
            1.8 <= sw <= 2.6 and 1.8 <= rf <= 2.6 and sk >= 3.5
            and profile_cheap and elapsed < 600.0,
            f"(sw2 {sw:.2f}, rfsw2 {rf:.2f} in [1.8, 2.6]; sinkhorn {sk:.2f} >= 3.5; "
            f"profile <= 2x single: {profile_cheap}; {elapsed:.1f}s < 600s)",
        )


@needs_mnist
class TestMnistAlignment:
    def test_mnist_alignment(self):
        start = time.perf_counter()
        images_path, labels_path = mnist_paths()
        cfg = ExperimentConfig(digit=2, shifts_px=(0, 2, 4, 6), seed=0, threads=4)
        report_data = run_alignment_experiment(
            cfg, images_path=images_path, labels_path=labels_path
        )
        rf0 = report_data.percent_within("rfsw2", 15, shift_px=0)
        eu4 = report_data.percent_within("euclidean", 15, shift_px=4)
        ordering = all(
            report_data.percent_within("rfsw2", 15, shift_px=s)
            > report_data.percent_within("euclidean", 15, shift_px=s)
            for s in (2, 4, 6)
        )
        elapsed = time.perf_counter() - start
        report(
            "mnist-alignment",
            abs(rf0 - 73.3) <= 6.0 and abs(eu4 - 8.6) <= 5.0 and ordering
            and elapsed < 300.0,
            f"(rfsw2@shift0 {rf0:.1f} vs 73.3+-6, euclid@shift4 {eu4:.1f} vs "
            f"8.6+-5, rfsw2>euclid at 2/4/6 px: {ordering}, {elapsed:.0f}s < 300s)",
        )


@needs_mnist
class TestNoiseStudy:
    def test_noise_study(self):
        start = time.perf_counter()
        images_path, labels_path = mnist_paths()
        cfg = ExperimentConfig(digit=2, snrs=(10.0, 0.1), seed=0, threads=4)
        report_data = run_noise_experiment(
            cfg, images_path=images_path, labels_path=labels_path, shifts_px=(0, 3)
        )
        rf = report_data.percent_within("rfsw2", 15, shift_px=3, snr=10.0)
        eu = report_data.percent_within("euclidean", 15, shift_px=3, snr=10.0)
        eu_high_noise = report_data.percent_within("euclidean", 15, shift_px=0, snr=0.1)
        transport_high_noise = max(
            report_data.percent_within(m, 15, shift_px=0, snr=0.1)
            for m in ("sw2", "rfsw2")
        )
        elapsed = time.perf_counter() - start
        report(
            "noise-study",
            rf - eu >= 10.0 and eu_high_noise > transport_high_noise
            and elapsed < 600.0,
            f"(rfsw2-euclid at snr10/shift3: {rf - eu:.1f} >= 10; euclid "
            f"{eu_high_noise:.1f} > transport {transport_high_noise:.1f} at "
            f"snr0.1/shift0; {elapsed:.0f}s < 600s)",
        )
