import numpy as np
import pytest

from conftest import two_blob_image
from swalign.errors import TooLargeError, UnsupportedMetricError
from swalign.align import (
    align,
    brute_rotation_profile,
    rotation_profile_euclidean,
    rotation_profile_rfsw2,
    rotation_profile_sw2,
    RotationProfile,
)
from swalign.image import (
    Image,
    Shift2D,
    apply_rotation,
    apply_shift,
    gaussian_blob,
    normalize_to_probability,
)
from swalign.metrics import MetricKind, MetricParams, sw2_squared


def planted_pair(L, n, l0, seed):
    F = two_blob_image(L, seed=seed)
    G = normalize_to_probability(
        apply_rotation(F, 2.0 * np.pi * l0 / n), clamp_all=True
    )
    return F, G


class TestFastProfiles:
    def test_self_profile_min_at_zero(self):
        F = two_blob_image(32, seed=50)
        for prof in (
            rotation_profile_sw2(F, F, 32),
            rotation_profile_rfsw2(F, F, 32),
            rotation_profile_euclidean(F, F, 32),
        ):
            assert prof.argmin_index == 0
            assert prof.best_value <= 1e-12

    @pytest.mark.parametrize("l0", [3, 9, 20])
    def test_planted_grid_rotation_recovered(self, l0):
        F, G = planted_pair(64, 64, l0, seed=51)
        assert rotation_profile_sw2(F, G, 64).argmin_index == l0
        assert rotation_profile_rfsw2(F, G, 64).argmin_index == l0
        assert rotation_profile_euclidean(F, G, 64).argmin_index == l0

    def test_profile_entry_matches_direct_distance(self):
        n = 32
        F, G = planted_pair(64, n, 7, seed=52)
        prof = rotation_profile_sw2(F, G, n)
        l = 11
        undone = normalize_to_probability(
            apply_rotation(G, -2.0 * np.pi * l / n), clamp_all=True
        )
        direct = sw2_squared(F, undone, n)
        assert prof.values[l] == pytest.approx(direct, rel=2e-2)

    def test_profile_symmetry_under_argument_swap(self):
        F = two_blob_image(48, seed=53)
        G = two_blob_image(48, seed=54)
        n = 48
        p_fg = rotation_profile_sw2(F, G, n).values
        p_gf = rotation_profile_sw2(G, F, n).values
        swapped = p_gf[(-np.arange(n)) % n]
        assert np.abs(p_fg - swapped).max() <= 1e-10 * max(p_fg.max(), 1e-30)

    def test_argmin_rotation_equivariance(self):
        n = 64
        F, G = planted_pair(64, n, 5, seed=55)
        base = rotation_profile_sw2(F, G, n).argmin_index
        l = 12
        G2 = normalize_to_probability(
            apply_rotation(G, 2.0 * np.pi * l / n), clamp_all=True
        )
        shifted = rotation_profile_sw2(F, G2, n).argmin_index
        diff = (shifted - base - l) % n
        assert min(diff, n - diff) <= 1


class TestBruteEquivalence:
    def test_sw2_fast_equals_brute(self):
        F = two_blob_image(64, seed=56)
        G = two_blob_image(64, seed=57)
        fast = rotation_profile_sw2(F, G, 64).values
        brute = brute_rotation_profile(F, G, MetricKind.SW2, 64).values
        rel = np.abs(fast - brute) / np.abs(brute).max()
        assert rel.max() <= 1e-10

    def test_rfsw2_fast_equals_brute(self):
        F = two_blob_image(64, seed=58)
        G = two_blob_image(64, seed=59)
        fast = rotation_profile_rfsw2(F, G, 64).values
        brute = brute_rotation_profile(F, G, MetricKind.RFSW2, 64).values
        rel = np.abs(fast - brute) / np.abs(brute).max()
        assert rel.max() <= 1e-10

    def test_maxsw2_brute_matches_align_path(self):
        F, G = planted_pair(32, 32, 6, seed=60)
        res = align(F, G, MetricKind.MAXSW2, 32)
        brute = brute_rotation_profile(F, G, MetricKind.MAXSW2, 32)
        assert np.abs(res.profile.values - brute.values).max() <= 1e-12
        assert res.profile.argmin_index == 6

    def test_sinkhorn_brute_profile_recovers_rotation(self):
        n = 16
        F, G = planted_pair(16, n, 4, seed=61)
        prof = brute_rotation_profile(
            F, G, MetricKind.SINKHORN, n, MetricParams(lam=0.01, iters=5)
        )
        diff = abs(prof.argmin_index - 4) % n
        assert min(diff, n - diff) <= 1

    def test_brute_guard(self):
        F = two_blob_image(16, seed=62)
        with pytest.raises(TooLargeError):
            brute_rotation_profile(F, F, MetricKind.SW2, 600)


class TestAlign:
    def test_self_alignment_all_fast_metrics(self):
        F = two_blob_image(32, seed=63)
        for kind in (MetricKind.SW2, MetricKind.RFSW2, MetricKind.EUCLIDEAN,
                     MetricKind.MAXSW2):
            res = align(F, F, kind, 32)
            assert res.angle == 0.0
            assert res.value <= 1e-12

    def test_unsupported_metric(self):
        F = two_blob_image(16, seed=64)
        with pytest.raises(UnsupportedMetricError):
            align(F, F, MetricKind.SINKHORN, 16)

    def test_recovery_rate_on_stroke_corpus(self, stroke_corpus):
        n = 39
        hits = 0
        rng = np.random.default_rng(65)
        for img in stroke_corpus:
            l0 = int(rng.integers(0, n))
            target = normalize_to_probability(
                apply_rotation(img, 2.0 * np.pi * l0 / n), clamp_all=True
            )
            res = align(img, target, MetricKind.SW2, n)
            diff = abs(res.profile.argmin_index - l0) % n
            hits += min(diff, n - diff) <= 1
        assert hits >= 0.99 * len(stroke_corpus)

    def test_wall_time_recorded(self):
        F = two_blob_image(32, seed=66)
        res = align(F, F, MetricKind.SW2, 32)
        assert res.wall_time_s > 0


class TestEuclideanVariants:
    def test_exact_recovers_rotation_and_sino_correlates(self):
        n = 48
        F, G = planted_pair(48, n, 10, seed=67)
        exact = rotation_profile_euclidean(F, G, n, variant="exact")
        sino = rotation_profile_euclidean(F, G, n, variant="sino")
        assert exact.argmin_index == 10
        assert sino.argmin_index == 10

    def test_disjoint_blobs_exact_profile_flat(self):
        L = 85
        f = gaussian_blob(L, Shift2D.from_pixels(2, 0, L), 0.09)
        g = normalize_to_probability(
            apply_rotation(
                Image(apply_shift(f, Shift2D.from_pixels(20, 0, L), "integer").data),
                np.pi,
            ),
            clamp_all=True,
        )
        prof = rotation_profile_euclidean(f, g, 90, variant="exact")
        assert (prof.values.max() - prof.values.min()) / prof.values.max() < 0.01


class TestRotationProfileType:
    def test_tiny_negative_clamped(self):
        prof = RotationProfile(np.array([1e-12, -1e-10, 0.5]))
        assert prof.values[1] == 0.0

    def test_large_negative_rejected(self):
        from swalign.errors import NumericalError

        with pytest.raises(NumericalError):
            RotationProfile(np.array([0.1, -1e-3]))

    def test_argmin_tie_breaks_to_smallest(self):
        prof = RotationProfile(np.array([0.5, 0.2, 0.2, 0.9]))
        assert prof.argmin_index == 1
