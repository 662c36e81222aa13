import numpy as np
import pytest

from conftest import two_blob_image
from swalign.errors import LengthMismatchError, NotNormalizedError
from swalign.image import Image, Shift2D, gaussian_blob
from swalign.polar import sinogram
from swalign.quantiles import (
    cdf_to_icdf,
    pdf_to_cdf,
    sinogram_quantiles,
    w2_squared_1d,
)


class TestPdfToCdf:
    def test_uniform(self):
        L = 16
        cdf = pdf_to_cdf(np.full(L, 1.0 / L))
        assert np.allclose(cdf.values, (np.arange(L) + 1) / L)

    def test_spike_at_origin_bin(self):
        d = np.zeros(8)
        d[0] = 1.0
        assert np.array_equal(pdf_to_cdf(d).values, np.ones(8))

    def test_hand_computed(self):
        cdf = pdf_to_cdf(np.array([0.2, 0.3, 0.5]))
        assert np.allclose(cdf.values, [0.2, 0.5, 1.0])

    def test_rejects_unnormalized(self):
        with pytest.raises(NotNormalizedError):
            pdf_to_cdf(np.array([0.2, 0.2]))

    def test_rejects_negative(self):
        with pytest.raises(NotNormalizedError):
            pdf_to_cdf(np.array([1.2, -0.2]))


class TestIcdf:
    def test_uniform_is_linear(self):
        L = 16
        q = cdf_to_icdf(pdf_to_cdf(np.full(L, 1.0 / L))).values
        z = np.arange(L) / L
        assert np.abs(q - (-1.0 + 2.0 * z)).max() <= 2.0 / L

    def test_spike_maps_to_its_bin(self):
        L, b = 16, 5
        d = np.zeros(L)
        d[b] = 1.0
        q = cdf_to_icdf(pdf_to_cdf(d)).values
        t_b = -1.0 + (b + 0.5) * 2.0 / L
        assert np.abs(q - t_b).max() <= 1.0 / L + 1e-15

    def test_flat_region_resolves_left(self):
        # density [0.5, 0, 0, 0.5] on 4 bins: level 1/2 is attained on the
        # flat stretch starting at the right edge of bin 0 (= -0.5)
        q = cdf_to_icdf(pdf_to_cdf(np.array([0.5, 0.0, 0.0, 0.5]))).values
        assert q[2] == pytest.approx(-0.5, abs=1e-15)  # z_2 = 1/2

    def test_leading_zeros_anchor_first_mass_bin(self):
        d = np.zeros(8)
        d[3:5] = 0.5
        q = cdf_to_icdf(pdf_to_cdf(d)).values
        # z=0 maps to the left edge of bin 3
        assert q[0] == pytest.approx(-1.0 + 3 * 0.25, abs=1e-15)

    def test_monotone(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            d = rng.random(32)
            d[rng.random(32) < 0.3] = 0.0
            if d.sum() == 0:
                continue
            d /= d.sum()
            q = cdf_to_icdf(pdf_to_cdf(d)).values
            assert np.all(np.diff(q) >= -1e-15)

    def test_round_trip_for_positive_density(self):
        rng = np.random.default_rng(1)
        L = 64
        d = rng.random(L) + 0.1
        d /= d.sum()
        cdf = pdf_to_cdf(d)
        q = cdf_to_icdf(cdf).values
        h = 2.0 / L
        # CDF evaluated at the quantile positions recovers the levels
        edges = -1.0 + np.arange(L + 1) * h
        cum = np.concatenate([[0.0], cdf.values])
        frac = np.interp(q, edges, cum)
        z = np.arange(L) / L
        assert np.abs(frac - z).max() <= h

    def test_integer_shift_equivariance(self):
        rng = np.random.default_rng(2)
        L, k = 32, 4
        d = np.zeros(L)
        d[8:20] = rng.random(12) + 0.05
        d /= d.sum()
        shifted = np.roll(d, k)
        q0 = cdf_to_icdf(pdf_to_cdf(d)).values
        q1 = cdf_to_icdf(pdf_to_cdf(shifted)).values
        assert np.abs(q1 - (q0 + k * 2.0 / L)).max() < 1e-12


class TestW2Squared1d:
    def test_identity(self):
        u = cdf_to_icdf(pdf_to_cdf(np.full(8, 0.125)))
        assert w2_squared_1d(u, u) == 0.0

    def test_point_masses(self):
        L = 32
        a, b = 4, 20
        da = np.zeros(L)
        da[a] = 1.0
        db = np.zeros(L)
        db[b] = 1.0
        qa = cdf_to_icdf(pdf_to_cdf(da))
        qb = cdf_to_icdf(pdf_to_cdf(db))
        dist = (b - a) * 2.0 / L
        assert abs(w2_squared_1d(qa, qb) - dist**2) <= (2 * 2.0 / L) ** 2

    def test_shifted_uniform_blocks(self):
        L, k = 64, 4
        d1 = np.zeros(L)
        d1[8:24] = 1.0 / 16
        d2 = np.roll(d1, k)
        q1 = cdf_to_icdf(pdf_to_cdf(d1))
        q2 = cdf_to_icdf(pdf_to_cdf(d2))
        delta = k * 2.0 / L
        assert abs(w2_squared_1d(q1, q2) - delta**2) <= 2 * (2.0 / L) * delta

    def test_symmetry_and_nonnegativity(self):
        rng = np.random.default_rng(3)
        d1 = rng.random(16)
        d1 /= d1.sum()
        d2 = rng.random(16)
        d2 /= d2.sum()
        q1 = cdf_to_icdf(pdf_to_cdf(d1))
        q2 = cdf_to_icdf(pdf_to_cdf(d2))
        assert w2_squared_1d(q1, q2) == w2_squared_1d(q2, q1)
        assert w2_squared_1d(q1, q2) > 0

    def test_length_mismatch(self):
        u = cdf_to_icdf(pdf_to_cdf(np.full(8, 0.125)))
        v = cdf_to_icdf(pdf_to_cdf(np.full(16, 1.0 / 16)))
        with pytest.raises(LengthMismatchError):
            w2_squared_1d(u, v)


class TestSinogramQuantiles:
    def test_centered_blob_columns_identical(self):
        blob = gaussian_blob(64, Shift2D(0.0, 0.0), 0.15)
        Q = sinogram_quantiles(sinogram(blob, 16))
        assert np.abs(Q.values - Q.values[:, :1]).max() < 1e-8

    def test_center_delta_central_quantiles_near_zero(self):
        L = 32
        data = np.zeros((L, L))
        data[L // 2, L // 2] = 1.0
        Q = sinogram_quantiles(sinogram(Image(data, probability=True), 8))
        # the band-limited spike rings, so extreme quantile levels land on
        # clamped sidelobes; the bulk of the mass stays at the center
        central = Q.values[L // 4 : 3 * L // 4, :]
        assert np.abs(central).max() <= 2 * 2.0 / L

    def test_columns_monotone(self):
        img = two_blob_image(48, seed=12)
        Q = sinogram_quantiles(sinogram(img, 24))
        assert np.all(np.diff(Q.values, axis=0) >= -1e-15)
