"""Tests for DFT analysis of rendered images."""

import numpy as np
import pytest

from gsdefend.core.errors import InvalidParameterError
from gsdefend.core.models import SpectralConfig
from gsdefend.scene.types import LUMA_WEIGHTS, ImageBuffer
from gsdefend.spectral.analysis import (
    BandMask,
    Spectrum,
    angular_bins,
    angular_histogram,
    antipodal,
    band_mask,
    bin_centers,
    dft2,
    frequency_offsets,
    normalize_amplitude,
    paired_bins,
    radial_energy_profile,
    spectrum_heatmap,
)


def _brute_force_dft(lum: np.ndarray) -> np.ndarray:
    """Centered unnormalized DFT by the double sum, indexed [v + H // 2, u + W // 2]."""
    height, width = lum.shape
    rows, cols = np.arange(height), np.arange(width)
    out = np.zeros((height, width), dtype=np.complex128)
    for v in range(-(height // 2), height - height // 2):
        for u in range(-(width // 2), width - width // 2):
            phase = np.exp(-2j * np.pi * (v * rows[:, None] / height + u * cols[None, :] / width))
            out[v + height // 2, u + width // 2] = np.sum(lum * phase)
    return out


def _full_mask(shape: tuple[int, int]) -> BandMask:
    mask = np.ones(shape, dtype=bool)
    mask[shape[0] // 2, shape[1] // 2] = False
    return BandMask(mask, 0.0, 1.0)


class TestDFT:
    """Tests for the centered luminance DFT."""

    def test_constant_image_is_dc_only(self):
        spec = dft2(ImageBuffer.filled(8, 8, 0.25))
        assert spec.coeffs[4, 4] == pytest.approx(64 * 0.25 * LUMA_WEIGHTS.sum(), abs=1e-9)
        off_center = spec.amplitude.copy()
        off_center[4, 4] = 0.0
        assert off_center.max() < 1e-9

    @pytest.mark.parametrize("seed", range(25))
    def test_matches_brute_force(self, seed):
        img = ImageBuffer(np.random.default_rng(seed).uniform(0, 1, (8, 8, 3)))
        np.testing.assert_allclose(dft2(img).coeffs, _brute_force_dft(img.luminance()), rtol=0, atol=1e-9)

    def test_odd_shape_matches_brute_force(self, rng):
        img = ImageBuffer(rng.uniform(0, 1, (7, 9, 3)))
        np.testing.assert_allclose(dft2(img).coeffs, _brute_force_dft(img.luminance()), rtol=0, atol=1e-9)

    def test_horizontal_cosine_has_two_bins(self):
        size, k = 16, 2
        wave = 0.5 + 0.5 * np.cos(2 * np.pi * k * np.arange(size) / size)
        img = ImageBuffer(np.broadcast_to(wave[None, :, None], (size, size, 3)).copy())
        amplitude = dft2(img).amplitude.copy()
        amplitude[8, 8] = 0.0
        nonzero = np.argwhere(amplitude > 1e-9)
        assert sorted(map(tuple, nonzero)) == [(8, 8 - k), (8, 8 + k)]
        assert amplitude[8, 8 + k] == pytest.approx(amplitude[8, 8 - k], abs=1e-9)

    def test_parseval(self, rng):
        img = ImageBuffer(rng.uniform(0, 1, (9, 12, 3)))
        lum = img.luminance()
        assert dft2(img).energy.sum() == pytest.approx(lum.size * np.sum(lum**2), rel=1e-12)

    def test_conjugate_symmetry(self, rng):
        coeffs = dft2(ImageBuffer(rng.uniform(0, 1, (9, 9, 3)))).coeffs
        np.testing.assert_allclose(coeffs[::-1, ::-1], np.conj(coeffs), rtol=0, atol=1e-9)

    def test_paired_bins_drop_the_nyquist_lines(self):
        paired = paired_bins((8, 9))
        assert not paired[0, :].any()
        assert paired[1:, :].all()
        np.testing.assert_array_equal(paired_bins((7, 9)), True)

    def test_antipodal_reflects_through_center(self):
        grid = np.zeros((8, 8))
        grid[2, 7] = 1.0
        reflected = antipodal(grid)
        assert reflected[6, 1] == 1.0
        assert reflected.sum() == 1.0
        np.testing.assert_array_equal(antipodal(np.ones((8, 8)))[0, :], 0.0)

    def test_offsets_measured_from_center(self):
        u, v = frequency_offsets((4, 5))
        assert (u[2, 2], v[2, 2]) == (0, 0)
        assert (u[0, 0], v[0, 0]) == (-2, -2)
        assert (u[3, 4], v[3, 4]) == (2, 1)


class TestNormalizeAmplitude:
    """Tests for log-amplitude normalization."""

    def test_single_peak_maps_to_one(self):
        coeffs = np.zeros((9, 9), dtype=np.complex128)
        coeffs[4, 4] = 100.0
        coeffs[4, 6] = 5.0
        norm = normalize_amplitude(Spectrum(coeffs))
        assert norm[4, 6] == 1.0
        assert norm[4, 4] == 0.0
        assert norm.sum() == 1.0

    def test_black_image(self):
        np.testing.assert_array_equal(normalize_amplitude(dft2(ImageBuffer.filled(6, 6, 0.0))), 0.0)

    @pytest.mark.parametrize("scale", [0.5, 2.0])
    def test_matches_direct_recomputation(self, rng, scale):
        pixels = rng.uniform(0, 1, (8, 8, 3)) * scale
        log_amp = np.log1p(np.abs(_brute_force_dft(pixels @ LUMA_WEIGHTS)))
        log_amp[4, 4] = 0.0
        log_amp[0, :] = 0.0
        log_amp[:, 0] = 0.0
        np.testing.assert_allclose(normalize_amplitude(dft2(ImageBuffer(pixels))), log_amp / log_amp.max(), atol=1e-9)

    def test_values_in_unit_interval(self, rng):
        norm = normalize_amplitude(dft2(ImageBuffer(rng.uniform(0, 1, (10, 10, 3)))))
        assert norm.min() >= 0.0
        assert norm.max() == pytest.approx(1.0)


class TestBandMask:
    """Tests for amplitude band selection."""

    def test_full_range_selects_paired_bins_but_dc(self, rng):
        norm = normalize_amplitude(dft2(ImageBuffer(rng.uniform(0, 1, (8, 8, 3)))))
        mask = band_mask(norm, SpectralConfig(gamma_min=0.0, gamma_max=1.0))
        assert mask.count == 48
        assert not mask.mask[0, :].any()
        assert not mask.mask[:, 0].any()
        assert not mask.mask[4, 4]

    def test_narrow_band_selects_peak(self):
        coeffs = np.full((9, 9), 1e-3, dtype=np.complex128)
        coeffs[2, 7] = 50.0
        coeffs[6, 1] = 50.0
        mask = band_mask(normalize_amplitude(Spectrum(coeffs)), SpectralConfig(gamma_min=0.99, gamma_max=1.0))
        assert mask.count == 2
        assert mask.mask[2, 7] and mask.mask[6, 1]

    def test_lone_bin_without_conjugate_is_dropped(self):
        coeffs = np.full((9, 9), 1e-3, dtype=np.complex128)
        coeffs[2, 7] = 50.0
        mask = band_mask(normalize_amplitude(Spectrum(coeffs)), SpectralConfig(gamma_min=0.99, gamma_max=1.0))
        assert mask.count == 0

    def test_count_matches_per_bin_check(self, rng):
        config = SpectralConfig()
        norm = normalize_amplitude(dft2(ImageBuffer(rng.uniform(0, 1, (12, 12, 3)))))
        expected = sum(
            1
            for y in range(12)
            for x in range(12)
            if (y, x) != (6, 6) and y > 0 and x > 0 and config.gamma_min <= norm[y, x] <= config.gamma_max
        )
        assert band_mask(norm, config).count == expected

    def test_min_radius_drops_low_frequencies(self, rng):
        norm = normalize_amplitude(dft2(ImageBuffer(rng.uniform(0, 1, (12, 12, 3)))))
        mask = band_mask(norm, SpectralConfig(gamma_min=0.0, gamma_max=1.0, min_radius=3.0))
        u, v = frequency_offsets((12, 12))
        assert not mask.mask[np.hypot(u, v) < 3.0].any()
        paired = (u > -6) & (v > -6)
        assert mask.mask[(np.hypot(u, v) >= 3.0) & paired].all()
        assert not mask.mask[~paired].any()


class TestAngularHistogram:
    """Tests for orientation binning of band energy."""

    def test_axis_sectors(self):
        sectors = angular_bins((9, 9), 36)
        assert sectors[4, 5] == 0
        assert sectors[5, 4] == 9
        assert sectors[4, 3] == 18
        assert sectors[3, 4] == 27

    def test_bin_centers(self):
        np.testing.assert_allclose(bin_centers(4), [np.pi / 4, 3 * np.pi / 4, 5 * np.pi / 4, 7 * np.pi / 4])

    def test_positive_u_axis_is_one_hot(self):
        coeffs = np.zeros((9, 9), dtype=np.complex128)
        coeffs[4, 7] = 2.0
        hist = angular_histogram(Spectrum(coeffs), _full_mask((9, 9)), 36)
        expected = np.zeros(36)
        expected[0] = 1.0
        np.testing.assert_array_equal(hist.probabilities, expected)
        assert hist.total == 4.0

    def test_probabilities_sum_to_one(self, rng):
        spec = dft2(ImageBuffer(rng.uniform(0, 1, (10, 10, 3))))
        hist = angular_histogram(spec, band_mask(normalize_amplitude(spec), SpectralConfig()), 36)
        assert hist.probabilities.sum() == pytest.approx(1.0, abs=1e-9)
        assert (hist.energies >= 0).all()

    def test_antipodal_bins_carry_equal_energy(self, rng):
        spec = dft2(ImageBuffer(rng.uniform(0, 1, (15, 15, 3))))
        hist = angular_histogram(spec, _full_mask((15, 15)), 36)
        np.testing.assert_allclose(hist.energies, np.roll(hist.energies, 18), rtol=1e-9)

    @pytest.mark.parametrize("size", [16, 64])
    @pytest.mark.parametrize("gamma", [(0.0, 1.0), (0.3, 0.9)])
    def test_antipodal_bins_carry_equal_energy_on_even_grids(self, size, gamma):
        spec = dft2(ImageBuffer(np.random.default_rng(size).uniform(0, 1, (size, size, 3))))
        config = SpectralConfig(gamma_min=gamma[0], gamma_max=gamma[1])
        hist = angular_histogram(spec, band_mask(normalize_amplitude(spec), config), 36)
        np.testing.assert_allclose(hist.energies, np.roll(hist.energies, 18), rtol=1e-9)

    def test_uniform_ring_is_nearly_flat(self):
        bins = 36
        u, v = frequency_offsets((49, 49))
        ring = np.abs(np.hypot(u, v) - 20.0) < 0.5
        hist = angular_histogram(Spectrum(ring.astype(np.complex128)), BandMask(ring, 0.0, 1.0), bins)

        counts = np.bincount(angular_bins((49, 49), bins)[ring], minlength=bins)
        np.testing.assert_array_equal(hist.energies, counts)
        assert hist.probabilities.max() - hist.probabilities.min() < 2 / bins

    def test_empty_mask(self, rng):
        spec = dft2(ImageBuffer(rng.uniform(0, 1, (8, 8, 3))))
        hist = angular_histogram(spec, BandMask(np.zeros((8, 8), dtype=bool), 0.3, 0.9), 36)
        assert hist.empty
        np.testing.assert_array_equal(hist.probabilities, 0.0)

    def test_too_few_bins(self, rng):
        spec = dft2(ImageBuffer(rng.uniform(0, 1, (8, 8, 3))))
        with pytest.raises(InvalidParameterError):
            angular_histogram(spec, _full_mask((8, 8)), 1)


class TestDiagnostics:
    """Tests for radial profiles and spectrum heatmaps."""

    def test_dc_only_profile_is_zero(self):
        profile = radial_energy_profile(dft2(ImageBuffer.filled(16, 16, 0.6)), 4)
        assert [radius for radius, _ in profile] == [1.0, 3.0, 5.0, 7.0]
        assert all(energy == pytest.approx(0.0, abs=1e-12) for _, energy in profile)

    def test_white_noise_profile_is_flat(self):
        img = ImageBuffer(np.random.default_rng(11).uniform(0, 1, (64, 64, 3)))
        energies = np.array([energy for _, energy in radial_energy_profile(dft2(img), 4)])
        assert np.abs(energies / energies.mean() - 1.0).max() < 0.5

    def test_ring_assignment_matches_per_bin_loop(self, rng):
        spec = dft2(ImageBuffer(rng.uniform(0, 1, (10, 12, 3))))
        n_rings, nyquist = 3, 5.0
        sums, counts = np.zeros(n_rings), np.zeros(n_rings)
        for y in range(10):
            for x in range(12):
                radius = np.hypot(x - 6, y - 5)
                if 0 < radius <= nyquist:
                    k = min(int(radius / (nyquist / n_rings)), n_rings - 1)
                    sums[k] += spec.energy[y, x]
                    counts[k] += 1
        expected = sums / counts
        np.testing.assert_allclose([e for _, e in radial_energy_profile(spec, n_rings)], expected, rtol=1e-12)

    def test_too_few_rings(self):
        with pytest.raises(InvalidParameterError):
            radial_energy_profile(dft2(ImageBuffer.filled(8, 8, 0.0)), 1)

    def test_heatmap(self, rng):
        heatmap = spectrum_heatmap(dft2(ImageBuffer(rng.uniform(0, 1, (8, 10, 3)))))
        assert heatmap.shape == (8, 10)
        assert heatmap.pixels.max() == 1.0
        np.testing.assert_array_equal(heatmap.pixels[..., 0], heatmap.pixels[..., 2])
        assert heatmap.pixels[4, 5, 0] == 1.0
