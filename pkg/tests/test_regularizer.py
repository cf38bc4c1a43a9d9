"""Tests for the angular-entropy anisotropy loss and the view-aggregated regularizer."""

import numpy as np
import pytest

from gsdefend.core.errors import InvalidParameterError
from gsdefend.core.models import SpectralConfig
from gsdefend.scene.types import ImageBuffer
from gsdefend.spectral.analysis import AngularHistogram, band_mask, dft2, normalize_amplitude
from gsdefend.spectral.regularizer import (
    anisotropy_from_histogram,
    anisotropy_loss,
    freq_regularizer,
    histogram_entropy,
    mean_anisotropy,
)
from tests.helpers import assert_gradient_matches, central_difference


def _histogram(energies) -> AngularHistogram:
    return AngularHistogram(energies=np.asarray(energies, dtype=np.float64), empty=False)


def _fixed_mask(img: ImageBuffer, config: SpectralConfig):
    return band_mask(normalize_amplitude(dft2(img)), config)


class TestEntropy:
    """Closed-form entropy cases."""

    def test_uniform_distribution_has_zero_loss(self):
        hist = _histogram(np.ones(36))
        assert histogram_entropy(hist) == pytest.approx(np.log(36), abs=1e-12)
        assert anisotropy_from_histogram(hist) == pytest.approx(0.0, abs=1e-12)

    def test_one_hot_has_unit_loss(self):
        energies = np.zeros(36)
        energies[7] = 3.0
        assert histogram_entropy(_histogram(energies)) == 0.0
        assert anisotropy_from_histogram(_histogram(energies)) == 1.0

    def test_two_of_four_bins(self):
        assert anisotropy_from_histogram(_histogram([2.0, 2.0, 0.0, 0.0])) == pytest.approx(0.5, abs=1e-12)

    def test_empty_histogram(self):
        hist = AngularHistogram(energies=np.zeros(36), empty=True)
        assert histogram_entropy(hist) == 0.0
        assert anisotropy_from_histogram(hist) == 0.0


class TestAnisotropyLoss:
    """Tests for the per-image loss and its gradient."""

    def test_range(self, rng):
        config = SpectralConfig()
        for _ in range(10):
            loss, grad = anisotropy_loss(ImageBuffer(rng.uniform(0, 1, (12, 12, 3))), config)
            assert 0.0 <= loss <= 1.0
            assert np.isfinite(grad).all()

    def test_constant_image_gives_zero(self):
        loss, grad = anisotropy_loss(ImageBuffer.filled(8, 8, 0.5), SpectralConfig())
        assert loss == 0.0
        np.testing.assert_array_equal(grad, 0.0)

    def test_stripes_are_anisotropic(self, rng):
        stripes = 0.5 + 0.4 * np.sign(np.sin(2 * np.pi * 3 * np.arange(16) / 16 + 0.1))
        striped = ImageBuffer(np.broadcast_to(stripes[None, :, None], (16, 16, 3)).copy())
        noise = ImageBuffer(rng.uniform(0, 1, (16, 16, 3)))
        config = SpectralConfig(gamma_min=0.0, gamma_max=1.0)
        assert anisotropy_loss(striped, config)[0] > anisotropy_loss(noise, config)[0]

    @pytest.mark.parametrize("size", [15, 16, 64])
    @pytest.mark.parametrize("seed", range(5))
    def test_rotation_by_quarter_turn(self, seed, size):
        img = ImageBuffer(np.random.default_rng(seed).uniform(0, 1, (size, size, 3)))
        rotated = ImageBuffer(np.rot90(img.pixels).copy())
        config = SpectralConfig()
        assert anisotropy_loss(rotated, config)[0] == pytest.approx(anisotropy_loss(img, config)[0], abs=1e-6)

    @pytest.mark.parametrize("scale", [0.1, 3.0])
    def test_intensity_scale_with_fixed_mask(self, rng, scale):
        img = ImageBuffer(rng.uniform(0, 1, (12, 12, 3)))
        config = SpectralConfig()
        mask = _fixed_mask(img, config)
        scaled = ImageBuffer(img.pixels * scale)
        assert anisotropy_loss(scaled, config, mask)[0] == pytest.approx(anisotropy_loss(img, config, mask)[0], abs=1e-12)

    def test_empty_mask_gives_zero(self, rng):
        img = ImageBuffer(rng.uniform(0, 1, (8, 8, 3)))
        config = SpectralConfig()
        mask = _fixed_mask(img, config)
        mask.mask[:] = False
        loss, grad = anisotropy_loss(img, config, mask)
        assert loss == 0.0
        np.testing.assert_array_equal(grad, 0.0)

    @pytest.mark.parametrize("seed", range(20))
    def test_gradient_matches_central_differences(self, seed):
        img = ImageBuffer(np.random.default_rng(seed).uniform(0, 1, (16, 16, 3)))
        config = SpectralConfig(bins=8)
        mask = _fixed_mask(img, config)
        _, analytic = anisotropy_loss(img, config, mask)
        numeric = central_difference(lambda x: anisotropy_loss(ImageBuffer(x), config, mask)[0], img.pixels.copy())
        assert_gradient_matches(analytic, numeric)


class TestFreqRegularizer:
    """Tests for view aggregation."""

    def test_identical_views_equal_single_loss(self, rng):
        img = ImageBuffer(rng.uniform(0, 1, (10, 10, 3)))
        config = SpectralConfig()
        assert freq_regularizer([img, img, img], config) == pytest.approx(anisotropy_loss(img, config)[0], abs=1e-12)

    def test_mean_of_losses(self, mocker):
        mocker.patch("gsdefend.spectral.regularizer.anisotropy_loss", side_effect=[(0.0, None), (1.0, None)])
        renders = [ImageBuffer.filled(4, 4, 0.0), ImageBuffer.filled(4, 4, 1.0)]
        assert freq_regularizer(renders, SpectralConfig()) == 0.5

    def test_permutation_invariant(self, rng):
        renders = [ImageBuffer(rng.uniform(0, 1, (10, 10, 3))) for _ in range(4)]
        config = SpectralConfig()
        assert freq_regularizer(renders, config) == pytest.approx(freq_regularizer(renders[::-1], config), abs=1e-12)

    def test_empty_list_rejected(self):
        with pytest.raises(InvalidParameterError):
            freq_regularizer([], SpectralConfig())

    def test_mean_anisotropy_of_nothing(self):
        assert mean_anisotropy([], SpectralConfig()) == 0.0
