"""Tests for the Fourier response of 3D Gaussians and the importance weight."""

import numpy as np
import pytest

from gsdefend.core.errors import InvalidParameterError
from gsdefend.core.models import FreqFilterConfig
from gsdefend.scene.geometry import covariance_from_params, quaternion_to_rotation, random_quaternions
from gsdefend.scene.types import GaussianCloud, GaussianSplat
from gsdefend.spectral.filter3d import (
    SCORE_FLOOR,
    gaussian_amplitude,
    gaussian_phase,
    hf_attenuation_score,
    hf_importance,
    hf_importance_cloud,
)

GRID = 64


def _unit(quaternion) -> np.ndarray:
    q = np.asarray(quaternion, dtype=np.float64)
    return q / np.linalg.norm(q)


def _splat(scales, rotation=(1.0, 0.0, 0.0, 0.0)) -> GaussianSplat:
    return GaussianSplat(
        position=np.zeros(3),
        log_scales=np.log(np.asarray(scales, dtype=np.float64)),
        rotation=np.asarray(rotation, dtype=np.float64),
        color=np.full(3, 0.5),
        opacity_logit=0.0,
    )


def _quadrature_amplitude(sigma: np.ndarray, t_vec: np.ndarray, half_width: float) -> float:
    """Riemann sum of G(x) cos(2 pi t.x) over a cube; the sine part vanishes by symmetry."""
    axis = np.linspace(-half_width, half_width, GRID)
    step = axis[1] - axis[0]
    points = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3)
    quad = np.einsum("ni,ij,nj->n", points, np.linalg.inv(sigma), points)
    return float(np.sum(np.exp(-0.5 * quad) * np.cos(2 * np.pi * points @ t_vec)) * step**3)


class TestGaussianAmplitude:
    """Tests for the closed-form amplitude."""

    def test_dc_component_is_gaussian_volume(self):
        sigma = np.diag([0.25, 1.0, 4.0])
        assert gaussian_amplitude(sigma, np.zeros(3)) == pytest.approx((2 * np.pi) ** 1.5 * 1.0, rel=1e-12)

    def test_matches_numerical_quadrature(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            scales = rng.uniform(0.5, 1.5, 3)
            rotation = quaternion_to_rotation(random_quaternions(rng, 1))[0]
            sigma = rotation @ np.diag(scales**2) @ rotation.T
            sigma = 0.5 * (sigma + sigma.T)
            for _ in range(10):
                direction = rng.normal(size=3)
                direction /= np.sqrt(direction @ sigma @ direction)
                t_vec = direction * np.sqrt(rng.uniform(0.0, 0.1))
                expected = _quadrature_amplitude(sigma, t_vec, 6 * scales.max())
                assert gaussian_amplitude(sigma, t_vec) == pytest.approx(expected, rel=1e-3)

    def test_decreases_with_frequency(self):
        sigma = covariance_from_params(np.log([0.1, 0.2, 0.3]), _unit([0.9, 0.1, 0.3, 0.2]))
        values = [gaussian_amplitude(sigma, np.array([t, 0.0, 0.0])) for t in (0.0, 1.0, 2.0, 4.0)]
        assert all(later < earlier for earlier, later in zip(values, values[1:]))

    def test_rejects_non_symmetric(self):
        with pytest.raises(InvalidParameterError):
            gaussian_amplitude(np.array([[1.0, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]), np.zeros(3))

    def test_rejects_indefinite(self):
        with pytest.raises(InvalidParameterError):
            gaussian_amplitude(np.diag([1.0, -1.0, 1.0]), np.zeros(3))

    def test_phase_is_linear_in_mean(self):
        mu, t_vec = np.array([0.5, -1.0, 2.0]), np.array([1.0, 0.25, 0.5])
        assert gaussian_phase(mu, t_vec) == pytest.approx(-2 * np.pi * 1.25)
        assert gaussian_phase(2 * mu, t_vec) == pytest.approx(2 * gaussian_phase(mu, t_vec))


class TestAttenuationScore:
    """Tests for S = exp(-2 pi^2 t^2 sigma_min^2)."""

    def test_thin_splat_value(self):
        assert hf_attenuation_score(_splat([0.01, 1.0, 1.0]), 8.0) == pytest.approx(0.88132, abs=1e-5)

    def test_wider_splat_value(self):
        assert hf_attenuation_score(_splat([0.05, 0.3, 0.2]), 8.0) == pytest.approx(0.04249, abs=1e-5)

    def test_rotation_does_not_change_score(self, rng):
        base = hf_attenuation_score(_splat([0.02, 0.5, 0.1]), 8.0)
        for quat in random_quaternions(rng, 10):
            assert hf_attenuation_score(_splat([0.02, 0.5, 0.1], quat), 8.0) == pytest.approx(base, rel=1e-12)

    def test_underflow_clamps_to_floor(self):
        assert hf_attenuation_score(_splat([1.0, 1.0, 1.0]), 8.0) == SCORE_FLOOR

    @pytest.mark.parametrize("t_ref", [0.0, -1.0])
    def test_non_positive_cutoff_rejected(self, t_ref):
        with pytest.raises(InvalidParameterError):
            hf_attenuation_score(_splat([0.1, 0.1, 0.1]), t_ref)

    def test_monotone_in_min_sigma(self, rng):
        sigmas = np.sort(rng.uniform(0.001, 0.3, 1000))
        config = FreqFilterConfig()
        scores = np.array([hf_attenuation_score(_splat([s, 0.5, 0.5]), config.t_ref) for s in sigmas])
        weights = np.array([hf_importance(_splat([s, 0.5, 0.5]), config) for s in sigmas])
        assert (np.diff(scores) < 0).all()
        assert (np.diff(weights) >= 0).all()


class TestImportance:
    """Tests for W = (1 - S)^alpha."""

    def test_thin_splat_weight(self):
        weight = hf_importance(_splat([0.01, 1.0, 1.0]), FreqFilterConfig())
        assert weight == pytest.approx((1 - np.exp(-2 * np.pi**2 * 64 * 1e-4)) ** 2, rel=1e-12)
        assert weight == pytest.approx(0.014085, abs=2e-6)

    def test_wider_splat_weight(self):
        weight = hf_importance(_splat([0.05, 1.0, 1.0]), FreqFilterConfig())
        assert weight == pytest.approx((1 - np.exp(-2 * np.pi**2 * 64 * 0.05**2)) ** 2, rel=1e-12)
        assert weight == pytest.approx(0.9168081, abs=1e-7)

    def test_weight_in_unit_interval(self, rng):
        config = FreqFilterConfig(t_ref=4.0, alpha=1.5)
        for s in rng.uniform(0.0005, 2.0, 50):
            assert 0.0 <= hf_importance(_splat([s, s, s]), config) <= 1.0

    def test_cloud_matches_per_splat(self, ground_truth):
        config = FreqFilterConfig(t_ref=6.0, alpha=3.0)
        expected = [hf_importance(splat, config) for splat in ground_truth.splats()]
        np.testing.assert_allclose(hf_importance_cloud(ground_truth, config), expected, rtol=1e-12)

    def test_empty_cloud(self):
        assert hf_importance_cloud(GaussianCloud.empty(), FreqFilterConfig()).shape == (0,)
