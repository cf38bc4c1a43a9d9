"""Shared test fixtures and configuration."""

import os

# Set env vars before any gsdefend imports (the settings singleton reads them once)
os.environ.setdefault("GSDEFEND_WORKERS", "1")
os.environ.setdefault("GSDEFEND_LOG_LEVEL", "WARNING")

import numpy as np
import pytest

from gsdefend.core.models import SceneConfig, TrainConfig
from gsdefend.scene.synthetic import generate_synthetic_scene
from gsdefend.scene.types import Camera

TINY_SEED = 3


@pytest.fixture(scope="session")
def tiny_scene_config():
    """20 splats, 8 cameras at 16x16; cameras 0 and 4 are held out."""
    return SceneConfig(n_splats=20, n_cameras=8, image_size=16, test_every=4)


@pytest.fixture(scope="session")
def tiny_scene(tiny_scene_config):
    """(ground truth, bundle) of the tiny scene; shared, so never mutate it."""
    return generate_synthetic_scene(TINY_SEED, scene=tiny_scene_config)


@pytest.fixture
def tiny_bundle(tiny_scene):
    return tiny_scene[1]


@pytest.fixture
def ground_truth(tiny_scene):
    return tiny_scene[0].copy()


@pytest.fixture
def tiny_train_config():
    """A few dozen iterations with every schedule firing early."""
    return TrainConfig(
        iterations=20,
        densify_interval=10,
        prune_interval=10,
        prune_warmup=10,
        view_samples=4,
        min_splats=1,
    )


@pytest.fixture
def axis_camera():
    """Camera at the origin looking down +z, 16x16, optical axis through pixel (7.5, 7.5)."""
    return Camera(20.0, 20.0, 7.5, 7.5, np.eye(3), np.zeros(3), 16, 16)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
