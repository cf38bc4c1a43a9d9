"""Synthetic ground-truth scenes, the ring camera rig and training initialization.

Scene generation is a pure function of (seed, SceneConfig).
"""

import logging

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import logit

from gsdefend.core.errors import ConfigurationError, InvalidParameterError
from gsdefend.core.models import BundleMetadata, SceneConfig
from gsdefend.core.parallel import ordered_map
from gsdefend.render.rasterizer import render
from gsdefend.scene.geometry import look_at, random_quaternions
from gsdefend.scene.types import Camera, DatasetBundle, GaussianCloud

logger = logging.getLogger(__name__)

MIN_IMAGE_SIZE = 8
INIT_OPACITY = 0.1
INIT_COLOR = 0.5
WORLD_UP = np.array([0.0, 0.0, 1.0])


def ring_cameras(scene: SceneConfig) -> list[Camera]:
    """Cameras evenly spaced on a horizontal ring, all looking at the origin."""
    size = scene.image_size
    focal = scene.focal_factor * size
    principal = (size - 1) / 2.0
    cameras = []
    for k in range(scene.n_cameras):
        angle = 2.0 * np.pi * k / scene.n_cameras
        center = np.array(
            [scene.camera_radius * np.cos(angle), scene.camera_radius * np.sin(angle), scene.camera_height]
        )
        rotation, translation = look_at(center, np.zeros(3), WORLD_UP)
        cameras.append(Camera(focal, focal, principal, principal, rotation, translation, size, size))
    return cameras


def sample_ground_truth(rng: np.random.Generator, scene: SceneConfig) -> GaussianCloud:
    n = scene.n_splats
    opacities = rng.uniform(scene.opacity_min, scene.opacity_max, n)
    return GaussianCloud(
        positions=rng.uniform(-scene.position_range, scene.position_range, (n, 3)),
        log_scales=rng.uniform(np.log(scene.scale_min), np.log(scene.scale_max), (n, 3)),
        rotations=random_quaternions(rng, n),
        colors=rng.uniform(0.0, 1.0, (n, 3)),
        opacity_logits=logit(opacities),
    )


def generate_synthetic_scene(
    seed: int,
    n_splats: int | None = None,
    n_cameras: int | None = None,
    image_size: int | None = None,
    scene: SceneConfig | None = None,
) -> tuple[GaussianCloud, DatasetBundle]:
    """
    Sample a ground-truth cloud and render it from a camera ring.

    Every ``test_every``-th camera (index 0 included) goes to the test split. Rendered
    images are snapped to the 8-bit grid so the bundle survives PNG persistence unchanged.

    Args:
        seed: Sole source of randomness
        n_splats, n_cameras, image_size: Overrides of the matching SceneConfig fields
        scene: Base scene config (defaults when None)

    Returns:
        (ground-truth cloud, dataset bundle)

    Raises:
        InvalidParameterError: If n_splats < 1 or n_cameras < 2
        ConfigurationError: If image_size < 8
    """
    scene = scene or SceneConfig()
    overrides = {"n_splats": n_splats, "n_cameras": n_cameras, "image_size": image_size}
    scene = scene.model_copy(update={k: v for k, v in overrides.items() if v is not None})

    if scene.n_splats < 1:
        raise InvalidParameterError(f"n_splats must be >= 1, got {scene.n_splats}")
    if scene.n_cameras < 2:
        raise InvalidParameterError(f"n_cameras must be >= 2, got {scene.n_cameras}")
    if scene.image_size < MIN_IMAGE_SIZE:
        raise ConfigurationError(f"image_size must be >= {MIN_IMAGE_SIZE}, got {scene.image_size}")

    rng = np.random.default_rng(seed)
    ground_truth = sample_ground_truth(rng, scene)
    cameras = ring_cameras(scene)
    images = ordered_map(lambda cam: render(ground_truth, cam).image.quantized(), cameras)

    train_views, test_views = [], []
    for idx, view in enumerate(zip(cameras, images)):
        (test_views if idx % scene.test_every == 0 else train_views).append(view)

    logger.info(
        f"Generated scene seed={seed}: {scene.n_splats} splats, "
        f"{len(train_views)} train / {len(test_views)} test views at {scene.image_size}px"
    )
    bundle = DatasetBundle(train_views, test_views, BundleMetadata(seed=seed, kind="clean", scene=scene))
    return ground_truth, bundle


def initial_cloud(
    ground_truth: GaussianCloud, fraction: float, jitter: float, seed: int | np.random.SeedSequence
) -> GaussianCloud:
    """
    Training start point: a random subset of the ground truth with jittered positions.

    Scales come from the mean distance to the three nearest neighbours; rotations are
    identity, colors gray and opacities 0.1.
    """
    rng = np.random.default_rng(seed)
    total = len(ground_truth)
    n = min(total, max(1, int(round(fraction * total))))
    chosen = np.sort(rng.choice(total, size=n, replace=False))
    positions = ground_truth.positions[chosen] + rng.normal(0.0, jitter, (n, 3))

    if n > 1:
        k = min(4, n)
        distances, _ = cKDTree(positions).query(positions, k=k)
        spacing = np.maximum(distances[:, 1:].mean(axis=1), 1e-4)
    else:
        spacing = np.full(1, 0.1)

    rotations = np.zeros((n, 4))
    rotations[:, 0] = 1.0
    return GaussianCloud(
        positions=positions,
        log_scales=np.repeat(np.log(spacing)[:, None], 3, axis=1),
        rotations=rotations,
        colors=np.full((n, 3), INIT_COLOR),
        opacity_logits=np.full(n, logit(INIT_OPACITY)),
    )


def scene_extent(cameras: list[Camera]) -> float:
    """1.1 x the largest camera distance from the camera centroid."""
    centers = np.stack([camera.center for camera in cameras])
    radius = float(np.linalg.norm(centers - centers.mean(axis=0), axis=1).max())
    return 1.1 * radius if radius > 0 else 1.0
