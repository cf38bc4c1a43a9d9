"""Domain types: splats, clouds, cameras, images and dataset bundles.

Clouds are stored as parallel numpy arrays (one row per splat) so that rendering,
optimization and pruning operate on whole columns; GaussianSplat is the per-row view.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from gsdefend.core.errors import DimensionMismatchError, InvalidParameterError, NonFiniteError
from gsdefend.core.models import BundleMetadata

SPLAT_FIELDS = 14  # 3 position, 3 log_scales, 4 quaternion, 3 color, 1 opacity_logit


@dataclass(frozen=True, eq=False)
class GaussianSplat:
    """One anisotropic 3D Gaussian. Quaternions are (w, x, y, z)."""

    position: np.ndarray
    log_scales: np.ndarray
    rotation: np.ndarray
    color: np.ndarray
    opacity_logit: float

    @property
    def scales(self) -> np.ndarray:
        return np.exp(self.log_scales)

    @property
    def opacity(self) -> float:
        return float(expit(self.opacity_logit))


@dataclass(eq=False)
class GaussianCloud:
    """Ordered set of splats; indices are stable between prune events."""

    positions: np.ndarray
    log_scales: np.ndarray
    rotations: np.ndarray
    colors: np.ndarray
    opacity_logits: np.ndarray
    creation_iteration: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64).reshape(-1, 3)
        n = self.positions.shape[0]
        self.log_scales = np.asarray(self.log_scales, dtype=np.float64).reshape(n, 3)
        self.rotations = np.asarray(self.rotations, dtype=np.float64).reshape(n, 4)
        self.colors = np.asarray(self.colors, dtype=np.float64).reshape(n, 3)
        self.opacity_logits = np.asarray(self.opacity_logits, dtype=np.float64).reshape(n)
        if self.creation_iteration is None:
            self.creation_iteration = np.zeros(n, dtype=np.int64)
        self.creation_iteration = np.asarray(self.creation_iteration, dtype=np.int64).reshape(n)

    def __len__(self) -> int:
        return self.positions.shape[0]

    @property
    def opacities(self) -> np.ndarray:
        return expit(self.opacity_logits)

    @property
    def scales(self) -> np.ndarray:
        return np.exp(self.log_scales)

    @classmethod
    def empty(cls) -> "GaussianCloud":
        return cls(np.zeros((0, 3)), np.zeros((0, 3)), np.zeros((0, 4)), np.zeros((0, 3)), np.zeros(0))

    @classmethod
    def from_splats(cls, splats: list[GaussianSplat]) -> "GaussianCloud":
        if not splats:
            return cls.empty()
        return cls(
            positions=np.stack([s.position for s in splats]),
            log_scales=np.stack([s.log_scales for s in splats]),
            rotations=np.stack([s.rotation for s in splats]),
            colors=np.stack([s.color for s in splats]),
            opacity_logits=np.array([s.opacity_logit for s in splats], dtype=np.float64),
        )

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "GaussianCloud":
        """Inverse of as_matrix: one row of 14 float64 per splat."""
        matrix = np.asarray(matrix, dtype=np.float64).reshape(-1, SPLAT_FIELDS)
        return cls(matrix[:, 0:3], matrix[:, 3:6], matrix[:, 6:10], matrix[:, 10:13], matrix[:, 13])

    def as_matrix(self) -> np.ndarray:
        return np.concatenate(
            [self.positions, self.log_scales, self.rotations, self.colors, self.opacity_logits[:, None]], axis=1
        )

    def splat(self, index: int) -> GaussianSplat:
        return GaussianSplat(
            position=self.positions[index].copy(),
            log_scales=self.log_scales[index].copy(),
            rotation=self.rotations[index].copy(),
            color=self.colors[index].copy(),
            opacity_logit=float(self.opacity_logits[index]),
        )

    def splats(self) -> list[GaussianSplat]:
        return [self.splat(i) for i in range(len(self))]

    def select(self, keep: np.ndarray) -> "GaussianCloud":
        """New cloud with the rows selected by a boolean mask or index array, order preserved."""
        return GaussianCloud(
            positions=self.positions[keep],
            log_scales=self.log_scales[keep],
            rotations=self.rotations[keep],
            colors=self.colors[keep],
            opacity_logits=self.opacity_logits[keep],
            creation_iteration=self.creation_iteration[keep],
        )

    def concat(self, other: "GaussianCloud") -> "GaussianCloud":
        return GaussianCloud(
            positions=np.concatenate([self.positions, other.positions]),
            log_scales=np.concatenate([self.log_scales, other.log_scales]),
            rotations=np.concatenate([self.rotations, other.rotations]),
            colors=np.concatenate([self.colors, other.colors]),
            opacity_logits=np.concatenate([self.opacity_logits, other.opacity_logits]),
            creation_iteration=np.concatenate([self.creation_iteration, other.creation_iteration]),
        )

    def copy(self) -> "GaussianCloud":
        return self.select(np.arange(len(self)))

    def normalize_rotations(self) -> None:
        self.rotations /= np.linalg.norm(self.rotations, axis=1, keepdims=True)


@dataclass(frozen=True, eq=False)
class Camera:
    """Pinhole camera; rotation/translation map world points into camera space (x right, y down, z forward)."""

    fx: float
    fy: float
    cx: float
    cy: float
    rotation: np.ndarray
    translation: np.ndarray
    width: int
    height: int

    def __post_init__(self):
        rotation = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        translation = np.asarray(self.translation, dtype=np.float64).reshape(3)
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "translation", translation)
        if self.width <= 0 or self.height <= 0:
            raise InvalidParameterError(f"Camera dimensions must be positive, got {self.width}x{self.height}")
        if np.abs(rotation @ rotation.T - np.eye(3)).max() > 1e-9:
            raise InvalidParameterError("Camera rotation is not orthonormal")

    @property
    def center(self) -> np.ndarray:
        return -self.rotation.T @ self.translation

    def to_camera(self, points: np.ndarray) -> np.ndarray:
        return points @ self.rotation.T + self.translation


@dataclass(frozen=True, eq=False)
class ImageBuffer:
    """H x W x 3 float image; values in [0, 1] once persisted."""

    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.asarray(self.pixels, dtype=np.float64)
        if pixels.ndim != 3 or pixels.shape[2] != 3:
            raise DimensionMismatchError(f"Expected H x W x 3 pixels, got shape {pixels.shape}")
        if not np.isfinite(pixels).all():
            raise NonFiniteError("Image contains NaN or infinite values")
        object.__setattr__(self, "pixels", pixels)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.height, self.width

    @classmethod
    def filled(cls, height: int, width: int, value) -> "ImageBuffer":
        return cls(np.broadcast_to(np.asarray(value, dtype=np.float64), (height, width, 3)).copy())

    @classmethod
    def from_uint8(cls, data: np.ndarray) -> "ImageBuffer":
        return cls(np.asarray(data, dtype=np.float64)[..., :3] / 255.0)

    def to_uint8(self) -> np.ndarray:
        return np.round(np.clip(self.pixels, 0.0, 1.0) * 255.0).astype(np.uint8)

    def quantized(self) -> "ImageBuffer":
        """Snap to the 8-bit grid so the image survives a PNG round trip unchanged."""
        return ImageBuffer.from_uint8(self.to_uint8())

    def luminance(self) -> np.ndarray:
        return self.pixels @ LUMA_WEIGHTS


LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])

View = tuple[Camera, ImageBuffer]


def require_same_shape(a: ImageBuffer, b: ImageBuffer) -> None:
    if a.shape != b.shape:
        raise DimensionMismatchError(f"Image dimensions differ: {a.shape} vs {b.shape}")


@dataclass(eq=False)
class DatasetBundle:
    """Posed train/test images of one scene."""

    train_views: list[View]
    test_views: list[View]
    metadata: BundleMetadata

    def __post_init__(self):
        shapes = {image.shape for _, image in self.train_views + self.test_views}
        if len(shapes) > 1:
            raise DimensionMismatchError(f"All bundle images must share dimensions, got {sorted(shapes)}")

    @property
    def train_cameras(self) -> list[Camera]:
        return [camera for camera, _ in self.train_views]

    @property
    def train_images(self) -> list[ImageBuffer]:
        return [image for _, image in self.train_views]

    @property
    def test_cameras(self) -> list[Camera]:
        return [camera for camera, _ in self.test_views]

    @property
    def test_images(self) -> list[ImageBuffer]:
        return [image for _, image in self.test_views]

    def with_train_images(self, images: list[ImageBuffer], metadata: BundleMetadata) -> "DatasetBundle":
        """Same cameras and test split, replaced training images."""
        if len(images) != len(self.train_views):
            raise DimensionMismatchError(f"Expected {len(self.train_views)} train images, got {len(images)}")
        views = [(camera, image) for (camera, _), image in zip(self.train_views, images)]
        return DatasetBundle(train_views=views, test_views=list(self.test_views), metadata=metadata)
