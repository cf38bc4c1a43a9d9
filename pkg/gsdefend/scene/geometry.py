"""Quaternion and covariance algebra.

Covariances are never stored: they are rebuilt from log-scales and a unit quaternion as
Sigma = R diag(exp(log_scales))^2 R^T, which is symmetric positive definite by construction.
"""

import numpy as np

from gsdefend.core.errors import InvalidParameterError
from gsdefend.scene.types import GaussianCloud, GaussianSplat

QUATERNION_TOLERANCE = 1e-6


def quaternion_to_rotation(quats: np.ndarray) -> np.ndarray:
    """
    Rotation matrices of (..., 4) quaternions (w, x, y, z). Inputs are normalized first.

    Returns:
        (..., 3, 3) rotation matrices
    """
    q = np.asarray(quats, dtype=np.float64)
    q = q / np.linalg.norm(q, axis=-1, keepdims=True)
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]

    rot = np.empty(q.shape[:-1] + (3, 3))
    rot[..., 0, 0] = 1 - 2 * (y * y + z * z)
    rot[..., 0, 1] = 2 * (x * y - w * z)
    rot[..., 0, 2] = 2 * (x * z + w * y)
    rot[..., 1, 0] = 2 * (x * y + w * z)
    rot[..., 1, 1] = 1 - 2 * (x * x + z * z)
    rot[..., 1, 2] = 2 * (y * z - w * x)
    rot[..., 2, 0] = 2 * (x * z - w * y)
    rot[..., 2, 1] = 2 * (y * z + w * x)
    rot[..., 2, 2] = 1 - 2 * (x * x + y * y)
    return rot


def quaternion_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product a * b; the rotation of b followed by a."""
    aw, ax, ay, az = np.moveaxis(np.asarray(a, dtype=np.float64), -1, 0)
    bw, bx, by, bz = np.moveaxis(np.asarray(b, dtype=np.float64), -1, 0)
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def random_quaternions(rng: np.random.Generator, n: int) -> np.ndarray:
    """Uniformly distributed unit quaternions (Shoemake's method)."""
    u1, u2, u3 = rng.random((3, n))
    a, b = np.sqrt(1 - u1), np.sqrt(u1)
    return np.stack(
        [
            a * np.sin(2 * np.pi * u2),
            a * np.cos(2 * np.pi * u2),
            b * np.sin(2 * np.pi * u3),
            b * np.cos(2 * np.pi * u3),
        ],
        axis=-1,
    )


def covariance_from_params(log_scales: np.ndarray, rotation: np.ndarray) -> np.ndarray:
    """
    3x3 covariance of one splat.

    Raises:
        InvalidParameterError: On non-finite inputs or a quaternion that is not unit length
    """
    log_scales = np.asarray(log_scales, dtype=np.float64)
    rotation = np.asarray(rotation, dtype=np.float64)
    if not (np.isfinite(log_scales).all() and np.isfinite(rotation).all()):
        raise InvalidParameterError("covariance parameters must be finite")
    if abs(np.linalg.norm(rotation) - 1.0) > QUATERNION_TOLERANCE:
        raise InvalidParameterError(f"quaternion norm {np.linalg.norm(rotation):.9f} is not 1")
    return covariances(log_scales[None], rotation[None])[0]


def covariances(log_scales: np.ndarray, rotations: np.ndarray) -> np.ndarray:
    """Vectorized covariances for (N, 3) log-scales and (N, 4) quaternions."""
    rot = quaternion_to_rotation(rotations)
    scaled = rot * np.exp(log_scales)[:, None, :]
    cov = scaled @ np.swapaxes(scaled, -1, -2)
    return 0.5 * (cov + np.swapaxes(cov, -1, -2))


def min_sigma(splat: GaussianSplat) -> float:
    """Smallest standard deviation; its square is the smallest eigenvalue of the covariance."""
    return float(np.exp(np.min(splat.log_scales)))


def min_sigmas(cloud: GaussianCloud) -> np.ndarray:
    return np.exp(cloud.log_scales.min(axis=1))


def look_at(center: np.ndarray, target: np.ndarray, up: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    World-to-camera rotation and translation for a camera at center looking at target.

    Camera axes follow the x-right, y-down, z-forward convention.
    """
    center = np.asarray(center, dtype=np.float64)
    forward = np.asarray(target, dtype=np.float64) - center
    forward /= np.linalg.norm(forward)
    right = np.cross(forward, up)
    right /= np.linalg.norm(right)
    down = np.cross(forward, right)
    rotation = np.stack([right, down, forward])
    return rotation, -rotation @ center
