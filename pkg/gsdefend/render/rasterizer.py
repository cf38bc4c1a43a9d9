"""Differentiable splat rasterizer.

Forward: EWA projection of every splat, depth sort (stable, ties by index), then
front-to-back alpha blending over each splat's cutoff bounding box.
Backward: back-to-front replay of the cached footprints, then a vectorized chain rule
from screen space (mean, conic) to the five parameter groups.

NO try-catch blocks - invalid upstream gradients raise NonFiniteError.
"""

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from gsdefend.core.errors import NonFiniteError
from gsdefend.core.parallel import ordered_map
from gsdefend.scene.geometry import quaternion_to_rotation
from gsdefend.scene.types import Camera, GaussianCloud, GaussianSplat, ImageBuffer


@dataclass(frozen=True)
class RasterSettings:
    """Numerical guards of the renderer."""

    cutoff_sigma: float = 3.0
    weight_clamp: float = 0.99
    min_transmittance: float = 1e-4
    hit_floor: float = 1e-4
    dilation: float = 0.3
    near: float = 0.01


DEFAULT_SETTINGS = RasterSettings()


@dataclass(frozen=True, eq=False)
class Projected2D:
    mean2d: np.ndarray
    cov2d: np.ndarray
    depth: float
    splat_index: int


@dataclass(eq=False)
class _Projection:
    """Per-splat screen-space quantities plus the intermediates the backward pass needs."""

    visible: np.ndarray
    mean2d: np.ndarray
    cov2d: np.ndarray
    conic: np.ndarray
    depth: np.ndarray
    bbox: np.ndarray  # (N, 4) y0, y1, x0, x1 inclusive
    p_cam: np.ndarray
    jac: np.ndarray
    sigma: np.ndarray
    rot: np.ndarray
    scales: np.ndarray


@dataclass(eq=False)
class _Footprint:
    index: int
    y0: int
    y1: int
    x0: int
    x1: int
    dx: np.ndarray
    dy: np.ndarray
    gauss: np.ndarray
    trans: np.ndarray
    weight: np.ndarray
    live: np.ndarray  # weight depends on parameters here (active and not clamped)


@dataclass(eq=False)
class _ForwardState:
    projection: _Projection
    footprints: list[_Footprint]
    final_transmittance: np.ndarray
    background: np.ndarray


@dataclass(eq=False)
class RenderOutput:
    image: ImageBuffer
    per_splat_hits: np.ndarray
    per_pixel_contributor_count: np.ndarray
    accumulated_opacity: np.ndarray
    state: _ForwardState | None = field(default=None, repr=False)


@dataclass(eq=False)
class GradientBundle:
    """Parameter gradients aligned with cloud indices; d_mean2d is the view-space gradient in NDC units."""

    d_position: np.ndarray
    d_log_scales: np.ndarray
    d_rotation: np.ndarray
    d_color: np.ndarray
    d_opacity_logit: np.ndarray
    d_mean2d: np.ndarray

    @classmethod
    def zeros(cls, n: int) -> "GradientBundle":
        return cls(np.zeros((n, 3)), np.zeros((n, 3)), np.zeros((n, 4)), np.zeros((n, 3)), np.zeros(n), np.zeros((n, 2)))

    def __add__(self, other: "GradientBundle") -> "GradientBundle":
        return GradientBundle(
            self.d_position + other.d_position,
            self.d_log_scales + other.d_log_scales,
            self.d_rotation + other.d_rotation,
            self.d_color + other.d_color,
            self.d_opacity_logit + other.d_opacity_logit,
            self.d_mean2d + other.d_mean2d,
        )

    def is_finite(self) -> bool:
        return all(
            np.isfinite(arr).all()
            for arr in (self.d_position, self.d_log_scales, self.d_rotation, self.d_color, self.d_opacity_logit)
        )


def _project_cloud(cloud: GaussianCloud, camera: Camera, settings: RasterSettings) -> _Projection:
    n = len(cloud)
    p_cam = camera.to_camera(cloud.positions)
    x, y, z = p_cam[:, 0], p_cam[:, 1], p_cam[:, 2]
    in_front = z > settings.near
    z = np.where(in_front, z, 1.0)

    jac = np.zeros((n, 2, 3))
    jac[:, 0, 0] = camera.fx / z
    jac[:, 0, 2] = -camera.fx * x / z**2
    jac[:, 1, 1] = camera.fy / z
    jac[:, 1, 2] = -camera.fy * y / z**2

    rot = quaternion_to_rotation(cloud.rotations)
    scales = np.exp(cloud.log_scales)
    scaled = rot * scales[:, None, :]
    sigma = scaled @ np.swapaxes(scaled, 1, 2)

    m = jac @ camera.rotation
    cov2d = m @ sigma @ np.swapaxes(m, 1, 2)
    cov2d = 0.5 * (cov2d + np.swapaxes(cov2d, 1, 2)) + settings.dilation * np.eye(2)

    a, b, c = cov2d[:, 0, 0], cov2d[:, 0, 1], cov2d[:, 1, 1]
    det = a * c - b * b
    conic = np.stack([np.stack([c, -b], -1), np.stack([-b, a], -1)], 1) / det[:, None, None]

    mean2d = np.stack([camera.fx * x / z + camera.cx, camera.fy * y / z + camera.cy], axis=1)
    lam_max = 0.5 * (a + c) + np.sqrt(0.25 * (a - c) ** 2 + b * b)
    radius = settings.cutoff_sigma * np.sqrt(lam_max)

    x0 = np.maximum(np.ceil(mean2d[:, 0] - radius), 0)
    x1 = np.minimum(np.floor(mean2d[:, 0] + radius), camera.width - 1)
    y0 = np.maximum(np.ceil(mean2d[:, 1] - radius), 0)
    y1 = np.minimum(np.floor(mean2d[:, 1] + radius), camera.height - 1)
    visible = in_front & (x0 <= x1) & (y0 <= y1)
    bbox = np.stack([y0, y1, x0, x1], axis=1)
    bbox = np.where(visible[:, None], bbox, 0).astype(np.int64)

    return _Projection(
        visible=visible,
        mean2d=mean2d,
        cov2d=cov2d,
        conic=conic,
        depth=p_cam[:, 2],
        bbox=bbox,
        p_cam=p_cam,
        jac=jac,
        sigma=sigma,
        rot=rot,
        scales=scales,
    )


def project(
    splat: GaussianSplat, camera: Camera, splat_index: int = 0, settings: RasterSettings = DEFAULT_SETTINGS
) -> Projected2D | None:
    """Screen-space mean and dilated covariance of one splat, or None when culled."""
    proj = _project_cloud(GaussianCloud.from_splats([splat]), camera, settings)
    if not proj.visible[0]:
        return None
    return Projected2D(
        mean2d=proj.mean2d[0], cov2d=proj.cov2d[0], depth=float(proj.depth[0]), splat_index=splat_index
    )


def render(
    cloud: GaussianCloud,
    camera: Camera,
    background: Sequence[float] = (0.0, 0.0, 0.0),
    settings: RasterSettings = DEFAULT_SETTINGS,
) -> RenderOutput:
    """Alpha-blend the cloud front to back into an image; an empty cloud renders the background."""
    height, width = camera.height, camera.width
    bg = np.asarray(background, dtype=np.float64)
    n = len(cloud)

    proj = _project_cloud(cloud, camera, settings)
    opacities = cloud.opacities
    visible_idx = np.flatnonzero(proj.visible)
    order = visible_idx[np.argsort(proj.depth[visible_idx], kind="stable")]

    trans = np.ones((height, width))
    color = np.zeros((height, width, 3))
    hits = np.zeros(n, dtype=np.int64)
    contributors = np.zeros((height, width), dtype=np.int64)
    footprints: list[_Footprint] = []

    for i in order:
        y0, y1, x0, x1 = proj.bbox[i]
        t = trans[y0 : y1 + 1, x0 : x1 + 1]
        active = t >= settings.min_transmittance
        if not active.any():
            continue

        dx = np.arange(x0, x1 + 1) - proj.mean2d[i, 0]
        dy = np.arange(y0, y1 + 1) - proj.mean2d[i, 1]
        qa, qb, qc = proj.conic[i, 0, 0], proj.conic[i, 0, 1], proj.conic[i, 1, 1]
        power = -0.5 * (qa * dx[None, :] ** 2 + 2 * qb * dy[:, None] * dx[None, :] + qc * dy[:, None] ** 2)
        gauss = np.exp(power)
        raw = opacities[i] * gauss
        weight = np.where(active, np.minimum(raw, settings.weight_clamp), 0.0)
        contribution = weight * t

        color[y0 : y1 + 1, x0 : x1 + 1] += contribution[..., None] * cloud.colors[i]
        hit = contribution > settings.hit_floor
        hits[i] = int(hit.sum())
        contributors[y0 : y1 + 1, x0 : x1 + 1] += hit

        footprints.append(
            _Footprint(i, y0, y1, x0, x1, dx, dy, gauss, t.copy(), weight, active & (raw < settings.weight_clamp))
        )
        trans[y0 : y1 + 1, x0 : x1 + 1] = t * (1.0 - weight)

    color += trans[..., None] * bg
    return RenderOutput(
        image=ImageBuffer(color),
        per_splat_hits=hits,
        per_pixel_contributor_count=contributors,
        accumulated_opacity=1.0 - trans,
        state=_ForwardState(projection=proj, footprints=footprints, final_transmittance=trans, background=bg),
    )


def render_backward(
    cloud: GaussianCloud,
    camera: Camera,
    d_loss_d_image: ImageBuffer | np.ndarray,
    output: RenderOutput | None = None,
    background: Sequence[float] = (0.0, 0.0, 0.0),
    settings: RasterSettings = DEFAULT_SETTINGS,
) -> GradientBundle:
    """
    Analytic gradients of a scalar loss w.r.t. all splat parameters.

    Args:
        d_loss_d_image: H x W x 3 upstream gradient
        output: Cached forward pass for this (cloud, camera); re-rendered when None

    Raises:
        NonFiniteError: If the upstream gradient holds NaN or infinity
    """
    upstream = d_loss_d_image.pixels if isinstance(d_loss_d_image, ImageBuffer) else np.asarray(d_loss_d_image)
    if not np.isfinite(upstream).all():
        raise NonFiniteError("upstream image gradient is not finite")
    if output is None or output.state is None:
        output = render(cloud, camera, background, settings)

    state = output.state
    proj = state.projection
    n = len(cloud)
    grads = GradientBundle.zeros(n)
    if n == 0 or not state.footprints:
        return grads

    opacities = cloud.opacities
    d_mean2d = np.zeros((n, 2))
    d_conic = np.zeros((n, 3))  # a, b, c of [[a, b], [b, c]]
    d_opacity = np.zeros(n)

    behind = state.final_transmittance[..., None] * state.background
    for fp in reversed(state.footprints):
        i = fp.index
        region = (slice(fp.y0, fp.y1 + 1), slice(fp.x0, fp.x1 + 1))
        g_img = upstream[region]
        wt = fp.weight * fp.trans

        grads.d_color[i] = np.einsum("hwc,hw->c", g_img, wt)
        d_weight = fp.trans * (g_img @ cloud.colors[i]) - np.einsum("hwc,hwc->hw", g_img, behind[region]) / (
            1.0 - fp.weight
        )
        behind[region] += wt[..., None] * cloud.colors[i]

        d_weight = np.where(fp.live, d_weight, 0.0)
        d_opacity[i] = float((d_weight * fp.gauss).sum())
        d_power = d_weight * opacities[i] * fp.gauss

        dx, dy = fp.dx[None, :], fp.dy[:, None]
        qa, qb, qc = proj.conic[i, 0, 0], proj.conic[i, 0, 1], proj.conic[i, 1, 1]
        d_conic[i] = (
            (-0.5 * d_power * dx**2).sum(),
            (-d_power * dx * dy).sum(),
            (-0.5 * d_power * dy**2).sum(),
        )
        d_mean2d[i] = ((d_power * (qa * dx + qb * dy)).sum(), (d_power * (qb * dx + qc * dy)).sum())

    _screen_to_params(cloud, camera, proj, d_mean2d, d_conic, d_opacity, opacities, grads)

    silent = output.per_splat_hits == 0
    for arr in (grads.d_position, grads.d_log_scales, grads.d_rotation, grads.d_color, grads.d_opacity_logit):
        arr[silent] = 0.0
    grads.d_mean2d = d_mean2d * np.array([0.5 * camera.width, 0.5 * camera.height])
    grads.d_mean2d[silent] = 0.0
    return grads


def _screen_to_params(
    cloud: GaussianCloud,
    camera: Camera,
    proj: _Projection,
    d_mean2d: np.ndarray,
    d_conic: np.ndarray,
    d_opacity: np.ndarray,
    opacities: np.ndarray,
    grads: GradientBundle,
) -> None:
    """Chain rule from (mean2d, conic, opacity) to position, log-scales, rotation and opacity logit."""
    d_q = np.empty((len(cloud), 2, 2))
    d_q[:, 0, 0] = d_conic[:, 0]
    d_q[:, 0, 1] = d_q[:, 1, 0] = 0.5 * d_conic[:, 1]
    d_q[:, 1, 1] = d_conic[:, 2]
    d_cov2d = -proj.conic @ d_q @ proj.conic

    w_cam = camera.rotation
    m = proj.jac @ w_cam
    d_sigma = np.swapaxes(m, 1, 2) @ d_cov2d @ m
    d_m = 2.0 * d_cov2d @ m @ proj.sigma
    d_jac = d_m @ w_cam.T

    x, y, z = proj.p_cam[:, 0], proj.p_cam[:, 1], np.where(proj.visible, proj.p_cam[:, 2], 1.0)
    fx, fy = camera.fx, camera.fy
    d_p = np.empty((len(cloud), 3))
    d_p[:, 0] = d_mean2d[:, 0] * fx / z - d_jac[:, 0, 2] * fx / z**2
    d_p[:, 1] = d_mean2d[:, 1] * fy / z - d_jac[:, 1, 2] * fy / z**2
    d_p[:, 2] = (
        -d_mean2d[:, 0] * fx * x / z**2
        - d_mean2d[:, 1] * fy * y / z**2
        - d_jac[:, 0, 0] * fx / z**2
        + d_jac[:, 0, 2] * 2 * fx * x / z**3
        - d_jac[:, 1, 1] * fy / z**2
        + d_jac[:, 1, 2] * 2 * fy * y / z**3
    )
    grads.d_position[:] = d_p @ w_cam

    rot, scales = proj.rot, proj.scales
    d_a = 2.0 * d_sigma @ (rot * scales[:, None, :])
    d_rot = d_a * scales[:, None, :]
    grads.d_log_scales[:] = (d_a * rot).sum(axis=1) * scales
    grads.d_rotation[:] = _rotation_grad_to_quaternion(cloud.rotations, d_rot)
    grads.d_opacity_logit[:] = d_opacity * opacities * (1.0 - opacities)


def _rotation_grad_to_quaternion(quats: np.ndarray, d_rot: np.ndarray) -> np.ndarray:
    """Pull a gradient on R(q / |q|) back to the raw quaternion."""
    norm = np.linalg.norm(quats, axis=1, keepdims=True)
    qn = quats / norm
    w, x, y, z = qn.T
    g = d_rot
    d_qn = 2.0 * np.stack(
        [
            -z * g[:, 0, 1] + y * g[:, 0, 2] + z * g[:, 1, 0] - x * g[:, 1, 2] - y * g[:, 2, 0] + x * g[:, 2, 1],
            y * g[:, 0, 1] + z * g[:, 0, 2] + y * g[:, 1, 0] - 2 * x * g[:, 1, 1] - w * g[:, 1, 2]
            + z * g[:, 2, 0] + w * g[:, 2, 1] - 2 * x * g[:, 2, 2],
            -2 * y * g[:, 0, 0] + x * g[:, 0, 1] + w * g[:, 0, 2] + x * g[:, 1, 0] + z * g[:, 1, 2]
            - w * g[:, 2, 0] + z * g[:, 2, 1] - 2 * y * g[:, 2, 2],
            -2 * z * g[:, 0, 0] - w * g[:, 0, 1] + x * g[:, 0, 2] + w * g[:, 1, 0] - 2 * z * g[:, 1, 1]
            + y * g[:, 1, 2] + x * g[:, 2, 0] + y * g[:, 2, 1],
        ],
        axis=1,
    )
    return (d_qn - qn * (qn * d_qn).sum(axis=1, keepdims=True)) / norm


def count_hits(
    cloud: GaussianCloud,
    cameras: Sequence[Camera],
    background: Sequence[float] = (0.0, 0.0, 0.0),
    settings: RasterSettings = DEFAULT_SETTINGS,
) -> np.ndarray:
    """Per-splat hit counts summed over the given views (forward passes only)."""
    per_view = ordered_map(lambda cam: render(cloud, cam, background, settings).per_splat_hits, cameras)
    total = np.zeros(len(cloud), dtype=np.int64)
    for hits in per_view:
        total += hits
    return total
