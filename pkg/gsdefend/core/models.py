"""Pydantic models - Single source of truth for configs, reports and on-disk records.

NO try-catch blocks - Pydantic validates automatically and raises ValidationError.
Numeric payloads (clouds, images, spectra) are numpy-backed dataclasses in the feature packages.
"""

import json
from enum import StrEnum
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator

BYTES_PER_SPLAT = 112  # 14 float64 fields
FORMAT_VERSION = 1


class StrictModel(BaseModel):
    """Base for every config and record: unknown fields are rejected."""

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="before")
    @classmethod
    def _drop_computed_fields(cls, data):
        """Serialized computed fields are derived values; accept them back on load and recompute."""
        if isinstance(data, dict) and cls.model_computed_fields:
            return {key: value for key, value in data.items() if key not in cls.model_computed_fields}
        return data


# ---------------------------------------------------------------------------
# Configs
# ---------------------------------------------------------------------------


class SceneConfig(StrictModel):
    """Synthetic ground-truth scene and camera rig."""

    n_splats: int = Field(default=200, description="Ground-truth splat count")
    n_cameras: int = Field(default=16, description="Cameras on the ring")
    image_size: int = Field(default=64, description="Square image side in pixels")
    position_range: float = Field(default=0.7, gt=0, le=1.0, description="Half-width of the position cube")
    scale_min: float = Field(default=0.03, gt=0, description="Smallest per-axis standard deviation")
    scale_max: float = Field(default=0.12, gt=0, description="Largest per-axis standard deviation")
    opacity_min: float = Field(default=0.6, gt=0, lt=1)
    opacity_max: float = Field(default=0.95, gt=0, lt=1)
    camera_radius: float = Field(default=3.0, gt=1.0, description="Ring radius in scene units")
    camera_height: float = Field(default=0.8, description="Ring elevation")
    focal_factor: float = Field(default=1.2, gt=0, description="Focal length as a multiple of image size")
    test_every: int = Field(default=8, ge=2, description="Every n-th camera is held out for testing")

    @model_validator(mode="after")
    def _check_ranges(self) -> "SceneConfig":
        if self.scale_min > self.scale_max:
            raise ValueError("scale_min must not exceed scale_max")
        if self.opacity_min > self.opacity_max:
            raise ValueError("opacity_min must not exceed opacity_max")
        return self


class FreqFilterConfig(StrictModel):
    """Cutoff frequency and exponent of the frequency-aware importance weight."""

    t_ref: float = Field(default=8.0, gt=0, description="Cutoff frequency, cycles per scene unit")
    alpha: float = Field(default=2.0, gt=0, description="Non-linear amplification exponent")


class SpectralConfig(StrictModel):
    """Band selection and angular binning of rendered-image spectra."""

    gamma_min: float = Field(default=0.3, ge=0, le=1)
    gamma_max: float = Field(default=0.9, ge=0, le=1)
    bins: int = Field(default=36, ge=2)
    energy_floor: float = Field(default=1e-12, ge=0)
    min_radius: float = Field(default=0.0, ge=0, description="Optional radial cutoff in frequency bins; 0 = off")

    @model_validator(mode="after")
    def _check_band(self) -> "SpectralConfig":
        if not self.gamma_min < self.gamma_max:
            raise ValueError("gamma_min must be below gamma_max")
        return self


class AttackConfig(StrictModel):
    """Sign-gradient total-variation ascent inside an L-infinity ball."""

    epsilon: float = Field(default=16 / 255, ge=0, le=1)
    steps: int = Field(default=100, ge=1)
    step_size: float | None = Field(default=None, ge=0, description="Default epsilon / 10")
    unconstrained: bool = Field(default=False, description="Drop the epsilon ball, keep only [0, 1]")
    band_width: int | None = Field(
        default=3, ge=1, description="Ascent pooled over screen-aligned bands this many pixels wide; None = per pixel"
    )
    band_axis: Literal["columns", "rows", "random"] = Field(
        default="random", description="Band orientation; random draws one per image from the bundle seed"
    )
    random_start: bool = Field(default=True, description="Start from a uniform draw inside the ball")

    @property
    def effective_step_size(self) -> float:
        if self.step_size is not None:
            return self.step_size
        if self.unconstrained:
            return 16 / 255 / 10
        return self.epsilon / 10


class TrainMode(StrEnum):
    CLEAN = "clean"
    POISONED = "poisoned"
    DEFENDED = "defended"
    BASELINE_UT = "baseline_ut"
    BASELINE_SCORE = "baseline_score"
    BASELINE_SMOOTH = "baseline_smooth"


SCENE_CLASS_PRESETS: dict[str, dict[str, float]] = {
    "small": {"prune_ratio": 0.03, "lambda_freq": 4.0},
    "large": {"prune_ratio": 0.045, "lambda_freq": 4.0},
    "complex": {"prune_ratio": 0.05, "lambda_freq": 5.0},
}


class TrainConfig(StrictModel):
    """All knobs of the training loop, the defense and the baselines."""

    iterations: int = Field(default=2000, ge=1)
    views_per_iteration: int = Field(default=1, ge=1)

    # Adam learning rates per parameter group
    lr_position: float = Field(default=1.6e-3, gt=0)
    lr_position_final: float = Field(default=1.6e-5, gt=0)
    lr_log_scales: float = Field(default=5e-3, gt=0)
    lr_rotation: float = Field(default=1e-3, gt=0)
    lr_color: float = Field(default=1e-2, gt=0)
    lr_opacity: float = Field(default=5e-2, gt=0)
    adam_beta1: float = Field(default=0.9, ge=0, lt=1)
    adam_beta2: float = Field(default=0.999, ge=0, lt=1)
    adam_eps: float = Field(default=1e-15, gt=0)

    # Objective
    lambda_ssim: float = Field(default=0.2, ge=0, le=1, description="D-SSIM weight inside the reconstruction loss")
    lambda_freq: float = Field(default=4.0, ge=0, description="Weight of the spectral + TV regularizers")
    freq_filter: FreqFilterConfig = Field(default_factory=FreqFilterConfig)
    spectral: SpectralConfig = Field(default_factory=SpectralConfig)

    # Frequency-aware pruning
    prune_ratio: float = Field(default=0.03, gt=0, lt=1)
    prune_interval: int = Field(default=100, ge=1)
    view_samples: int = Field(default=48, ge=1)
    prune_warmup: int = Field(default=500, ge=0)
    prune_enabled: bool = True
    min_splats: int = Field(default=16, ge=1)

    # Adaptive densification
    densify_interval: int = Field(default=100, ge=1)
    densify_grad_threshold: float = Field(default=2e-4, gt=0)
    opacity_prune_threshold: float = Field(default=0.005, ge=0, lt=1)
    densify_until_fraction: float = Field(default=0.6, ge=0, le=1)
    percent_dense: float = Field(default=0.01, gt=0)
    split_factor: float = Field(default=1.6, gt=1)

    # Resolution calibration: view-space gradients and total variation both scale as 1 / image width
    reference_width: int | None = Field(
        default=1600, ge=1, description="Width the densify threshold and lambda_freq hold at; None = use them as given"
    )

    # Mode and baselines
    mode: TrainMode = TrainMode.CLEAN
    ut_cap: int | None = Field(default=None, ge=1, description="Universal Gaussian threshold; None = unbounded")
    smooth_sigma: float = Field(default=1.0, gt=0, description="Target blur for baseline_smooth, pixels")
    train_bundle: Literal["clean", "poisoned"] | None = Field(
        default=None, description="Bundle to train on; None = clean for the clean mode, poisoned otherwise"
    )

    # Initialization and rendering
    init_fraction: float = Field(default=0.1, gt=0, le=1)
    init_jitter: float = Field(default=0.02, ge=0)
    background: tuple[float, float, float] = (0.0, 0.0, 0.0)
    fps_repeats: int = Field(default=3, ge=3)

    @property
    def densify_until(self) -> int:
        return int(self.densify_until_fraction * self.iterations)

    @property
    def effective_lambda_freq(self) -> float:
        """Regularizer weight actually applied; only the defended mode regularizes."""
        return self.lambda_freq if self.mode == TrainMode.DEFENDED else 0.0

    def lambda_freq_at(self, width: int) -> float:
        """Effective regularizer weight for images of the given width."""
        if self.reference_width is None:
            return self.effective_lambda_freq
        return self.effective_lambda_freq * width / self.reference_width

    def densify_threshold_at(self, width: int) -> float:
        """Densification gradient threshold for images of the given width."""
        if self.reference_width is None:
            return self.densify_grad_threshold
        return self.densify_grad_threshold * self.reference_width / width

    @property
    def prunes_by_score(self) -> bool:
        return self.prune_enabled and self.mode in (TrainMode.DEFENDED, TrainMode.BASELINE_SCORE)

    @classmethod
    def for_scene_class(cls, scene_class: str, **overrides) -> "TrainConfig":
        """Defaults with the pruning ratio and loss weight tuned for a scene class (small/large/complex)."""
        if scene_class not in SCENE_CLASS_PRESETS:
            raise ValueError(f"Unknown scene class {scene_class!r}; expected one of {sorted(SCENE_CLASS_PRESETS)}")
        return cls.model_validate({**SCENE_CLASS_PRESETS[scene_class], **overrides})


# ---------------------------------------------------------------------------
# On-disk records
# ---------------------------------------------------------------------------


class CameraRecord(StrictModel):
    """One entry of cameras.json."""

    fx: float
    fy: float
    cx: float
    cy: float
    rotation: list[float] = Field(..., min_length=9, max_length=9, description="Row-major world-to-camera")
    translation: list[float] = Field(..., min_length=3, max_length=3)
    width: int = Field(..., gt=0)
    height: int = Field(..., gt=0)
    split: Literal["train", "test"]


class BundleMetadata(StrictModel):
    """bundle.json: provenance of a dataset bundle directory."""

    format_version: int = FORMAT_VERSION
    seed: int
    kind: Literal["clean", "poisoned"] = "clean"
    scene: SceneConfig | None = None
    attack: AttackConfig | None = None


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


class IterationRecord(StrictModel):
    iteration: int
    gaussian_count: int
    loss_total: float
    loss_recon: float
    loss_freq: float
    loss_tv: float
    densify_added: int = 0
    densify_removed: int = 0
    freq_pruned: int = 0


class TrainEvent(StrictModel):
    iteration: int
    kind: Literal["densify", "prune"]
    added: int = 0
    removed: int = 0
    skipped: bool = False
    detail: str = ""


class TrainSummary(StrictModel):
    max_gaussian_count: int
    final_gaussian_count: int
    wall_time_sec: float
    test_psnr: float
    test_ssim: float
    fps: float

    @computed_field
    @property
    def peak_memory_proxy(self) -> int:
        """Bytes: peak splat count times the persisted splat size."""
        return self.max_gaussian_count * BYTES_PER_SPLAT


WALL_CLOCK_FIELDS = {"wall_time_sec", "fps"}

ITERATION_CSV_COLUMNS = list(IterationRecord.model_fields)


class TrainReport(StrictModel):
    """Telemetry of one training run."""

    mode: TrainMode
    seed: int
    config: TrainConfig
    iterations: list[IterationRecord] = Field(default_factory=list)
    events: list[TrainEvent] = Field(default_factory=list)
    summary: TrainSummary | None = None

    def deterministic_dump(self) -> str:
        """JSON without wall-clock fields; identical for identical (seed, config, bundle)."""
        return self.model_dump_json(indent=2, exclude={"summary": WALL_CLOCK_FIELDS})

    def to_csv(self) -> str:
        """Per-iteration telemetry as CSV with a seed header line."""
        lines = [f"# seed={self.seed} mode={self.mode.value}", ",".join(ITERATION_CSV_COLUMNS)]
        for record in self.iterations:
            row = record.model_dump()
            lines.append(",".join(repr(row[col]) if isinstance(row[col], float) else str(row[col])
                                  for col in ITERATION_CSV_COLUMNS))
        return "\n".join(lines) + "\n"


class PoisonImageRecord(StrictModel):
    index: int
    tv_ratio: float
    linf: float
    anisotropy_delta: float
    psnr: float


class PoisonReport(StrictModel):
    seed: int
    attack: AttackConfig | None = None
    images: list[PoisonImageRecord]

    @computed_field
    @property
    def mean_tv_ratio(self) -> float:
        return sum(r.tv_ratio for r in self.images) / max(len(self.images), 1)

    @computed_field
    @property
    def mean_anisotropy_delta(self) -> float:
        return sum(r.anisotropy_delta for r in self.images) / max(len(self.images), 1)

    @computed_field
    @property
    def max_linf(self) -> float:
        return max((r.linf for r in self.images), default=0.0)


class EvalMetrics(StrictModel):
    """Test-split quality and speed of a trained cloud, always against clean targets."""

    mode: str
    seed: int
    n_views: int
    psnr: float
    ssim: float
    fps: float
    mean_anisotropy: float


class ExperimentSpec(StrictModel):
    """Everything one clean/poison/defense experiment needs."""

    seed: int = 1
    scene: SceneConfig = Field(default_factory=SceneConfig)
    attack: AttackConfig = Field(default_factory=AttackConfig)
    train: dict[TrainMode, TrainConfig] = Field(
        default_factory=lambda: {
            TrainMode.CLEAN: TrainConfig(mode=TrainMode.CLEAN),
            TrainMode.POISONED: TrainConfig(mode=TrainMode.POISONED),
            TrainMode.DEFENDED: TrainConfig(mode=TrainMode.DEFENDED),
        }
    )
    output_dir: Path

    @model_validator(mode="after")
    def _check_modes(self) -> "ExperimentSpec":
        if not self.train:
            raise ValueError("mode list must not be empty")
        for mode, train_config in self.train.items():
            if train_config.mode != mode:
                raise ValueError(f"train config under {mode.value!r} has mode {train_config.mode.value!r}")
        return self


class ResultRow(StrictModel):
    mode: TrainMode
    max_gaussian_count: int
    memory_proxy: int
    train_time_sec: float
    psnr: float
    ssim: float
    fps: float
    mean_anisotropy: float


RATIO_COLUMNS = ("max_gaussian_count", "memory_proxy", "train_time_sec", "fps")


class ResultsTable(StrictModel):
    """Per-mode results; ratio columns are always recomputed from the raw values."""

    seed: int
    rows: list[ResultRow]

    def row(self, mode: TrainMode) -> ResultRow:
        for row in self.rows:
            if row.mode == mode:
                return row
        raise KeyError(mode)

    def ratio(self, mode: TrainMode, column: str) -> float | None:
        """value(mode) / value(clean); None without a clean row or with a zero baseline."""
        if not any(r.mode == TrainMode.CLEAN for r in self.rows):
            return None
        base = getattr(self.row(TrainMode.CLEAN), column)
        if base == 0:
            return None
        return getattr(self.row(mode), column) / base


CONFIG_MODEL_NAMES = frozenset(
    {"SceneConfig", "FreqFilterConfig", "SpectralConfig", "AttackConfig", "TrainConfig", "ExperimentSpec"}
)


class CommandArgs(StrictModel):
    """Validated command-line arguments shared by all harness commands."""

    command: Literal["gen", "poison", "train", "eval", "spectrum", "report"]
    config: Path | None = None
    seed: int | None = None
    out: Path
    mode: TrainMode | None = None


class Manifest(StrictModel):
    """manifests/<command>[-<mode>].json: what a command ran with and what it wrote."""

    command: str
    mode: TrainMode | None = None
    seed: int | None
    tool_version: str
    configs: dict[str, dict] = Field(default_factory=dict)
    inputs: list[str] = Field(default_factory=list)
    outputs: list[str] = Field(default_factory=list)
    modes: list[TrainMode] = Field(default_factory=list, description="Modes an experiment plans to train")


def dump_json(model: BaseModel, path: Path) -> None:
    """Write a model as indented JSON, creating parent directories."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model.model_dump_json(indent=2))


def load_json(path: Path, model_cls: type[BaseModel]):
    return model_cls.model_validate(json.loads(Path(path).read_text()))
