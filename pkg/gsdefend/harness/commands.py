"""Harness commands.

Each step reads its inputs from one experiment directory and writes its outputs back under
it, finishing with a manifest. The ``cmd_*`` functions adapt validated CLI arguments to
the steps; ``run_experiment`` chains the steps directly.

NO try-catch blocks - the CLI maps exceptions to exit codes.
"""

import logging
from pathlib import Path

import numpy as np
from pydantic import BaseModel

from gsdefend import __version__
from gsdefend.attack.poison import poison_images, poison_report
from gsdefend.core.config import load_config_file
from gsdefend.core.errors import MissingArtifactError
from gsdefend.core.models import (
    AttackConfig,
    CommandArgs,
    EvalMetrics,
    Manifest,
    PoisonReport,
    ResultRow,
    ResultsTable,
    SceneConfig,
    SpectralConfig,
    TrainConfig,
    TrainMode,
    TrainReport,
    dump_json,
    load_json,
)
from gsdefend.core.parallel import ordered_map
from gsdefend.harness.layout import ExperimentLayout
from gsdefend.harness.report import to_csv, to_markdown
from gsdefend.render.metrics import metric_fps, metric_psnr, metric_ssim
from gsdefend.render.rasterizer import render
from gsdefend.scene.io import load_bundle, load_cloud, load_image, save_bundle, save_cloud, save_image
from gsdefend.scene.synthetic import generate_synthetic_scene
from gsdefend.scene.types import ImageBuffer
from gsdefend.spectral.analysis import (
    Spectrum,
    angular_histogram,
    band_mask,
    bin_centers,
    dft2,
    normalize_amplitude,
    radial_energy_profile,
    spectrum_heatmap,
)
from gsdefend.spectral.regularizer import mean_anisotropy
from gsdefend.training.trainer import train

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

DEFAULT_SEED = 1
PROTOCOL_MODES = (TrainMode.CLEAN, TrainMode.POISONED, TrainMode.DEFENDED)
RADIAL_RINGS = 16
UT_CAP_FACTOR = 2


def _require_dir(path: Path, hint: str) -> None:
    if not path.is_dir():
        raise MissingArtifactError(f"{path} not found ({hint})")


def _require_file(path: Path, hint: str) -> None:
    if not path.is_file():
        raise MissingArtifactError(f"{path} not found ({hint})")


def _write_manifest(
    layout: ExperimentLayout,
    command: str,
    seed: int | None,
    configs: dict[str, BaseModel],
    inputs: list[Path],
    outputs: list[Path],
    mode: TrainMode | None = None,
    modes: list[TrainMode] | None = None,
) -> None:
    manifest = Manifest(
        command=command,
        mode=mode,
        seed=seed,
        modes=modes or [],
        tool_version=__version__,
        configs={name: model.model_dump(mode="json") for name, model in configs.items()},
        inputs=[str(p.relative_to(layout.root)) for p in inputs],
        outputs=[str(p.relative_to(layout.root)) for p in outputs],
    )
    dump_json(manifest, layout.manifest(command, mode))


# ---------------------------------------------------------------------------
# Steps
# ---------------------------------------------------------------------------


def plan(layout: ExperimentLayout, modes: list[TrainMode], seed: int) -> None:
    """Record the modes an experiment will train; report fails until each has a report and metrics."""
    ordered = sorted(set(modes), key=list(TrainMode).index)
    _write_manifest(layout, "plan", seed, {}, [], [], modes=ordered)
    logger.info(f"Planned modes: {[m.value for m in ordered]}")


def expected_modes(layout: ExperimentLayout) -> list[TrainMode]:
    """Modes recorded by plan(); the clean, poisoned and defended trio when no plan was written."""
    if layout.plan_manifest.is_file():
        return load_json(layout.plan_manifest, Manifest).modes
    return list(PROTOCOL_MODES)


def generate(layout: ExperimentLayout, scene: SceneConfig, seed: int) -> None:
    """Render a synthetic scene into clean/ and persist its ground-truth cloud."""
    ground_truth, bundle = generate_synthetic_scene(seed, scene=scene)
    save_bundle(bundle, layout.clean_dir)
    save_cloud(ground_truth, layout.ground_truth)
    _write_manifest(layout, "gen", seed, {"scene": scene}, [], [layout.clean_dir, layout.ground_truth])


def poison(layout: ExperimentLayout, attack: AttackConfig) -> PoisonReport:
    """Poison clean/ into poisoned/ and write poison_report.json."""
    _require_dir(layout.clean_dir, "run 'gen' first")
    clean = load_bundle(layout.clean_dir)
    poisoned = poison_images(clean, attack)
    save_bundle(poisoned, layout.poisoned_dir)

    findings = poison_report(clean, poisoned)
    dump_json(findings, layout.poison_report)
    logger.info(f"Mean TV ratio {findings.mean_tv_ratio:.3f}, max L-inf {findings.max_linf:.5f}")
    _write_manifest(
        layout,
        "poison",
        clean.metadata.seed,
        {"attack": attack},
        [layout.clean_dir],
        [layout.poisoned_dir, layout.poison_report],
    )
    return findings


def resolve_ut_cap(layout: ExperimentLayout, config: TrainConfig) -> TrainConfig:
    """Fill an unset UT cap with twice the clean run's peak count; leave it unbounded without a clean run."""
    if config.mode != TrainMode.BASELINE_UT or config.ut_cap is not None:
        return config
    clean_report = layout.run_report(TrainMode.CLEAN)
    if not clean_report.is_file():
        logger.warning("No clean run found; baseline_ut runs without a cap")
        return config
    summary = load_json(clean_report, TrainReport).summary
    cap = UT_CAP_FACTOR * summary.max_gaussian_count
    logger.info(f"UT cap set to {cap} ({UT_CAP_FACTOR}x clean peak)")
    return config.model_copy(update={"ut_cap": cap})


def train_mode(layout: ExperimentLayout, config: TrainConfig, seed: int | None = None) -> TrainReport:
    """Train one mode on its bundle and write cloud, reports and per-iteration CSV under runs/<mode>/."""
    mode = config.mode
    bundle_dir = layout.bundle_for(mode, config.train_bundle)
    _require_dir(bundle_dir, "run 'gen' and 'poison' first")
    bundle = load_bundle(bundle_dir)
    seed = bundle.metadata.seed if seed is None else seed
    config = resolve_ut_cap(layout, config)

    run_dir = layout.run_dir(mode)
    run_dir.mkdir(parents=True, exist_ok=True)
    cloud, run_report = train(bundle, config, seed, dump_dir=run_dir)

    save_cloud(cloud, layout.run_cloud(mode))
    dump_json(run_report, layout.run_report(mode))
    layout.run_deterministic_report(mode).write_text(run_report.deterministic_dump())
    layout.run_iterations(mode).write_text(run_report.to_csv())
    _write_manifest(
        layout,
        "train",
        seed,
        {"train": config},
        [bundle_dir],
        [layout.run_cloud(mode), layout.run_report(mode), layout.run_iterations(mode)],
        mode=mode,
    )
    return run_report


def evaluate(
    layout: ExperimentLayout,
    mode: TrainMode,
    spectral: SpectralConfig,
    repeats: int = 3,
    background: tuple[float, float, float] = (0.0, 0.0, 0.0),
) -> EvalMetrics:
    """Render the test split with a trained cloud and score it against the clean test images."""
    _require_file(layout.run_cloud(mode), f"run 'train --mode {mode.value}' first")
    _require_dir(layout.clean_dir, "run 'gen' first")
    cloud = load_cloud(layout.run_cloud(mode))
    bundle = load_bundle(layout.clean_dir)
    views = bundle.test_views or bundle.train_views

    renders = ordered_map(lambda view: render(cloud, view[0], background).image, views)
    for index, image in enumerate(renders):
        save_image(image, layout.run_renders(mode) / f"test_{index:03d}.png")

    metrics = EvalMetrics(
        mode=mode.value,
        seed=bundle.metadata.seed,
        n_views=len(views),
        psnr=float(np.mean([metric_psnr(r, target) for r, (_, target) in zip(renders, views)])),
        ssim=float(np.mean([metric_ssim(r, target) for r, (_, target) in zip(renders, views)])),
        fps=metric_fps(cloud, [camera for camera, _ in views], repeats, background),
        mean_anisotropy=mean_anisotropy(renders, spectral),
    )
    dump_json(metrics, layout.run_metrics(mode))
    logger.info(f"{mode.value}: PSNR {metrics.psnr:.2f} dB, SSIM {metrics.ssim:.4f}, FPS {metrics.fps:.1f}")
    _write_manifest(
        layout,
        "eval",
        bundle.metadata.seed,
        {"spectral": spectral},
        [layout.run_cloud(mode), layout.clean_dir],
        [layout.run_metrics(mode), layout.run_renders(mode)],
        mode=mode,
    )
    return metrics


def write_spectrum(directory: Path, images: list[ImageBuffer], spectral: SpectralConfig, seed: int) -> None:
    """
    Heatmap of the mean amplitude, pooled angular histogram and mean radial profile of a set of images.

    Both CSVs start with a '# seed=N' line.
    """
    directory.mkdir(parents=True, exist_ok=True)
    spectra = [dft2(image) for image in images]
    save_image(spectrum_heatmap(Spectrum(np.mean([s.amplitude for s in spectra], axis=0))), directory / "heatmap.png")

    energies = np.zeros(spectral.bins)
    for spec in spectra:
        mask = band_mask(normalize_amplitude(spec), spectral)
        energies += angular_histogram(spec, mask, spectral.bins, spectral.energy_floor).energies
    total = energies.sum()
    probs = energies / total if total >= spectral.energy_floor else np.zeros_like(energies)
    rows = [f"# seed={seed}", "bin_index,angle_center_rad,energy,probability"]
    rows += [f"{b},{angle!r},{energies[b]!r},{probs[b]!r}" for b, angle in enumerate(bin_centers(spectral.bins).tolist())]
    (directory / "angular_histogram.csv").write_text("\n".join(rows) + "\n")

    profiles = np.array([[energy for _, energy in radial_energy_profile(s, RADIAL_RINGS)] for s in spectra])
    radii = [radius for radius, _ in radial_energy_profile(spectra[0], RADIAL_RINGS)]
    rows = [f"# seed={seed}", "radius,mean_energy"]
    rows += [f"{r!r},{e!r}" for r, e in zip(radii, profiles.mean(axis=0).tolist())]
    (directory / "radial_profile.csv").write_text("\n".join(rows) + "\n")


def spectrum(layout: ExperimentLayout, spectral: SpectralConfig, mode: TrainMode | None = None) -> list[Path]:
    """
    Spectral diagnostics.

    Without a mode: the clean and (when present) poisoned training images. With a mode: that
    run's evaluated test renders. Outputs go to spectrum/<target>/.
    """
    _require_dir(layout.clean_dir, "run 'gen' first")
    clean = load_bundle(layout.clean_dir)
    seed = clean.metadata.seed
    targets: dict[str, list[ImageBuffer]] = {}
    inputs: list[Path] = []
    if mode is None:
        targets["clean"] = clean.train_images
        inputs.append(layout.clean_dir)
        if layout.poisoned_dir.is_dir():
            targets["poisoned"] = load_bundle(layout.poisoned_dir).train_images
            inputs.append(layout.poisoned_dir)
    else:
        renders = sorted(layout.run_renders(mode).glob("test_*.png"))
        if not renders:
            raise MissingArtifactError(f"no renders in {layout.run_renders(mode)} (run 'eval --mode {mode.value}' first)")
        targets[f"run-{mode.value}"] = [load_image(path) for path in renders]
        inputs.append(layout.run_renders(mode))

    outputs = []
    for target, images in targets.items():
        write_spectrum(layout.spectrum_dir(target), images, spectral, seed)
        outputs.append(layout.spectrum_dir(target))
        logger.info(f"Spectrum of {target}: mean anisotropy {mean_anisotropy(images, spectral):.4f}")
    _write_manifest(layout, "spectrum", seed, {"spectral": spectral}, inputs, outputs, mode=mode)
    return outputs


def build_results(layout: ExperimentLayout) -> ResultsTable:
    """
    Collect the expected modes, plus any other trained mode, into a ResultsTable.

    Raises:
        MissingArtifactError: If an expected mode has no report.json or metrics.json, or a trained mode lacks one
    """
    expected = expected_modes(layout)
    missing = [
        mode for mode in expected if not (layout.run_report(mode).is_file() and layout.run_metrics(mode).is_file())
    ]
    if missing:
        raise MissingArtifactError(
            f"results incomplete, missing {[m.value for m in missing]} under {layout.runs_dir} "
            "(run 'train' and 'eval' for each)"
        )
    modes = sorted(set(expected) | set(layout.trained_modes()), key=list(TrainMode).index)
    if not modes:
        raise MissingArtifactError(f"no runs under {layout.runs_dir}")

    rows = []
    seed = None
    for mode in modes:
        _require_file(layout.run_report(mode), f"run 'train --mode {mode.value}'")
        _require_file(layout.run_metrics(mode), f"run 'eval --mode {mode.value}'")
        run_report = load_json(layout.run_report(mode), TrainReport)
        metrics = load_json(layout.run_metrics(mode), EvalMetrics)
        seed = run_report.seed if seed is None else seed
        rows.append(
            ResultRow(
                mode=mode,
                max_gaussian_count=run_report.summary.max_gaussian_count,
                memory_proxy=run_report.summary.peak_memory_proxy,
                train_time_sec=run_report.summary.wall_time_sec,
                psnr=metrics.psnr,
                ssim=metrics.ssim,
                fps=metrics.fps,
                mean_anisotropy=metrics.mean_anisotropy,
            )
        )
    return ResultsTable(seed=seed, rows=rows)


def report(layout: ExperimentLayout) -> ResultsTable:
    """Write results.csv, results.md and results.json; nothing is written if any artifact is missing."""
    table = build_results(layout)
    layout.results_csv.write_text(to_csv(table))
    layout.results_md.write_text(to_markdown(table))
    dump_json(table, layout.results_json)
    _write_manifest(
        layout,
        "report",
        table.seed,
        {},
        [layout.run_dir(row.mode) for row in table.rows],
        [layout.results_csv, layout.results_md, layout.results_json],
    )
    return table


# ---------------------------------------------------------------------------
# CLI adapters
# ---------------------------------------------------------------------------


def load_command_config(args: CommandArgs, model_cls: type[BaseModel], **overrides) -> BaseModel:
    """
    Build a command's config from --config (when given) plus non-None overrides.

    Raises:
        MissingArtifactError: If --config names a missing file
        ConfigurationError: On malformed lines
        ValidationError: On unknown keys or invalid values
    """
    overrides = {key: value for key, value in overrides.items() if value is not None}
    if args.config is None:
        return model_cls.model_validate(overrides)
    _require_file(args.config, "--config")
    return load_config_file(args.config, model_cls, **overrides)


def cmd_gen(args: CommandArgs) -> None:
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    generate(ExperimentLayout(args.out), load_command_config(args, SceneConfig), seed)


def cmd_poison(args: CommandArgs) -> None:
    poison(ExperimentLayout(args.out), load_command_config(args, AttackConfig))


def cmd_train(args: CommandArgs) -> None:
    train_mode(ExperimentLayout(args.out), load_command_config(args, TrainConfig, mode=args.mode), args.seed)


def cmd_eval(args: CommandArgs) -> None:
    layout = ExperimentLayout(args.out)
    mode = args.mode or TrainMode.CLEAN
    spectral, repeats, background = SpectralConfig(), 3, (0.0, 0.0, 0.0)
    if layout.run_report(mode).is_file():
        run_config = load_json(layout.run_report(mode), TrainReport).config
        spectral, repeats, background = run_config.spectral, run_config.fps_repeats, run_config.background
    if args.config is not None:
        spectral = load_command_config(args, SpectralConfig)
    evaluate(layout, mode, spectral, repeats, background)


def cmd_spectrum(args: CommandArgs) -> None:
    spectrum(ExperimentLayout(args.out), load_command_config(args, SpectralConfig), args.mode)


def cmd_report(args: CommandArgs) -> None:
    table = report(ExperimentLayout(args.out))
    print(to_markdown(table))


COMMANDS = {
    "gen": cmd_gen,
    "poison": cmd_poison,
    "train": cmd_train,
    "eval": cmd_eval,
    "spectrum": cmd_spectrum,
    "report": cmd_report,
}
