"""Canonical file locations inside one experiment directory."""

from dataclasses import dataclass
from pathlib import Path

from gsdefend.core.models import TrainMode


@dataclass(frozen=True)
class ExperimentLayout:
    root: Path

    @property
    def clean_dir(self) -> Path:
        return self.root / "clean"

    @property
    def poisoned_dir(self) -> Path:
        return self.root / "poisoned"

    @property
    def ground_truth(self) -> Path:
        return self.root / "ground_truth.gspl"

    @property
    def poison_report(self) -> Path:
        return self.root / "poison_report.json"

    @property
    def runs_dir(self) -> Path:
        return self.root / "runs"

    def bundle_for(self, mode: TrainMode, source: str | None = None) -> Path:
        """The named bundle; without one, clean runs train on clean/ and every other mode on poisoned/."""
        if source is None:
            source = "clean" if mode == TrainMode.CLEAN else "poisoned"
        return self.clean_dir if source == "clean" else self.poisoned_dir

    def run_dir(self, mode: TrainMode) -> Path:
        return self.runs_dir / mode.value

    def run_cloud(self, mode: TrainMode) -> Path:
        return self.run_dir(mode) / "cloud.gspl"

    def run_report(self, mode: TrainMode) -> Path:
        return self.run_dir(mode) / "report.json"

    def run_deterministic_report(self, mode: TrainMode) -> Path:
        return self.run_dir(mode) / "report.deterministic.json"

    def run_iterations(self, mode: TrainMode) -> Path:
        return self.run_dir(mode) / "iterations.csv"

    def run_metrics(self, mode: TrainMode) -> Path:
        return self.run_dir(mode) / "metrics.json"

    def run_renders(self, mode: TrainMode) -> Path:
        return self.run_dir(mode) / "renders"

    def trained_modes(self) -> list[TrainMode]:
        """Modes with a run directory, in TrainMode declaration order."""
        return [mode for mode in TrainMode if self.run_dir(mode).is_dir()]

    def spectrum_dir(self, target: str) -> Path:
        return self.root / "spectrum" / target

    @property
    def manifests_dir(self) -> Path:
        return self.root / "manifests"

    def manifest(self, command: str, mode: TrainMode | None = None) -> Path:
        name = command if mode is None else f"{command}-{mode.value}"
        return self.manifests_dir / f"{name}.json"

    @property
    def plan_manifest(self) -> Path:
        return self.manifest("plan")

    @property
    def results_csv(self) -> Path:
        return self.root / "results.csv"

    @property
    def results_md(self) -> Path:
        return self.root / "results.md"

    @property
    def results_json(self) -> Path:
        return self.root / "results.json"
