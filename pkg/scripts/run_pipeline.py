#!/usr/bin/env python3
"""Run the full clean / poison / defense experiment and print the results table.

Example:
    python scripts/run_pipeline.py --seed 1 --out experiments/seed1
    python scripts/run_pipeline.py --iterations 300 --modes clean poisoned defended baseline_ut
"""

import argparse
import sys
from pathlib import Path

from tqdm import tqdm

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from gsdefend.core.config import config
from gsdefend.core.models import AttackConfig, ExperimentSpec, SceneConfig, TrainConfig, TrainMode
from gsdefend.harness.pipeline import pipeline_steps, run_experiment
from gsdefend.harness.report import to_markdown


def main():
    parser = argparse.ArgumentParser(
        description="Run generate -> poison -> train x modes -> eval -> spectrum -> report",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )

    parser.add_argument("--seed", "-s", type=int, default=1, help="Experiment seed (default: 1)")
    parser.add_argument("--out", "-o", type=Path, default=None, help="Experiment directory")
    parser.add_argument("--iterations", "-n", type=int, default=2000, help="Training iterations per mode")
    parser.add_argument(
        "--modes",
        nargs="+",
        choices=[m.value for m in TrainMode],
        default=["clean", "poisoned", "defended"],
        help="Training modes (default: clean poisoned defended)",
    )
    parser.add_argument("--scene-class", choices=["small", "large", "complex"], default="small")
    parser.add_argument("--epsilon", type=float, default=16 / 255, help="Attack budget (default: 16/255)")
    parser.add_argument("--image-size", type=int, default=64)

    args = parser.parse_args()
    out = args.out or Path(config.experiment_root) / f"seed{args.seed}"

    spec = ExperimentSpec(
        seed=args.seed,
        scene=SceneConfig(image_size=args.image_size),
        attack=AttackConfig(epsilon=args.epsilon),
        train={
            TrainMode(mode): TrainConfig.for_scene_class(args.scene_class, mode=mode, iterations=args.iterations)
            for mode in args.modes
        },
        output_dir=out,
    )

    print("\n" + "=" * 70)
    print("gsdefend - Full Experiment")
    print("=" * 70)
    print("\nConfiguration:")
    print(f"  Seed: {spec.seed}")
    print(f"  Output: {out}")
    print(f"  Modes: {', '.join(args.modes)}")
    print(f"  Iterations: {args.iterations:,}")
    print(f"  Scene class: {args.scene_class}")
    print(f"  Epsilon: {args.epsilon:.5f}")
    print(f"  Workers: {config.resolved_workers()}")
    print()

    steps = pipeline_steps(spec)
    pbar = tqdm(total=len(steps), desc="Pipeline", unit="step")

    def on_step(label: str) -> None:
        pbar.set_postfix(step=label)
        pbar.update(1)

    table = run_experiment(spec, on_step=on_step)
    pbar.close()

    print("\n" + "=" * 70)
    print("Results")
    print("=" * 70)
    print()
    print(to_markdown(table))

    if TrainMode.CLEAN not in spec.train:
        print("❌ No clean run: ratio columns are n/a")
        sys.exit(1)


if __name__ == "__main__":
    main()
