#!/usr/bin/env python3
"""Attack and defense sweeps over one bundle.

  attack   poison at several budgets; print TV ratio and anisotropy per budget
  budget   poison at several budgets, train poisoned and defended on each; print peak counts
  defense  train the defended mode while varying one hyperparameter; print count, PSNR and FPS

Example:
    python scripts/sweep_attack.py attack --bundle experiments/seed1/clean --epsilons 4 8 16 24 --steps 50
    python scripts/sweep_attack.py budget --bundle experiments/seed1/clean --epsilons 8 16 --iterations 300
    python scripts/sweep_attack.py defense --bundle experiments/seed1/poisoned --key lambda_freq --values 0 1 4 8
    python scripts/sweep_attack.py defense --bundle experiments/seed1/clean --key freq_filter.t_ref --values 2 4 8 16
"""

import argparse
import sys
from pathlib import Path

from tqdm import tqdm

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from gsdefend.attack.poison import attack_strength_sweep
from gsdefend.core.models import AttackConfig, TrainConfig, TrainMode
from gsdefend.harness.ablation import ABLATION_KEYS, ablation_sweep, budget_sweep
from gsdefend.scene.io import load_bundle


def sweep_attack(bundle, args) -> None:
    results = []
    for epsilon in tqdm(args.epsilons, desc="Sweeping", unit="eps"):
        results += attack_strength_sweep(bundle, [epsilon / 255], AttackConfig(steps=args.steps))

    print(f"\n  {'eps (x/255)':>12}  {'TV ratio':>10}  {'anisotropy delta':>17}  {'max L-inf':>10}")
    for epsilon, report in results:
        print(
            f"  {epsilon * 255:>12.1f}  {report.mean_tv_ratio:>10.3f}  "
            f"{report.mean_anisotropy_delta:>17.4f}  {report.max_linf * 255:>10.2f}"
        )

    ratios = [report.mean_tv_ratio for _, report in results]
    if any(later < earlier for earlier, later in zip(ratios, ratios[1:])):
        print("\n❌ TV ratio is not monotone in epsilon")
        sys.exit(1)


def sweep_budget(bundle, args) -> None:
    train_config = TrainConfig.for_scene_class(args.scene_class, iterations=args.iterations)
    points = []
    for epsilon in tqdm(args.epsilons, desc="Sweeping", unit="eps"):
        points += budget_sweep(bundle, [epsilon / 255], AttackConfig(steps=args.steps), train_config, args.seed)

    print(f"\n  {'eps (x/255)':>12}  {'TV ratio':>10}  {'poisoned':>10}  {'defended':>10}  {'defended PSNR':>14}")
    for point in points:
        print(
            f"  {point.epsilon * 255:>12.1f}  {point.poison.mean_tv_ratio:>10.3f}  "
            f"{point.poisoned.max_gaussian_count:>10}  {point.defended.max_gaussian_count:>10}  "
            f"{point.defended.test_psnr:>14.2f}"
        )


def sweep_defense(bundle, args) -> None:
    base = TrainConfig.for_scene_class(args.scene_class, mode=TrainMode.DEFENDED, iterations=args.iterations)
    points = []
    for value in tqdm(args.values, desc=f"Sweeping {args.key}", unit="run"):
        points += ablation_sweep(bundle, base, args.key, [value], args.seed)

    print(f"\n  {args.key:>20}  {'peak splats':>12}  {'PSNR':>8}  {'SSIM':>8}  {'FPS':>8}")
    for point in points:
        summary = point.summary
        print(
            f"  {point.value:>20g}  {summary.max_gaussian_count:>12}  {summary.test_psnr:>8.2f}  "
            f"{summary.test_ssim:>8.4f}  {summary.fps:>8.1f}"
        )


def main():
    parser = argparse.ArgumentParser(
        description="Attack-strength and defense ablation sweeps",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="sweep", required=True)

    attack = sub.add_parser("attack", help="TV ratio and anisotropy over epsilon")
    budget = sub.add_parser("budget", help="Poisoned and defended peak counts over epsilon")
    defense = sub.add_parser("defense", help="Defended runs over one hyperparameter")

    for p in (attack, budget, defense):
        p.add_argument("--bundle", "-b", type=Path, required=True, help="Bundle directory")
    for p in (attack, budget):
        p.add_argument(
            "--epsilons", "-e", type=float, nargs="+", default=[8, 16, 24], help="Budgets in 1/255 (default: 8 16 24)"
        )
        p.add_argument("--steps", "-n", type=int, default=100, help="Ascent steps (default: 100)")
    for p in (budget, defense):
        p.add_argument("--iterations", type=int, default=2000, help="Training iterations per run (default: 2000)")
        p.add_argument("--scene-class", choices=["small", "large", "complex"], default="small")
        p.add_argument("--seed", "-s", type=int, default=1, help="Training seed (default: 1)")
    defense.add_argument("--key", "-k", choices=ABLATION_KEYS, required=True, help="TrainConfig key to vary")
    defense.add_argument("--values", "-v", type=float, nargs="+", required=True, help="Values of the key")

    args = parser.parse_args()

    if not (args.bundle / "cameras.json").exists():
        print(f"❌ Not a bundle directory: {args.bundle}")
        print("   Create one first: gsdefend gen --out <dir>")
        sys.exit(1)

    bundle = load_bundle(args.bundle)

    print("\n" + "=" * 70)
    print(f"gsdefend - {args.sweep.capitalize()} Sweep")
    print("=" * 70)
    print("\nConfiguration:")
    print(f"  Bundle: {args.bundle}")
    print(f"  Train images: {len(bundle.train_views)}")
    if args.sweep == "defense":
        print(f"  Key: {args.key}")
        print(f"  Values: {', '.join(f'{v:g}' for v in args.values)}")
    else:
        print(f"  Epsilons (x/255): {', '.join(f'{e:g}' for e in args.epsilons)}")
    print()

    {"attack": sweep_attack, "budget": sweep_budget, "defense": sweep_defense}[args.sweep](bundle, args)
    print()


if __name__ == "__main__":
    main()
