"""Poisoning-attack simulator."""

from gsdefend.attack.poison import attack_strength_sweep, poison_images, poison_report

__all__ = ["attack_strength_sweep", "poison_images", "poison_report"]
