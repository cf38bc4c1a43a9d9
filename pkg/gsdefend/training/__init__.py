"""Defense trainer: objective, optimizer, densification, pruning and the training loop."""

from gsdefend.training.densify import densify_and_prune
from gsdefend.training.objective import total_loss
from gsdefend.training.pruning import frequency_prune
from gsdefend.training.trainer import train

__all__ = ["densify_and_prune", "frequency_prune", "total_loss", "train"]
