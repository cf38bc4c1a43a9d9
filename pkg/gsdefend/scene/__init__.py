"""Scene domain types, covariance algebra, synthetic scenes and persistence."""

from gsdefend.scene.types import Camera, DatasetBundle, GaussianCloud, GaussianSplat, ImageBuffer

__all__ = ["Camera", "DatasetBundle", "GaussianCloud", "GaussianSplat", "ImageBuffer"]
