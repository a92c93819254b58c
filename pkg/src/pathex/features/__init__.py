"""Per-object feature families and their shared math helpers."""

from .shape import shape_features
from .texture import texture_features
from .intensity import intensity_features
from .distribution import distribution_features

__all__ = [
    "shape_features",
    "texture_features",
    "intensity_features",
    "distribution_features",
]
