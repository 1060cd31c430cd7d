"""Imbalanced multiclass text classification: oversampling, linear baselines, evaluation."""

from imbr.errors import ImbrError
from imbr.knn import FeatureMatrix, NeighborTable, knn

__version__ = "0.1.0"

__all__ = ["FeatureMatrix", "ImbrError", "NeighborTable", "knn", "__version__"]
