"""Classical and quantum-kernel SVM classification of omics data with
ridge-ranked feature groups, simulated on dense statevectors."""

__version__ = "0.1.0"

from .kernels import KernelSpec, cross_gram_matrix, gram_matrix, kernel_value
from .preprocessing import AngleRangeScaler, LogMinMaxScaler, PCAProjector
from .ranking import RidgeRanker
from .svm import KernelSVC

__all__ = [
    "AngleRangeScaler",
    "KernelSVC",
    "KernelSpec",
    "LogMinMaxScaler",
    "PCAProjector",
    "RidgeRanker",
    "cross_gram_matrix",
    "gram_matrix",
    "kernel_value",
]
