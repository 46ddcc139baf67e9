"""Nonparametric information-theoretic estimators and an ISA pipeline.

Estimators of entropy, mutual information, divergence, association,
cross-entropy, and kernels on distributions share one calling
convention: ``initialize(kind, name, mult, overrides)`` builds an
immutable config, ``estimate(config, *samples)`` evaluates it, for base
and meta (composed) estimators alike.
"""

from . import dependence, divergence, entropy, errors, geometry, isa, kernels
from .framework import (
    EstimatorConfig,
    EstimatorDescriptor,
    MeasureKind,
    estimate,
    initialize,
    kernel_gram,
    list_estimators,
    reseeded,
)

__version__ = "0.1.0"

__all__ = [
    "EstimatorConfig",
    "EstimatorDescriptor",
    "MeasureKind",
    "estimate",
    "initialize",
    "kernel_gram",
    "list_estimators",
    "reseeded",
    "dependence",
    "divergence",
    "entropy",
    "errors",
    "geometry",
    "isa",
    "kernels",
]
