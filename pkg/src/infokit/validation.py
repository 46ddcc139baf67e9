"""Input validation helpers and deterministic seed derivation."""

from __future__ import annotations

import os

import numpy as np

from .errors import (
    DimensionMismatchError,
    NonFiniteInputError,
    TooFewPointsError,
)


def as_sample(x, name: str = "sample", min_n: int = 1) -> np.ndarray:
    """Coerce ``x`` to an N x d float64 matrix of observations.

    1-D input is treated as a single column.  Raises NonFiniteInputError
    on NaN/inf entries and TooFewPointsError when fewer than ``min_n``
    rows are present.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[1] < 1:
        raise DimensionMismatchError(
            f"{name} must be an N x d matrix, got shape {arr.shape}"
        )
    if arr.shape[0] < min_n:
        raise TooFewPointsError(
            f"{name} needs at least {min_n} observations, got {arr.shape[0]}"
        )
    if not np.isfinite(arr).all():
        raise NonFiniteInputError(f"{name} contains NaN or infinite entries")
    return arr


def require_same_dim(x: np.ndarray, y: np.ndarray) -> int:
    if x.shape[1] != y.shape[1]:
        raise DimensionMismatchError(
            f"samples must share a dimension, got d={x.shape[1]} and d={y.shape[1]}"
        )
    return x.shape[1]


def derived_rng(seed: int, *keys: int) -> np.random.Generator:
    """Generator for the stream identified by (seed, *keys).

    Seed splitting is by SeedSequence over the integer tuple, so every
    (seed, keys) pair maps to a fixed, platform-independent stream.
    """
    return np.random.default_rng([int(seed), *[int(k) for k in keys]])


def thread_count() -> int:
    """Worker count for parallelizable queries, from ITE_THREADS (0 = auto)."""
    raw = os.environ.get("ITE_THREADS", "0")
    try:
        value = int(raw)
    except ValueError:
        value = 0
    if value <= 0:
        return -1
    return value
