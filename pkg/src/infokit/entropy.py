"""Base entropy estimators, in nats.

Shannon, Renyi, and Tsallis entropy from k-nearest-neighbor distances
(Kozachenko-Leonenko and Leonenko-Pronzato-Savani estimators) and Renyi
entropy from the Euclidean minimum spanning tree (Hero-Michel style,
with a Monte Carlo calibrated additive constant).
"""

from __future__ import annotations

import math
import threading

import numpy as np

from .errors import DuplicatePointsError, InvalidAlphaError, TooFewPointsError
from .geometry import digamma, euclidean_mst_weight, knn_distances, log_unit_ball_volume
from .validation import as_sample, derived_rng

DEFAULT_K_SHANNON = 3
DEFAULT_K_ALPHA = 5

# MST calibration anchors Uniform[0,1]^d; one constant per (d, alpha).
_MST_CAL_N = 20000
_MST_CAL_REPS = 20
_mst_calibration: dict[tuple[int, float], float] = {}
_mst_lock = threading.Lock()


def _knn_radii(x: np.ndarray, k: int) -> np.ndarray:
    """Self-excluded k-th neighbor distance per point; zero radii are fatal."""
    table = knn_distances(x, x, k, self_excluded=True)
    eps = table.dists[:, k - 1]
    if np.any(eps == 0.0):
        raise DuplicatePointsError(
            "coincident observations give zero k-th neighbor distance;"
            " deduplicate or jitter the sample"
        )
    return eps


def shannon_knn_k(x, k: int = DEFAULT_K_SHANNON) -> float:
    """Kozachenko-Leonenko Shannon entropy estimate.

    H = psi(n) - psi(k) + log c_d + (d/n) sum_i log eps_k(i), with
    eps_k(i) the k-th neighbor distance of point i and c_d the volume
    of the d-dimensional unit ball.
    """
    xs = as_sample(x, "x", min_n=k + 1)
    n, d = xs.shape
    eps = _knn_radii(xs, k)
    return (
        digamma(n)
        - digamma(k)
        + log_unit_ball_volume(d)
        + d * float(np.mean(np.log(eps)))
    )


def _alpha_integral(x: np.ndarray, k: int, alpha: float) -> float:
    """kNN estimate of int f^alpha (Leonenko-Pronzato-Savani).

    I_alpha = (1/n) sum_i [(n-1) C_k c_d eps_k(i)^d]^(1-alpha) where
    C_k = [Gamma(k)/Gamma(k+1-alpha)]^(1/(1-alpha)).
    """
    n, d = x.shape
    if alpha == 1.0 or alpha <= 0:
        raise InvalidAlphaError(f"alpha must be positive and != 1, got {alpha}")
    if k + 1 - alpha <= 0:
        raise InvalidAlphaError(
            f"alpha={alpha} needs k > alpha - 1 (got k={k})"
        )
    eps = _knn_radii(x, k)
    log_ball = log_unit_ball_volume(d)
    exponent = (1.0 - alpha) * (
        math.log(n - 1) + log_ball + d * np.log(eps)
    ) + (math.lgamma(k) - math.lgamma(k + 1 - alpha))
    return float(np.mean(np.exp(exponent)))


def renyi_knn_k(x, alpha: float, k: int = DEFAULT_K_ALPHA) -> float:
    """Renyi entropy of order alpha: log(I_alpha) / (1 - alpha)."""
    xs = as_sample(x, "x", min_n=k + 1)
    return math.log(_alpha_integral(xs, k, alpha)) / (1.0 - alpha)


def tsallis_knn_k(x, alpha: float, k: int = DEFAULT_K_ALPHA) -> float:
    """Tsallis entropy of order alpha: (1 - I_alpha) / (alpha - 1)."""
    xs = as_sample(x, "x", min_n=k + 1)
    return (1.0 - _alpha_integral(xs, k, alpha)) / (alpha - 1.0)


def _mst_raw(x: np.ndarray, alpha: float) -> float:
    n, d = x.shape
    gamma = d * (1.0 - alpha)
    weight = euclidean_mst_weight(x, gamma)
    if weight <= 0.0:
        raise DuplicatePointsError("all observations coincide; MST weight is zero")
    return (math.log(weight) - alpha * math.log(n)) / (1.0 - alpha)


def _mst_constant(d: int, alpha: float) -> float:
    """Additive constant such that Uniform[0,1]^d averages to zero."""
    key = (d, float(alpha))
    with _mst_lock:
        if key in _mst_calibration:
            return _mst_calibration[key]
    rng = derived_rng(0x4D53, d, int(round(alpha * 1e9)))
    values = [
        _mst_raw(rng.random((_MST_CAL_N, d)), alpha) for _ in range(_MST_CAL_REPS)
    ]
    constant = -float(np.mean(values))
    with _mst_lock:
        _mst_calibration.setdefault(key, constant)
        return _mst_calibration[key]


def renyi_mst(x, alpha: float, mult: bool = True) -> float:
    """Renyi entropy of order alpha in (0,1) from the Euclidean MST.

    The raw statistic log(L_gamma / n^alpha) / (1 - alpha), with
    gamma = d(1-alpha), estimates H_alpha only up to an additive
    constant depending on (d, alpha).  With ``mult`` the constant is
    removed using a cached Monte Carlo calibration against
    Uniform[0,1]^d (for which H_alpha = 0); without it the raw
    statistic is returned.
    """
    xs = as_sample(x, "x")
    if xs.shape[0] < 2:
        raise TooFewPointsError("renyi_mst needs at least 2 points")
    if not 0.0 < alpha < 1.0:
        raise InvalidAlphaError(f"renyi_mst requires 0 < alpha < 1, got {alpha}")
    raw = _mst_raw(xs, alpha)
    if not mult:
        return raw
    return raw + _mst_constant(xs.shape[1], alpha)
