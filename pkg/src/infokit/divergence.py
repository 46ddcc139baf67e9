"""Two-sample divergence estimators.

kNN-based Kullback-Leibler, Renyi, Tsallis and L2 divergences
(Wang-Kulkarni-Verdu and Poczos-Schneider style), Gaussian-kernel
maximum mean discrepancy, energy distance, and the composed J-distance
and Jensen-Shannon estimators.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .errors import (
    BandwidthError,
    DuplicatePointsError,
    InvalidAlphaError,
    InvalidParameterError,
    WeightError,
)
from .entropy import _knn_radii
from .geometry import knn_distances, log_unit_ball_volume
from .validation import as_sample, derived_rng, require_same_dim

DEFAULT_K = 5

_MEDIAN_SUBSAMPLE = 2000
_JS_STREAM = 0x4A53


def _cross_radii(x: np.ndarray, y: np.ndarray, k: int) -> np.ndarray:
    """k-th neighbor distance of each x_i within the sample y."""
    table = knn_distances(y, x, k, self_excluded=False)
    nu = table.dists[:, k - 1]
    if np.any(nu == 0.0):
        raise DuplicatePointsError(
            "a point of the first sample coincides with one of the second"
        )
    return nu


def kl_knn_k(x, y, k: int = DEFAULT_K) -> float:
    """Kullback-Leibler divergence D(P||Q) from samples X~P, Y~Q, in nats.

    D = (d/n) sum_i log(nu_k(i)/rho_k(i)) + log(m/(n-1)), with rho the
    within-X and nu the X-to-Y k-th neighbor distances.
    """
    xs = as_sample(x, "x", min_n=k + 1)
    ys = as_sample(y, "y", min_n=k)
    d = require_same_dim(xs, ys)
    n, m = xs.shape[0], ys.shape[0]
    rho = _knn_radii(xs, k)
    nu = _cross_radii(xs, ys, k)
    return d * float(np.mean(np.log(nu / rho))) + math.log(m / (n - 1.0))


def _alpha_cross_integral(xs: np.ndarray, ys: np.ndarray, k: int, alpha: float) -> float:
    """kNN estimate of int p^alpha q^(1-alpha) with its bias constant."""
    if alpha == 1.0:
        raise InvalidAlphaError("alpha must differ from 1")
    if k - alpha + 1 <= 0 or k + alpha - 1 <= 0:
        raise InvalidAlphaError(
            f"alpha={alpha} needs k > max(alpha-1, 1-alpha) (got k={k})"
        )
    d = xs.shape[1]
    n, m = xs.shape[0], ys.shape[0]
    rho = _knn_radii(xs, k)
    nu = _cross_radii(xs, ys, k)
    log_bias = 2.0 * math.lgamma(k) - math.lgamma(k - alpha + 1) - math.lgamma(k + alpha - 1)
    exponent = (1.0 - alpha) * (
        math.log(n - 1.0) - math.log(m) + d * (np.log(rho) - np.log(nu))
    )
    return float(np.mean(np.exp(exponent))) * math.exp(log_bias)


def renyi_knn_k(x, y, alpha: float, k: int = DEFAULT_K) -> float:
    """Renyi divergence of order alpha: log(I)/(alpha-1) with
    I the kNN estimate of int p^alpha q^(1-alpha)."""
    xs = as_sample(x, "x", min_n=k + 1)
    ys = as_sample(y, "y", min_n=k)
    require_same_dim(xs, ys)
    return math.log(_alpha_cross_integral(xs, ys, k, alpha)) / (alpha - 1.0)


def tsallis_knn_k(x, y, alpha: float, k: int = DEFAULT_K) -> float:
    """Tsallis divergence of order alpha: (I - 1)/(alpha - 1)."""
    xs = as_sample(x, "x", min_n=k + 1)
    ys = as_sample(y, "y", min_n=k)
    require_same_dim(xs, ys)
    return (_alpha_cross_integral(xs, ys, k, alpha) - 1.0) / (alpha - 1.0)


def l2_knn_k(x, y, k: int = DEFAULT_K) -> float:
    """L2 divergence (int (p-q)^2)^(1/2) by kNN plug-in.

    The three integrals int p^2, int q^2 and int pq are estimated with
    (k-1)-corrected kNN density values; int pq is averaged over both
    directions, which makes the statistic symmetric in X and Y.  The
    quadratic form is clipped at zero before the square root.
    """
    if k < 2:
        raise InvalidParameterError("l2_knn_k needs k >= 2 for the bias correction")
    xs = as_sample(x, "x", min_n=k + 1)
    ys = as_sample(y, "y", min_n=k + 1)
    d = require_same_dim(xs, ys)
    n, m = xs.shape[0], ys.shape[0]
    ball = math.exp(log_unit_ball_volume(d))

    rho_x = _knn_radii(xs, k)
    rho_y = _knn_radii(ys, k)
    nu_xy = _cross_radii(xs, ys, k)
    nu_yx = _cross_radii(ys, xs, k)

    int_p2 = (k - 1.0) / ((n - 1.0) * ball) * float(np.mean(rho_x**-d))
    int_q2 = (k - 1.0) / ((m - 1.0) * ball) * float(np.mean(rho_y**-d))
    int_pq = 0.5 * (
        (k - 1.0) / (m * ball) * float(np.mean(nu_xy**-d))
        + (k - 1.0) / (n * ball) * float(np.mean(nu_yx**-d))
    )
    return math.sqrt(max(0.0, int_p2 + int_q2 - 2.0 * int_pq))


def median_bandwidth(pooled: np.ndarray, seed: int = 0) -> float:
    """Median pairwise distance of the pooled sample (seeded subsample
    of 2000 rows when larger); the standard reproducible heuristic."""
    if pooled.shape[0] > _MEDIAN_SUBSAMPLE:
        rng = derived_rng(seed, 0x6D65)
        idx = rng.choice(pooled.shape[0], _MEDIAN_SUBSAMPLE, replace=False)
        pooled = pooled[np.sort(idx)]
    sigma = float(np.median(pdist(pooled)))
    if sigma <= 0.0:
        raise BandwidthError("median pairwise distance is zero")
    return sigma


def _resolve_bandwidth(bandwidth, pooled: np.ndarray, seed: int) -> float:
    if isinstance(bandwidth, str):
        if bandwidth != "median":
            raise BandwidthError(f"unknown bandwidth spec {bandwidth!r}")
        return median_bandwidth(pooled, seed)
    sigma = float(bandwidth)
    if not sigma > 0.0:
        raise BandwidthError(f"bandwidth must be positive, got {bandwidth}")
    return sigma


def _gauss_gram(a: np.ndarray, b: np.ndarray, sigma: float) -> np.ndarray:
    return np.exp(cdist(a, b, "sqeuclidean") / (-2.0 * sigma * sigma))


def mmd(x, y, bandwidth="median", variant: str = "biased", seed: int = 0) -> float:
    """Gaussian-kernel maximum mean discrepancy.

    ``biased`` returns the square root of the V-statistic (block means
    with diagonals), which is always nonnegative.  ``unbiased`` returns
    the U-statistic estimate of squared MMD (diagonals excluded), which
    may be negative and is returned unrooted.
    """
    xs = as_sample(x, "x")
    ys = as_sample(y, "y")
    require_same_dim(xs, ys)
    if variant not in ("biased", "unbiased"):
        raise InvalidParameterError(f"unknown mmd variant {variant!r}")
    n, m = xs.shape[0], ys.shape[0]
    if variant == "unbiased" and (n < 2 or m < 2):
        raise InvalidParameterError("unbiased mmd needs at least 2 points per sample")
    sigma = _resolve_bandwidth(bandwidth, np.vstack([xs, ys]), seed)
    kxx = _gauss_gram(xs, xs, sigma)
    kyy = _gauss_gram(ys, ys, sigma)
    kxy = _gauss_gram(xs, ys, sigma)
    if variant == "biased":
        stat = float(kxx.mean() + kyy.mean() - 2.0 * kxy.mean())
        return math.sqrt(max(0.0, stat))
    sum_xx = float(kxx.sum() - np.trace(kxx)) / (n * (n - 1.0))
    sum_yy = float(kyy.sum() - np.trace(kyy)) / (m * (m - 1.0))
    return sum_xx + sum_yy - 2.0 * float(kxy.mean())


def energy_distance(x, y) -> float:
    """Energy distance 2 E||x-y|| - E||x-x'|| - E||y-y'|| as a
    V-statistic (within-sample means keep their zero diagonals)."""
    xs = as_sample(x, "x")
    ys = as_sample(y, "y")
    require_same_dim(xs, ys)
    cross = float(cdist(xs, ys).mean())
    within_x = float(cdist(xs, xs).mean())
    within_y = float(cdist(ys, ys).mean())
    return 2.0 * cross - within_x - within_y


def jdistance(x, y, divergence_fn: Callable[[np.ndarray, np.ndarray], float]) -> float:
    """Symmetrised divergence: member(X,Y) + member(Y,X)."""
    return divergence_fn(x, y) + divergence_fn(y, x)


def jensen_shannon(
    x,
    y,
    entropy_fn: Callable[[np.ndarray], float],
    weights: tuple[float, float] = (0.5, 0.5),
    seed: int = 0,
) -> float:
    """Jensen-Shannon divergence through an entropy member:
    H(Z) - pi1 H(X) - pi2 H(Y) with Z a seeded mixture subsample.

    Z holds round(pi1 * n_Z) rows of X and the rest of Y, each drawn
    without replacement, n_Z = min(n_X, n_Y).  When X and Y are the
    same array the two parts are drawn disjointly from a single
    permutation, so Z never contains duplicate rows.
    """
    pi1, pi2 = float(weights[0]), float(weights[1])
    if pi1 <= 0.0 or pi2 <= 0.0 or abs(pi1 + pi2 - 1.0) > 1e-12:
        raise WeightError(f"weights must be positive and sum to 1, got {weights}")
    xs = as_sample(x, "x")
    ys = as_sample(y, "y")
    require_same_dim(xs, ys)
    n_z = min(xs.shape[0], ys.shape[0])
    c1 = int(math.floor(pi1 * n_z + 0.5))
    c2 = n_z - c1
    rng = derived_rng(seed, _JS_STREAM)
    if xs is ys or (xs.shape == ys.shape and np.array_equal(xs, ys)):
        perm = rng.permutation(xs.shape[0])
        part_x = xs[perm[:c1]]
        part_y = ys[perm[c1 : c1 + c2]]
    else:
        part_x = xs[rng.choice(xs.shape[0], c1, replace=False)]
        part_y = ys[rng.choice(ys.shape[0], c2, replace=False)]
    z = np.vstack([part_x, part_y])
    return entropy_fn(z) - pi1 * entropy_fn(xs) - pi2 * entropy_fn(ys)
