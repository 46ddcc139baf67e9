"""Mutual information and association estimators.

Shannon MI through the entropy-combination identity, the Hilbert-Schmidt
independence criterion, distance covariance/correlation, and the
rank-based multivariate Spearman and Blomqvist coefficients.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .errors import BlockError, InvalidParameterError
from .divergence import _resolve_bandwidth
from .geometry import rank_transform
from .validation import as_sample

_HSIC_CHUNK = 1024

# denominators this small mean a constant block; dCor is defined as 0
_DCOR_EPS = 1e-14


def _check_blocks(blocks: Sequence[np.ndarray]) -> list[np.ndarray]:
    if len(blocks) < 2:
        raise BlockError("need at least 2 blocks")
    arrs = [as_sample(b, f"block {i}") for i, b in enumerate(blocks)]
    n = arrs[0].shape[0]
    if any(a.shape[0] != n for a in arrs):
        raise BlockError("all blocks must have the same number of observations")
    return arrs


def shannon_mi(blocks: Sequence, entropy_fn: Callable[[np.ndarray], float]) -> float:
    """Shannon mutual information I(y^1,...,y^M) via the identity
    sum_m H(y^m) - H(joint), with H the supplied entropy estimator."""
    arrs = _check_blocks(blocks)
    joint = np.hstack(arrs)
    return sum(entropy_fn(a) for a in arrs) - entropy_fn(joint)


def hsic(x, y, bandwidths=("median", "median"), seed: int = 0) -> float:
    """Biased (V-statistic) HSIC with Gaussian kernels per block:
    (1/n^2) trace(K H L H).

    Evaluated in fixed-size row chunks through the centered-sum
    identity, so memory stays O(chunk * n) and the summation order is
    independent of the input size.
    """
    xs = as_sample(x, "x")
    ys = as_sample(y, "y")
    n = xs.shape[0]
    if ys.shape[0] != n:
        raise BlockError("blocks must have the same number of observations")
    if n < 4:
        raise InvalidParameterError("hsic needs at least 4 observations")
    sx = _resolve_bandwidth(bandwidths[0], xs, seed)
    sy = _resolve_bandwidth(bandwidths[1], ys, seed)

    prod_sum = 0.0
    row_k = np.empty(n)
    row_l = np.empty(n)
    for start in range(0, n, _HSIC_CHUNK):
        stop = min(start + _HSIC_CHUNK, n)
        kb = np.exp(cdist(xs[start:stop], xs, "sqeuclidean") / (-2.0 * sx * sx))
        lb = np.exp(cdist(ys[start:stop], ys, "sqeuclidean") / (-2.0 * sy * sy))
        prod_sum += float(np.sum(kb * lb))
        row_k[start:stop] = kb.sum(axis=1)
        row_l[start:stop] = lb.sum(axis=1)
    total_k = float(row_k.sum())
    total_l = float(row_l.sum())
    centered = prod_sum - 2.0 / n * float(row_k @ row_l) + total_k * total_l / n**2
    return centered / n**2


def _double_centered(a: np.ndarray) -> np.ndarray:
    row = a.mean(axis=1, keepdims=True)
    col = a.mean(axis=0, keepdims=True)
    return a - row - col + a.mean()


def distance_covariance(x, y) -> float:
    """Sample distance covariance (square root of the V-statistic)."""
    xs = as_sample(x, "x")
    ys = as_sample(y, "y")
    if ys.shape[0] != xs.shape[0]:
        raise BlockError("blocks must have the same number of observations")
    a = _double_centered(cdist(xs, xs))
    b = _double_centered(cdist(ys, ys))
    return math.sqrt(max(0.0, float(np.mean(a * b))))


def distance_correlation(x, y) -> float:
    """Distance correlation in [0, 1]; 0 when either block is constant."""
    xs = as_sample(x, "x")
    ys = as_sample(y, "y")
    if ys.shape[0] != xs.shape[0]:
        raise BlockError("blocks must have the same number of observations")
    a = _double_centered(cdist(xs, xs))
    b = _double_centered(cdist(ys, ys))
    dvar_x = math.sqrt(max(0.0, float(np.mean(a * a))))
    dvar_y = math.sqrt(max(0.0, float(np.mean(b * b))))
    if dvar_x < _DCOR_EPS or dvar_y < _DCOR_EPS:
        return 0.0
    dcov = math.sqrt(max(0.0, float(np.mean(a * b))))
    return dcov / math.sqrt(dvar_x * dvar_y)


def _copula_sample(data) -> np.ndarray:
    u = rank_transform(data)
    if u.shape[1] < 2:
        raise BlockError("association measures need at least 2 columns")
    if u.shape[0] < 2:
        raise BlockError("association measures need at least 2 observations")
    return u


def spearman_rho_mv(data, variant: str = "rho3") -> float:
    """Multivariate Spearman rho from the empirical copula.

    rho1 uses the product of survival margins, rho2 the product of the
    margins, rho3 their average; all share the normalization
    h(d) = (d+1)/(2^d - (d+1)) and reduce to the classical coefficient
    at d = 2.
    """
    u = _copula_sample(data)
    d = u.shape[1]
    h = (d + 1.0) / (2.0**d - (d + 1.0))
    rho1 = h * (2.0**d * float(np.mean(np.prod(1.0 - u, axis=1))) - 1.0)
    if variant == "rho1":
        return rho1
    rho2 = h * (2.0**d * float(np.mean(np.prod(u, axis=1))) - 1.0)
    if variant == "rho2":
        return rho2
    if variant == "rho3":
        return 0.5 * (rho1 + rho2)
    raise InvalidParameterError(f"unknown Spearman variant {variant!r}")


def blomqvist_beta_mv(data) -> float:
    """Multivariate Blomqvist beta: empirical copula and survival copula
    at the median point, scaled by h(d) = 2^(d-1)/(2^(d-1) - 1)."""
    u = _copula_sample(data)
    d = u.shape[1]
    h = 2.0 ** (d - 1) / (2.0 ** (d - 1) - 1.0)
    c_lower = float(np.mean(np.all(u <= 0.5, axis=1)))
    c_upper = float(np.mean(np.all(u > 0.5, axis=1)))
    return h * (c_lower + c_upper - 2.0 ** (1 - d))
