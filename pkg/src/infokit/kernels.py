"""Cross-entropy and kernels on distributions, with Gram-matrix support.

The expected (mean-embedding) kernel and the exponentiated
Jensen-Shannon kernel, a Gram-matrix builder over lists of samples,
and the positive-semidefiniteness check used as a quick test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .errors import BandwidthError, InvalidParameterError, NonSymmetricError
from .divergence import _cross_radii
from .geometry import digamma, log_unit_ball_volume
from .validation import as_sample, require_same_dim

DEFAULT_K = 5

_SYMMETRY_TOL = 1e-8

_LOG2 = math.log(2.0)


def cross_entropy_knn_k(x, y, k: int = DEFAULT_K) -> float:
    """kNN cross-entropy -E_P log q from X~P, Y~Q, in nats.

    C = log c_d + log m - psi(k) + (d/n) sum_i log nu_k(i), with nu the
    X-to-Y k-th neighbor distances.
    """
    xs = as_sample(x, "x")
    ys = as_sample(y, "y", min_n=k)
    d = require_same_dim(xs, ys)
    m = ys.shape[0]
    nu = _cross_radii(xs, ys, k)
    return (
        log_unit_ball_volume(d)
        + math.log(m)
        - digamma(k)
        + d * float(np.mean(np.log(nu)))
    )


def expected_kernel(x, y, bandwidth: float = 1.0) -> float:
    """Mean-embedding inner product: the mean of the Gaussian kernel
    over all cross pairs, (1/(nm)) sum_ij exp(-||x_i-y_j||^2/(2 sigma^2))."""
    xs = as_sample(x, "x")
    ys = as_sample(y, "y")
    require_same_dim(xs, ys)
    sigma = float(bandwidth)
    if not sigma > 0.0:
        raise BandwidthError(f"bandwidth must be positive, got {bandwidth}")
    return float(np.mean(np.exp(cdist(xs, ys, "sqeuclidean") / (-2.0 * sigma * sigma))))


def ejs_kernel(
    x,
    y,
    js_fn: Callable[[np.ndarray, np.ndarray, int], float],
    u: float = 1.0,
    seed: int = 0,
) -> float:
    """Exponentiated Jensen-Shannon kernel exp(-u * JS(X, Y)).

    The JS estimate is clipped to its population range [0, log 2]
    before exponentiation, so values stay in [2^-u, 1].
    """
    if not u > 0.0:
        raise InvalidParameterError(f"u must be positive, got {u}")
    js = js_fn(x, y, seed)
    js = min(max(js, 0.0), _LOG2)
    return math.exp(-u * js)


@dataclass(frozen=True)
class GramMatrix:
    """Symmetric matrix of distribution-kernel values over sample sets."""

    values: np.ndarray
    kernel: object


def pair_seed(seed: int, i: int, j: int) -> int:
    """Stable per-unordered-pair seed, so mirrored entries share a stream."""
    a, b = (i, j) if i <= j else (j, i)
    return int(np.random.SeedSequence([int(seed), a, b]).generate_state(1)[0])


def gram_matrix(
    samples: Sequence,
    kernel_fn: Callable[[np.ndarray, np.ndarray, int], float],
    seed: int = 0,
    kernel_label: object = None,
) -> GramMatrix:
    """Kernel evaluations over all unordered pairs, mirrored to an
    exactly symmetric matrix; entry (i, j) uses the pair's derived seed."""
    arrs = [as_sample(s, f"sample {i}") for i, s in enumerate(samples)]
    if not arrs:
        raise InvalidParameterError("need at least one sample")
    for a in arrs[1:]:
        require_same_dim(arrs[0], a)
    s = len(arrs)
    values = np.empty((s, s))
    for i in range(s):
        for j in range(i, s):
            v = kernel_fn(arrs[i], arrs[j], pair_seed(seed, i, j))
            values[i, j] = v
            values[j, i] = v
    return GramMatrix(values=values, kernel=kernel_label)


def psd_check(gram, tol: float = 1e-6) -> tuple[bool, float]:
    """(is_psd, lambda_min) of a symmetric Gram matrix.

    Raises NonSymmetricError when the matrix is asymmetric beyond 1e-8;
    the flag is lambda_min >= -tol.
    """
    values = gram.values if isinstance(gram, GramMatrix) else np.asarray(gram, dtype=float)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise NonSymmetricError(f"Gram matrix must be square, got shape {values.shape}")
    if float(np.max(np.abs(values - values.T))) > _SYMMETRY_TOL:
        raise NonSymmetricError("Gram matrix is not symmetric within 1e-8")
    lam_min = float(np.linalg.eigvalsh((values + values.T) / 2.0)[0])
    return lam_min >= -tol, lam_min
