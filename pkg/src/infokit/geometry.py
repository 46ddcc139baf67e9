"""Geometric and special-function primitives for the kNN/MST estimators.

Exact k-nearest-neighbor search, Euclidean minimum spanning tree weight,
digamma, log unit-ball volume, and the empirical rank (copula) transform.
All distances are Euclidean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import rankdata

from .errors import (
    InvalidParameterError,
    KTooLargeError,
    TooFewPointsError,
)
from .validation import as_sample, require_same_dim, thread_count

# kd-trees stop paying off in high dimension; beyond this we scan.
_KDTREE_MAX_DIM = 20
_SCAN_BLOCK = 64


@dataclass(frozen=True)
class NeighborTable:
    """Sorted distances from each query to its k nearest points.

    ``dists[i, j]`` is the Euclidean distance from query i to its
    (j+1)-th nearest neighbor; rows are nondecreasing.
    """

    dists: np.ndarray
    k: int
    self_excluded: bool


def knn_distances(points, queries, k: int, self_excluded: bool = False) -> NeighborTable:
    """Exact k smallest Euclidean distances from each query to ``points``.

    With ``self_excluded`` the two sets must be the same array and each
    query's own row is not a candidate.  Ties are broken by lower point
    index, which leaves the returned distances unchanged.
    """
    pts = as_sample(points, "points")
    qry = pts if queries is points else as_sample(queries, "queries")
    require_same_dim(pts, qry)
    if k < 1:
        raise InvalidParameterError(f"k must be >= 1, got {k}")
    if self_excluded and qry is not pts and not np.array_equal(pts, qry):
        raise InvalidParameterError(
            "self_excluded requires points and queries to be the same set"
        )
    limit = pts.shape[0] - 1 if self_excluded else pts.shape[0]
    if k > limit:
        raise KTooLargeError(
            f"k={k} exceeds the {limit} available neighbors"
            f" ({pts.shape[0]} points, self_excluded={self_excluded})"
        )

    m = k + 1 if self_excluded else k
    if pts.shape[1] <= _KDTREE_MAX_DIM:
        tree = cKDTree(pts)
        dists, _ = tree.query(qry, k=m, workers=thread_count())
        if m == 1:
            dists = dists[:, None]
    else:
        dists = _scan_knn(pts, qry, m)
    if self_excluded:
        dists = dists[:, 1:]
    return NeighborTable(dists=np.ascontiguousarray(dists), k=k, self_excluded=self_excluded)


def _scan_knn(pts: np.ndarray, qry: np.ndarray, m: int) -> np.ndarray:
    """Exhaustive kNN in query blocks; O(n^2) time, O(block * n * d) memory."""
    out = np.empty((qry.shape[0], m))
    for start in range(0, qry.shape[0], _SCAN_BLOCK):
        block = qry[start : start + _SCAN_BLOCK]
        d2 = np.sum((block[:, None, :] - pts[None, :, :]) ** 2, axis=2)
        if m < d2.shape[1]:
            part = np.partition(d2, m - 1, axis=1)[:, :m]
        else:
            part = d2
        part.sort(axis=1)
        out[start : start + block.shape[0]] = np.sqrt(part)
    return out


def euclidean_mst_weight(points, gamma: float) -> float:
    """Sum of edge lengths raised to ``gamma`` over the Euclidean MST.

    Prim's algorithm on the implicit complete graph; O(n^2) time, O(n)
    memory, ties resolved toward the lowest vertex index.  All minimum
    spanning trees share one edge-length multiset, so the returned
    weight does not depend on the tie rule.
    """
    pts = as_sample(points, "points")
    if pts.shape[0] < 2:
        raise TooFewPointsError("MST needs at least 2 points")
    if not np.isfinite(gamma) or gamma <= 0:
        raise InvalidParameterError(f"gamma must be positive, got {gamma}")

    n = pts.shape[0]
    in_tree = np.zeros(n, dtype=bool)
    best = np.full(n, np.inf)
    in_tree[0] = True
    best[0] = -np.inf  # never selected again
    current = 0
    total = 0.0
    for _ in range(n - 1):
        d2 = np.sum((pts - pts[current]) ** 2, axis=1)
        np.minimum(best, d2, out=best, where=~in_tree)
        nxt = int(np.argmax(np.where(in_tree, -np.inf, -best)))
        total += float(best[nxt]) ** (gamma / 2.0)
        in_tree[nxt] = True
        best[nxt] = -np.inf
        current = nxt
    return total


def digamma(x: float) -> float:
    """psi(x) for x > 0, by upward recurrence to x >= 6 and an
    8-term asymptotic series; absolute error below 1e-10."""
    if not x > 0:
        raise InvalidParameterError(f"digamma requires x > 0, got {x}")
    value = 0.0
    while x < 6.0:
        value -= 1.0 / x
        x += 1.0
    # psi(x) ~ ln x - 1/(2x) - sum B_2n / (2n x^(2n))
    inv2 = 1.0 / (x * x)
    series = (
        1.0 / 12.0
        - inv2
        * (
            1.0 / 120.0
            - inv2
            * (
                1.0 / 252.0
                - inv2
                * (
                    1.0 / 240.0
                    - inv2
                    * (
                        1.0 / 132.0
                        - inv2 * (691.0 / 32760.0 - inv2 * (1.0 / 12.0 - inv2 * 3617.0 / 8160.0))
                    )
                )
            )
        )
    )
    return value + math.log(x) - 0.5 / x - inv2 * series


def log_unit_ball_volume(d: int) -> float:
    """log of the d-dimensional Euclidean unit-ball volume pi^(d/2)/Gamma(d/2+1)."""
    if d < 1:
        raise InvalidParameterError(f"dimension must be >= 1, got {d}")
    return 0.5 * d * math.log(math.pi) - math.lgamma(0.5 * d + 1.0)


def rank_transform(sample) -> np.ndarray:
    """Per-column normalized ranks r/(n+1), average rank on ties.

    Output entries lie strictly inside (0, 1); this is the empirical
    copula transform used by the rank-based association measures.
    """
    x = as_sample(sample, "sample")
    n = x.shape[0]
    ranks = rankdata(x, method="average", axis=0)
    return ranks / (n + 1.0)
