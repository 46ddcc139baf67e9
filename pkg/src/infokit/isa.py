"""Independent subspace analysis via ICA plus clustering.

The separation principle: run one-dimensional ICA on the mixed
observations, score pairwise dependence of the recovered components,
and cluster the components into subspaces.  Includes a synthetic
problem generator, the objective functions used to compare partitions,
and the block Amari index for scoring against a known mixing.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import framework
from .errors import (
    BadDimsError,
    BadTargetError,
    DegenerateInputError,
    InvalidParameterError,
    NonSymmetricError,
    ShapeError,
)
from .kernels import pair_seed
from .validation import as_sample, derived_rng

OBJECTIVES = ("joint_mi", "recursive_mi", "sum_entropy", "pairwise_mi", "pairwise_1d_mi")

_EXHAUSTIVE_MAX_D = 10
_KMEANS_RESTARTS = 20
_KMEANS_MAX_ITER = 100


# ---------------------------------------------------------------------------
# problem generation


@dataclass(frozen=True)
class ISAProblem:
    """Synthetic ISA instance: hidden grouped sources, an orthogonal
    mixing matrix, and the observed mixtures sources @ mixing.T."""

    sources: np.ndarray
    mixing: np.ndarray
    observed: np.ndarray
    dims: tuple[int, ...]
    family: str
    seed: int


def _haar_orthogonal(d: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((d, d))
    q, r = np.linalg.qr(a)
    return q * np.sign(np.diag(r))


def _draw_group(rng: np.random.Generator, n: int, width: int, family: str) -> np.ndarray:
    if family == "uniform-geometric":
        if width == 1:
            return rng.uniform(-math.sqrt(3.0), math.sqrt(3.0), (n, 1))
        g = rng.standard_normal((n, width))
        return g / np.linalg.norm(g, axis=1, keepdims=True)
    if family == "spherical-nongaussian":
        radius = rng.uniform(1.0, 2.0, (n, 1))
        if width == 1:
            return radius * rng.choice([-1.0, 1.0], (n, 1))
        g = rng.standard_normal((n, width))
        return radius * g / np.linalg.norm(g, axis=1, keepdims=True)
    raise InvalidParameterError(f"unknown source family {family!r}")


def generate_isa_problem(
    dims: Sequence[int],
    family: str = "uniform-geometric",
    n: int = 5000,
    seed: int = 0,
) -> ISAProblem:
    """Independent groups of dependent coordinates, mixed by a random
    orthogonal matrix; fully determined by the seed."""
    widths = tuple(int(w) for w in dims)
    if not widths or any(w < 1 for w in widths):
        raise BadDimsError(f"subspace widths must be positive, got {dims}")
    if n < 100:
        raise InvalidParameterError("need at least 100 observations")
    rng = derived_rng(seed, 0x495341)
    groups = [_draw_group(rng, n, w, family) for w in widths]
    sources = np.hstack(groups)
    mixing = _haar_orthogonal(sources.shape[1], rng)
    return ISAProblem(
        sources=sources,
        mixing=mixing,
        observed=sources @ mixing.T,
        dims=widths,
        family=family,
        seed=int(seed),
    )


# ---------------------------------------------------------------------------
# FastICA


@dataclass(frozen=True)
class FastIcaResult:
    """Demixed components and the transform that produced them.

    ``components = (x - mean) @ demixing.T`` with unit per-component
    sample variance; ``rotation`` acts on whitened data and is
    orthogonal at convergence.
    """

    components: np.ndarray
    rotation: np.ndarray
    whitener: np.ndarray
    mean: np.ndarray
    demixing: np.ndarray
    converged: bool
    n_iter: int


def _sym_decorrelation(w: np.ndarray) -> np.ndarray:
    s, u = np.linalg.eigh(w @ w.T)
    s = np.clip(s, 1e-24, None)
    return (u * (1.0 / np.sqrt(s))) @ u.T @ w


def fastica(x, seed: int = 0, tol: float = 1e-4, max_iter: int = 200) -> FastIcaResult:
    """Symmetric fixed-point ICA with the tanh nonlinearity on whitened
    data.

    Stops when max |abs(W W_prev^T) - I| < tol; if max_iter is reached
    the best iterate is returned with ``converged`` False and a
    warning.
    """
    xs = as_sample(x, "x")
    n, d = xs.shape
    if n <= d:
        raise DegenerateInputError(f"need more observations than dimensions ({n} <= {d})")
    mean = xs.mean(axis=0)
    xc = xs - mean
    cov = (xc.T @ xc) / n
    lam, vec = np.linalg.eigh(cov)
    if np.any(lam < 1e-12):
        raise DegenerateInputError(
            "covariance is singular (a direction has vanishing variance)"
        )
    whitener = (vec / np.sqrt(lam)).T  # rows scale the principal axes
    xw = xc @ whitener.T

    rng = derived_rng(seed, 0x494341)
    w = _sym_decorrelation(_haar_orthogonal(d, rng))
    eye = np.eye(d)
    converged = False
    n_iter = max_iter
    for it in range(max_iter):
        y = xw @ w.T
        g = np.tanh(y)
        g_prime = (1.0 - g * g).mean(axis=0)
        w_new = _sym_decorrelation((g.T @ xw) / n - g_prime[:, None] * w)
        lim = float(np.max(np.abs(np.abs(w_new @ w.T) - eye)))
        w = w_new
        if lim < tol:
            converged = True
            n_iter = it + 1
            break
    if not converged:
        warnings.warn(f"fastica did not converge in {max_iter} iterations", RuntimeWarning)
    return FastIcaResult(
        components=xw @ w.T,
        rotation=w,
        whitener=whitener,
        mean=mean,
        demixing=w @ whitener,
        converged=converged,
        n_iter=n_iter,
    )


# ---------------------------------------------------------------------------
# pairwise dependence and clustering


def default_dependence_config() -> framework.EstimatorConfig:
    """HSIC: robust at modest sample sizes and immune to ties."""
    return framework.initialize(framework.MeasureKind.MUTUAL_INFORMATION, "hsic")


def pairwise_mi_matrix(
    components, dep_config: framework.EstimatorConfig | None = None, seed: int = 0
) -> np.ndarray:
    """Symmetric nonnegative dependence matrix over component columns.

    Each unordered pair is estimated once with a seed derived from the
    pair, negatives are clipped to zero, and the diagonal is zero.
    """
    comps = as_sample(components, "components")
    d = comps.shape[1]
    if d < 2:
        raise ShapeError("need at least 2 components")
    config = dep_config if dep_config is not None else default_dependence_config()
    sim = np.zeros((d, d))
    for i in range(d):
        for j in range(i + 1, d):
            cfg = framework.reseeded(config, pair_seed(seed, i, j))
            value = max(0.0, framework.estimate(cfg, comps[:, [i]], comps[:, [j]]))
            sim[i, j] = value
            sim[j, i] = value
    return sim


def _check_similarity(similarity) -> np.ndarray:
    s = np.asarray(similarity, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ShapeError(f"similarity must be square, got shape {s.shape}")
    if float(np.max(np.abs(s - s.T))) > 1e-8:
        raise NonSymmetricError("similarity matrix is not symmetric")
    if float(s.min()) < -1e-8:
        raise InvalidParameterError("similarity entries must be nonnegative")
    return np.clip((s + s.T) / 2.0, 0.0, None)


def _resolve_target(d: int, widths, n_groups) -> tuple[tuple[int, ...] | None, int]:
    if (widths is None) == (n_groups is None):
        raise BadTargetError("give exactly one of subspace widths or a group count")
    if widths is not None:
        tw = tuple(int(w) for w in widths)
        if not tw or any(w < 1 for w in tw) or sum(tw) != d:
            raise BadTargetError(f"widths {widths} do not partition {d} components")
        return tw, len(tw)
    m = int(n_groups)
    if not 1 <= m <= d:
        raise BadTargetError(f"group count {n_groups} must lie in 1..{d}")
    return None, m


def _within_sum(s: np.ndarray, groups: Sequence[Sequence[int]]) -> float:
    return sum(float(s[np.ix_(g, g)].sum()) for g in groups if len(g) > 0)


def _exhaustive_partition(s: np.ndarray, widths: tuple[int, ...]) -> list[list[int]]:
    """Best partition with exact group sizes by anchored enumeration;
    the smallest unplaced index always opens the next group."""
    best_groups: list[list[int]] | None = None
    best_score = -np.inf

    def recurse(remaining: tuple[int, ...], sizes: tuple[int, ...], acc: list[list[int]]):
        nonlocal best_groups, best_score
        if not remaining:
            score = _within_sum(s, acc)
            if score > best_score:
                best_score = score
                best_groups = [list(g) for g in acc]
            return
        anchor = remaining[0]
        rest = remaining[1:]
        for size in sorted(set(sizes)):
            left = list(sizes)
            left.remove(size)
            for companions in itertools.combinations(rest, size - 1):
                group = [anchor, *companions]
                next_remaining = tuple(i for i in rest if i not in companions)
                recurse(next_remaining, tuple(left), [*acc, group])

    recurse(tuple(range(s.shape[0])), tuple(sorted(widths)), [])
    assert best_groups is not None
    return best_groups


def _kmeans(points: np.ndarray, k: int, rng: np.random.Generator) -> tuple[np.ndarray, float]:
    """Seeded kmeans++ plus Lloyd iterations; empty clusters are
    reseeded to the farthest point, so all k labels stay in use."""
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = float(d2.sum())
        if total <= 0.0:
            centers[c] = points[rng.integers(n)]
        else:
            centers[c] = points[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, np.sum((points - centers[c]) ** 2, axis=1))
    labels = None
    for _ in range(_KMEANS_MAX_ITER):
        dists = np.sum((points[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        new_labels = np.argmin(dists, axis=1)
        for c in range(k):
            if not np.any(new_labels == c):
                far = int(np.argmax(np.min(dists, axis=1)))
                new_labels[far] = c
                dists[far] = 0.0
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(k):
            centers[c] = points[labels == c].mean(axis=0)
    inertia = 0.0
    for c in range(k):
        inertia += float(np.sum((points[labels == c] - centers[c]) ** 2))
    return labels, inertia


def _spectral_groups(s: np.ndarray, m: int, seed: int) -> list[list[int]]:
    degree = s.sum(axis=1)
    inv_sqrt = 1.0 / np.sqrt(np.maximum(degree, 1e-12))
    sym = s * inv_sqrt[:, None] * inv_sqrt[None, :]
    _, vec = np.linalg.eigh(sym)
    embedding = vec[:, -m:] * inv_sqrt[:, None]
    best_labels, best_inertia = None, np.inf
    for restart in range(_KMEANS_RESTARTS):
        labels, inertia = _kmeans(embedding, m, derived_rng(seed, 0x6B6D, restart))
        if inertia < best_inertia:
            best_labels, best_inertia = labels, inertia
    groups = [sorted(np.flatnonzero(best_labels == c).tolist()) for c in range(m)]
    return [g for g in groups if g]


def _repair_sizes(
    s: np.ndarray, groups: list[list[int]], widths: tuple[int, ...]
) -> list[list[int]]:
    """Greedy element swaps until group sizes equal the target widths,
    each move chosen to minimize the cut increase."""
    order = sorted(range(len(groups)), key=lambda i: -len(groups[i]))
    target_order = sorted(range(len(widths)), key=lambda i: -widths[i])
    sized: list[list[int]] = [[] for _ in widths]
    for gi, ti in zip(order, target_order):
        sized[ti] = sorted(groups[gi])
    targets = list(widths)
    while True:
        over = [i for i, g in enumerate(sized) if len(g) > targets[i]]
        under = [i for i, g in enumerate(sized) if len(g) < targets[i]]
        if not over:
            break
        best = None  # (delta, element, src, dst)
        for src in over:
            for e in sized[src]:
                links_src = float(s[e, sized[src]].sum()) - float(s[e, e])
                for dst in under:
                    delta = links_src - float(s[e, sized[dst]].sum())
                    key = (delta, e, src, dst)
                    if best is None or key < best:
                        best = key
        _, e, src, dst = best
        sized[src].remove(e)
        sized[dst] = sorted([*sized[dst], e])
    return sized


def cluster_components(
    similarity, widths=None, n_groups=None, seed: int = 0
) -> tuple[tuple[int, ...], ...]:
    """Partition component indices by similarity.

    Known widths with at most 10 components are solved exactly by
    enumeration; otherwise normalized-cut spectral clustering with
    seeded k-means restarts is used, followed by a greedy size repair
    when widths are given.  An all-zero similarity yields a warning and
    a deterministic balanced partition.
    """
    s = _check_similarity(similarity)
    d = s.shape[0]
    tw, m = _resolve_target(d, widths, n_groups)

    if float(s.sum()) == 0.0:
        warnings.warn("all-zero similarity; returning a balanced partition", RuntimeWarning)
        sizes = list(tw) if tw is not None else [
            d // m + (1 if i < d % m else 0) for i in range(m)
        ]
        bounds = np.cumsum([0, *sizes])
        groups = [list(range(bounds[i], bounds[i + 1])) for i in range(m)]
    elif tw is not None and d <= _EXHAUSTIVE_MAX_D:
        groups = _exhaustive_partition(s, tw)
    else:
        groups = _spectral_groups(s, m, seed)
        if tw is not None:
            if len(groups) < len(tw):  # k-means may have merged clusters
                groups = groups + [[] for _ in range(len(tw) - len(groups))]
            groups = _repair_sizes(s, groups, tw)
    groups = sorted((tuple(sorted(g)) for g in groups if g), key=lambda g: g[0])
    _validate_partition(groups, d)
    return tuple(groups)


def _validate_partition(groups, d: int) -> None:
    flat = [i for g in groups for i in g]
    if sorted(flat) != list(range(d)) or any(len(g) == 0 for g in groups):
        raise ShapeError(f"groups {groups} are not a partition of 0..{d - 1}")


# ---------------------------------------------------------------------------
# objectives and scoring


def isa_objective(
    components,
    partition,
    which: str,
    mi_config: framework.EstimatorConfig | None = None,
    entropy_config: framework.EstimatorConfig | None = None,
    seed: int = 0,
) -> float:
    """Evaluate one ISA objective for a partition of the components.

    joint_mi       I(y^1, ..., y^M)
    recursive_mi   sum_m I(y^m, [y^(m+1), ..., y^M])
    sum_entropy    sum_m H(y^m)
    pairwise_mi    sum over ordered group pairs of I(y^m1, y^m2)
    pairwise_1d_mi sum over cross-group column pairs of I(y_i, y_j)
    """
    comps = as_sample(components, "components")
    groups = tuple(tuple(int(i) for i in g) for g in partition)
    _validate_partition(groups, comps.shape[1])
    if which not in OBJECTIVES:
        raise InvalidParameterError(f"unknown objective {which!r}; use one of {OBJECTIVES}")
    blocks = [comps[:, list(g)] for g in groups]
    m = len(blocks)

    if which == "sum_entropy":
        cfg = entropy_config if entropy_config is not None else framework.initialize(
            framework.MeasureKind.ENTROPY, "shannon_knn_k"
        )
        return sum(framework.estimate(cfg, b) for b in blocks)

    mi = mi_config if mi_config is not None else default_dependence_config()
    if which == "joint_mi":
        if m < 2:
            return 0.0
        return framework.estimate(mi, *blocks)
    if which == "recursive_mi":
        return sum(
            framework.estimate(mi, blocks[i], np.hstack(blocks[i + 1 :]))
            for i in range(m - 1)
        )
    if which == "pairwise_mi":
        total = 0.0
        for i in range(m):
            for j in range(i + 1, m):
                cfg = framework.reseeded(mi, pair_seed(seed, i, j))
                total += 2.0 * framework.estimate(cfg, blocks[i], blocks[j])
        return total
    # pairwise_1d_mi: same terms as the similarity matrix, summed across groups
    sim = pairwise_mi_matrix(comps, mi, seed=seed)
    return cross_group_sum(sim, groups)


def cross_group_sum(similarity, partition) -> float:
    """Sum of similarity entries over ordered cross-group index pairs."""
    s = np.asarray(similarity, dtype=float)
    total = float(s.sum())
    within = _within_sum(s, [list(g) for g in partition])
    return total - within


def amari_index(g, partition, col_partition=None) -> float:
    """Block-level Amari error of a matrix, in [0, 1].

    The block-norm matrix N_ij = ||G[block_i, block_j]||_F is
    row-normalized by its maxima (so per-block scaling of G drops out),
    then row and column sums of the normalized matrix are scored
    against the single-nonzero pattern and averaged over 2M^2 terms.
    Zero iff N is a scaled block-permutation.
    """
    gm = np.asarray(g, dtype=float)
    if gm.ndim != 2 or gm.shape[0] != gm.shape[1]:
        raise ShapeError(f"matrix must be square, got {gm.shape}")
    rows = tuple(tuple(int(i) for i in grp) for grp in partition)
    cols = rows if col_partition is None else tuple(
        tuple(int(i) for i in grp) for grp in col_partition
    )
    _validate_partition(rows, gm.shape[0])
    _validate_partition(cols, gm.shape[1])
    if len(rows) != len(cols):
        raise ShapeError("row and column partitions must have the same group count")
    m = len(rows)
    if m == 1:
        return 0.0
    norms = np.empty((m, m))
    for i, ri in enumerate(rows):
        for j, cj in enumerate(cols):
            norms[i, j] = np.linalg.norm(gm[np.ix_(ri, cj)])
    row_max = norms.max(axis=1)
    if np.any(row_max == 0.0):
        raise DegenerateInputError("a block row of the matrix is entirely zero")
    normalized = norms / row_max[:, None]
    col_max = normalized.max(axis=0)
    if np.any(col_max == 0.0):
        raise DegenerateInputError("a block column of the matrix is entirely zero")
    score = float(np.sum(normalized.sum(axis=1) - 1.0))
    score += float(np.sum(normalized.sum(axis=0) / col_max - 1.0))
    return score / (2.0 * m * m)


# ---------------------------------------------------------------------------
# pipeline


@dataclass(frozen=True)
class IsaResult:
    partition: tuple[tuple[int, ...], ...]
    sources: np.ndarray
    demixing: np.ndarray
    similarity: np.ndarray
    ica: FastIcaResult
    diagnostics: dict


def _stage_seed(seed: int, stage: int) -> int:
    return int(np.random.SeedSequence([int(seed), stage]).generate_state(1)[0])


def run_isa_pipeline(
    x,
    dims=None,
    n_groups=None,
    dep_config: framework.EstimatorConfig | None = None,
    seed: int = 0,
    true_mixing=None,
    true_dims=None,
) -> IsaResult:
    """ICA, pairwise dependence, and clustering, end to end.

    Recovered sources are the ICA components regrouped by the found
    partition.  When the true mixing (and its subspace widths) are
    given, diagnostics include the block Amari index of the joint
    mixing-demixing matrix.
    """
    ica = fastica(x, seed=_stage_seed(seed, 1))
    sim = pairwise_mi_matrix(ica.components, dep_config, seed=_stage_seed(seed, 2))
    partition = cluster_components(sim, widths=dims, n_groups=n_groups, seed=_stage_seed(seed, 3))
    order = [i for g in partition for i in g]
    diagnostics: dict = {
        "converged": ica.converged,
        "n_iter": ica.n_iter,
        "objectives": {"pairwise_1d_mi": cross_group_sum(sim, partition)},
    }
    if true_mixing is not None and true_dims is not None:
        widths_true = tuple(int(w) for w in true_dims)
        bounds = np.cumsum([0, *widths_true])
        col_groups = [tuple(range(bounds[i], bounds[i + 1])) for i in range(len(widths_true))]
        gmat = ica.demixing @ np.asarray(true_mixing, dtype=float)
        row_groups = _match_group_sizes(partition, widths_true)
        if row_groups is not None:
            diagnostics["amari_index"] = amari_index(gmat, row_groups, col_groups)
            diagnostics["grouping_exact"] = _grouping_matches(
                gmat, partition, col_groups
            )
    return IsaResult(
        partition=partition,
        sources=ica.components[:, order],
        demixing=ica.demixing,
        similarity=sim,
        ica=ica,
        diagnostics=diagnostics,
    )


def _match_group_sizes(partition, widths: tuple[int, ...]):
    """Order recovered groups so their sizes align with the true widths;
    None when the size multisets differ."""
    if sorted(len(g) for g in partition) != sorted(widths):
        return None
    pool = list(partition)
    ordered = []
    for w in widths:
        idx = next(i for i, g in enumerate(pool) if len(g) == w)
        ordered.append(pool.pop(idx))
    return tuple(ordered)


def _grouping_matches(gmat: np.ndarray, partition, col_groups) -> bool:
    """True when the recovered partition equals the grouping induced by
    assigning each component to its dominant true subspace."""
    assignment = np.array([
        int(np.argmax([float(np.linalg.norm(gmat[i, list(cg)])) for cg in col_groups]))
        for i in range(gmat.shape[0])
    ])
    induced = sorted(
        tuple(np.flatnonzero(assignment == b).tolist()) for b in range(len(col_groups))
    )
    recovered = sorted(tuple(g) for g in partition)
    return induced == recovered
