"""Estimator registry, configuration, and uniform dispatch.

Every estimator, base or meta, is initialized the same way
(``initialize(kind, name, mult, overrides)`` returning an immutable
config tree) and evaluated the same way (``estimate(config, *samples)``
returning a float).  Meta estimators hold member configs that are
initialized recursively and evaluated through the same ``estimate``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Any, Callable, Mapping

import numpy as np

from . import dependence, divergence, entropy, kernels
from .errors import (
    ArityMismatchError,
    InvalidParameterError,
    UnknownEstimatorError,
    UnknownParameterError,
)
from .validation import as_sample


class MeasureKind(Enum):
    ENTROPY = "entropy"
    MUTUAL_INFORMATION = "mi"
    DIVERGENCE = "divergence"
    ASSOCIATION = "association"
    CROSS_QUANTITY = "cross"
    DISTRIBUTION_KERNEL = "kernel"


@dataclass(frozen=True)
class EstimatorConfig:
    """Immutable description of one estimator instance."""

    kind: MeasureKind
    name: str
    mult: bool
    params: Mapping[str, Any]
    members: tuple["EstimatorConfig", ...] = ()


@dataclass(frozen=True)
class EstimatorDescriptor:
    """Registry entry: contract and entry points of one estimator."""

    kind: MeasureKind
    name: str
    min_arity: int
    max_arity: int | None  # None = unbounded
    defaults: Mapping[str, Any]
    mult_sensitive: bool
    summary: str
    fn: Callable[..., float] = field(repr=False)
    member_slots: tuple[tuple[str, MeasureKind], ...] = ()
    check: Callable[[Mapping[str, Any]], None] | None = field(default=None, repr=False)


_REGISTRY: dict[tuple[MeasureKind, str], EstimatorDescriptor] = {}


def _register(descriptor: EstimatorDescriptor) -> None:
    key = (descriptor.kind, descriptor.name)
    if key in _REGISTRY:
        raise ValueError(f"duplicate estimator registration {key}")
    _REGISTRY[key] = descriptor


def descriptor(kind: MeasureKind, name: str) -> EstimatorDescriptor:
    try:
        return _REGISTRY[(kind, name)]
    except KeyError:
        raise UnknownEstimatorError(
            f"no {kind.value} estimator named {name!r}; known:"
            f" {', '.join(sorted(n for k, n in _REGISTRY if k == kind))}"
        ) from None


def list_estimators(kind: MeasureKind) -> list[EstimatorDescriptor]:
    """All registered descriptors of one kind, sorted by name."""
    return sorted(
        (d for (k, _), d in _REGISTRY.items() if k == kind), key=lambda d: d.name
    )


def initialize(
    kind: MeasureKind,
    name: str,
    mult: bool = True,
    overrides: Mapping[str, Any] | None = None,
) -> EstimatorConfig:
    """Fully resolved immutable config for a registered estimator.

    Overrides must name declared parameters.  Member configs of meta
    estimators are initialized recursively; the mult flag propagates to
    them.
    """
    desc = descriptor(kind, name)
    params = dict(desc.defaults)
    for key, value in (overrides or {}).items():
        if key not in params:
            raise UnknownParameterError(
                f"{kind.value}/{name} has no parameter {key!r};"
                f" declared: {', '.join(sorted(params))}"
            )
        params[key] = _coerce_like(params[key], key, value)
    _validate_params(desc, params)
    if desc.check is not None:
        desc.check(params)
    members = tuple(
        initialize(member_kind, str(params[name_param]), mult)
        for name_param, member_kind in desc.member_slots
    )
    return EstimatorConfig(
        kind=kind,
        name=name,
        mult=bool(mult),
        params=MappingProxyType(params),
        members=members,
    )


def estimate(config: EstimatorConfig, *samples) -> float:
    """Evaluate an estimator config on one, two, or M samples.

    The call shape is identical for base and meta estimators; results
    are deterministic given the config and inputs.
    """
    desc = descriptor(config.kind, config.name)
    if len(samples) < desc.min_arity or (
        desc.max_arity is not None and len(samples) > desc.max_arity
    ):
        expect = (
            str(desc.min_arity)
            if desc.max_arity == desc.min_arity
            else f"{desc.min_arity}+"
            if desc.max_arity is None
            else f"{desc.min_arity}..{desc.max_arity}"
        )
        raise ArityMismatchError(
            f"{config.kind.value}/{config.name} takes {expect} samples,"
            f" got {len(samples)}"
        )
    arrs = tuple(as_sample(s, f"sample {i}") for i, s in enumerate(samples))
    return float(desc.fn(config.params, config.members, config.mult, arrs))


def reseeded(config: EstimatorConfig, seed: int) -> EstimatorConfig:
    """Copy of a config with its top-level ``seed`` parameter replaced.

    Meta estimators pass their seed to members at call time, so
    replacing the top level reseeds the whole tree.
    """
    if "seed" not in config.params:
        return config
    params = dict(config.params)
    params["seed"] = int(seed)
    return dataclasses.replace(config, params=MappingProxyType(params))


def kernel_gram(samples, config: EstimatorConfig, seed: int = 0) -> kernels.GramMatrix:
    """Gram matrix of a distribution-kernel config over sample sets,
    with one derived seed per unordered pair."""
    if config.kind is not MeasureKind.DISTRIBUTION_KERNEL:
        raise InvalidParameterError("kernel_gram needs a distribution-kernel config")
    return kernels.gram_matrix(
        samples,
        lambda a, b, s: estimate(reseeded(config, s), a, b),
        seed=seed,
        kernel_label=config,
    )


def _coerce_like(default: Any, key: str, value: Any) -> Any:
    """Parse CLI-style string overrides into the default's type."""
    # bandwidths accept either a number or the 'median' sentinel
    if key.startswith("bandwidth"):
        if isinstance(value, str):
            if value == "median":
                return value
            try:
                return float(value)
            except ValueError:
                raise InvalidParameterError(
                    f"{key} must be a number or 'median', got {value!r}"
                ) from None
        return float(value)
    if isinstance(value, str) and not isinstance(default, str):
        try:
            if isinstance(default, bool):
                return value.lower() in ("1", "true", "yes")
            if isinstance(default, int):
                return int(value)
            if isinstance(default, float):
                return float(value)
        except ValueError:
            raise InvalidParameterError(f"cannot parse {key}={value!r}") from None
    if isinstance(default, float) and isinstance(value, (int, float)):
        return float(value)
    return value


def _validate_params(desc: EstimatorDescriptor, params: Mapping[str, Any]) -> None:
    for key, value in params.items():
        rule = _PARAM_RULES.get(key)
        if rule is not None:
            rule(desc, key, value)


def _rule_positive_int(desc, key, value):
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < 1:
        raise InvalidParameterError(f"{desc.name}: {key} must be a positive integer, got {value!r}")


def _rule_alpha(desc, key, value):
    if not isinstance(value, (int, float)) or not np.isfinite(value):
        raise InvalidParameterError(f"{desc.name}: alpha must be a finite real, got {value!r}")
    if desc.name == "renyi_mst":
        if not 0.0 < float(value) < 1.0:
            raise InvalidParameterError(f"{desc.name}: alpha must lie in (0, 1), got {value}")
    elif float(value) <= 0.0 or float(value) == 1.0:
        raise InvalidParameterError(f"{desc.name}: alpha must be positive and != 1, got {value}")


def _rule_bandwidth(desc, key, value):
    if isinstance(value, str):
        if value != "median":
            raise InvalidParameterError(f"{desc.name}: {key} must be positive or 'median'")
        return
    if not isinstance(value, (int, float)) or not float(value) > 0.0:
        raise InvalidParameterError(f"{desc.name}: {key} must be positive, got {value!r}")


def _rule_prob(desc, key, value):
    if not isinstance(value, (int, float)) or not 0.0 < float(value) < 1.0:
        raise InvalidParameterError(f"{desc.name}: {key} must lie in (0, 1), got {value!r}")


def _rule_seed(desc, key, value):
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < 0:
        raise InvalidParameterError(f"{desc.name}: seed must be a nonnegative integer")


def _rule_variant(desc, key, value):
    if value not in ("biased", "unbiased"):
        raise InvalidParameterError(f"{desc.name}: variant must be 'biased' or 'unbiased'")


def _rule_u(desc, key, value):
    if not isinstance(value, (int, float)) or not float(value) > 0.0:
        raise InvalidParameterError(f"{desc.name}: u must be positive, got {value!r}")


def _rule_member(desc, key, value):
    if not isinstance(value, str) or not value:
        raise InvalidParameterError(f"{desc.name}: {key} must be an estimator name")


_PARAM_RULES: dict[str, Callable] = {
    "k": _rule_positive_int,
    "alpha": _rule_alpha,
    "bandwidth": _rule_bandwidth,
    "bandwidth_x": _rule_bandwidth,
    "bandwidth_y": _rule_bandwidth,
    "pi1": _rule_prob,
    "pi2": _rule_prob,
    "seed": _rule_seed,
    "variant": _rule_variant,
    "u": _rule_u,
    "member_name": _rule_member,
}


def _check_alpha_k(params: Mapping[str, Any]) -> None:
    alpha, k = float(params["alpha"]), int(params["k"])
    if k + 1 - alpha <= 0:
        raise InvalidParameterError(f"alpha={alpha} needs k > alpha - 1 (got k={k})")


def _check_alpha_k_twosided(params: Mapping[str, Any]) -> None:
    alpha, k = float(params["alpha"]), int(params["k"])
    if k - alpha + 1 <= 0 or k + alpha - 1 <= 0:
        raise InvalidParameterError(
            f"alpha={alpha} needs k > max(alpha-1, 1-alpha) (got k={k})"
        )


def _check_js_weights(params: Mapping[str, Any]) -> None:
    if abs(float(params["pi1"]) + float(params["pi2"]) - 1.0) > 1e-12:
        raise InvalidParameterError("pi1 + pi2 must equal 1")


def _check_l2(params: Mapping[str, Any]) -> None:
    if int(params["k"]) < 2:
        raise InvalidParameterError("l2_knn_k needs k >= 2")


def _check_numeric_bandwidth(params: Mapping[str, Any]) -> None:
    if isinstance(params["bandwidth"], str):
        raise InvalidParameterError(
            "the expected kernel needs one numeric bandwidth shared by all pairs"
        )


# ---------------------------------------------------------------------------
# registration table


def _entropy_member_fn(member: EstimatorConfig) -> Callable[[np.ndarray], float]:
    return lambda z: estimate(member, z)


_register(EstimatorDescriptor(
    kind=MeasureKind.ENTROPY, name="shannon_knn_k", min_arity=1, max_arity=1,
    defaults=MappingProxyType({"k": entropy.DEFAULT_K_SHANNON}),
    mult_sensitive=False,
    summary="Shannon entropy from k-th nearest-neighbor distances",
    fn=lambda p, m, mult, s: entropy.shannon_knn_k(s[0], k=p["k"]),
))

_register(EstimatorDescriptor(
    kind=MeasureKind.ENTROPY, name="renyi_knn_k", min_arity=1, max_arity=1,
    defaults=MappingProxyType({"k": entropy.DEFAULT_K_ALPHA, "alpha": 0.9}),
    mult_sensitive=False,
    summary="Renyi entropy of order alpha from k-th neighbor distances",
    fn=lambda p, m, mult, s: entropy.renyi_knn_k(s[0], alpha=p["alpha"], k=p["k"]),
    check=_check_alpha_k,
))

_register(EstimatorDescriptor(
    kind=MeasureKind.ENTROPY, name="tsallis_knn_k", min_arity=1, max_arity=1,
    defaults=MappingProxyType({"k": entropy.DEFAULT_K_ALPHA, "alpha": 0.9}),
    mult_sensitive=False,
    summary="Tsallis entropy of order alpha from k-th neighbor distances",
    fn=lambda p, m, mult, s: entropy.tsallis_knn_k(s[0], alpha=p["alpha"], k=p["k"]),
    check=_check_alpha_k,
))

_register(EstimatorDescriptor(
    kind=MeasureKind.ENTROPY, name="renyi_mst", min_arity=1, max_arity=1,
    defaults=MappingProxyType({"alpha": 0.5}),
    mult_sensitive=True,
    summary="Renyi entropy of order alpha in (0,1) from the Euclidean MST"
            " (additive constant calibrated only when mult is set)",
    fn=lambda p, m, mult, s: entropy.renyi_mst(s[0], alpha=p["alpha"], mult=mult),
))

_register(EstimatorDescriptor(
    kind=MeasureKind.MUTUAL_INFORMATION, name="shannon_mi", min_arity=2, max_arity=None,
    defaults=MappingProxyType({"member_name": "shannon_knn_k"}),
    mult_sensitive=False,
    summary="Shannon mutual information as sum of marginal entropies minus joint entropy",
    fn=lambda p, m, mult, s: dependence.shannon_mi(s, _entropy_member_fn(m[0])),
    member_slots=(("member_name", MeasureKind.ENTROPY),),
))

_register(EstimatorDescriptor(
    kind=MeasureKind.MUTUAL_INFORMATION, name="hsic", min_arity=2, max_arity=2,
    defaults=MappingProxyType({"bandwidth_x": "median", "bandwidth_y": "median", "seed": 0}),
    mult_sensitive=False,
    summary="Hilbert-Schmidt independence criterion (biased V-statistic, Gaussian kernels)",
    fn=lambda p, m, mult, s: dependence.hsic(
        s[0], s[1], bandwidths=(p["bandwidth_x"], p["bandwidth_y"]), seed=p["seed"]
    ),
))

_register(EstimatorDescriptor(
    kind=MeasureKind.MUTUAL_INFORMATION, name="distance_covariance", min_arity=2, max_arity=2,
    defaults=MappingProxyType({}),
    mult_sensitive=False,
    summary="Distance covariance (V-statistic)",
    fn=lambda p, m, mult, s: dependence.distance_covariance(s[0], s[1]),
))

_register(EstimatorDescriptor(
    kind=MeasureKind.MUTUAL_INFORMATION, name="distance_correlation", min_arity=2, max_arity=2,
    defaults=MappingProxyType({}),
    mult_sensitive=False,
    summary="Distance correlation in [0, 1]",
    fn=lambda p, m, mult, s: dependence.distance_correlation(s[0], s[1]),
))

_register(EstimatorDescriptor(
    kind=MeasureKind.DIVERGENCE, name="kl_knn_k", min_arity=2, max_arity=2,
    defaults=MappingProxyType({"k": divergence.DEFAULT_K}),
    mult_sensitive=False,
    summary="Kullback-Leibler divergence from k-th neighbor distance ratios",
    fn=lambda p, m, mult, s: divergence.kl_knn_k(s[0], s[1], k=p["k"]),
))

_register(EstimatorDescriptor(
    kind=MeasureKind.DIVERGENCE, name="renyi_knn_k", min_arity=2, max_arity=2,
    defaults=MappingProxyType({"k": divergence.DEFAULT_K, "alpha": 0.9}),
    mult_sensitive=False,
    summary="Renyi divergence of order alpha from k-th neighbor distances",
    fn=lambda p, m, mult, s: divergence.renyi_knn_k(s[0], s[1], alpha=p["alpha"], k=p["k"]),
    check=_check_alpha_k_twosided,
))

_register(EstimatorDescriptor(
    kind=MeasureKind.DIVERGENCE, name="tsallis_knn_k", min_arity=2, max_arity=2,
    defaults=MappingProxyType({"k": divergence.DEFAULT_K, "alpha": 0.9}),
    mult_sensitive=False,
    summary="Tsallis divergence of order alpha from k-th neighbor distances",
    fn=lambda p, m, mult, s: divergence.tsallis_knn_k(s[0], s[1], alpha=p["alpha"], k=p["k"]),
    check=_check_alpha_k_twosided,
))

_register(EstimatorDescriptor(
    kind=MeasureKind.DIVERGENCE, name="l2_knn_k", min_arity=2, max_arity=2,
    defaults=MappingProxyType({"k": divergence.DEFAULT_K}),
    mult_sensitive=False,
    summary="L2 divergence by kNN plug-in of the three quadratic integrals",
    fn=lambda p, m, mult, s: divergence.l2_knn_k(s[0], s[1], k=p["k"]),
    check=_check_l2,
))

_register(EstimatorDescriptor(
    kind=MeasureKind.DIVERGENCE, name="mmd", min_arity=2, max_arity=2,
    defaults=MappingProxyType({"bandwidth": "median", "variant": "biased", "seed": 0}),
    mult_sensitive=False,
    summary="Maximum mean discrepancy; biased variant returns rooted MMD,"
            " unbiased returns the signed squared U-statistic",
    fn=lambda p, m, mult, s: divergence.mmd(
        s[0], s[1], bandwidth=p["bandwidth"], variant=p["variant"], seed=p["seed"]
    ),
))

_register(EstimatorDescriptor(
    kind=MeasureKind.DIVERGENCE, name="energy_distance", min_arity=2, max_arity=2,
    defaults=MappingProxyType({}),
    mult_sensitive=False,
    summary="Energy distance (V-statistic)",
    fn=lambda p, m, mult, s: divergence.energy_distance(s[0], s[1]),
))

_register(EstimatorDescriptor(
    kind=MeasureKind.DIVERGENCE, name="jdistance", min_arity=2, max_arity=2,
    defaults=MappingProxyType({"member_name": "kl_knn_k"}),
    mult_sensitive=False,
    summary="Symmetrised divergence member(X,Y) + member(Y,X)",
    fn=lambda p, m, mult, s: divergence.jdistance(
        s[0], s[1], lambda a, b: estimate(m[0], a, b)
    ),
    member_slots=(("member_name", MeasureKind.DIVERGENCE),),
))

_register(EstimatorDescriptor(
    kind=MeasureKind.DIVERGENCE, name="jensen_shannon", min_arity=2, max_arity=2,
    defaults=MappingProxyType(
        {"member_name": "shannon_knn_k", "pi1": 0.5, "pi2": 0.5, "seed": 0}
    ),
    mult_sensitive=False,
    summary="Jensen-Shannon divergence via a seeded mixture subsample"
            " and an entropy member",
    fn=lambda p, m, mult, s: divergence.jensen_shannon(
        s[0], s[1], _entropy_member_fn(m[0]),
        weights=(p["pi1"], p["pi2"]), seed=p["seed"],
    ),
    member_slots=(("member_name", MeasureKind.ENTROPY),),
    check=_check_js_weights,
))

_register(EstimatorDescriptor(
    kind=MeasureKind.ASSOCIATION, name="spearman_rho1", min_arity=1, max_arity=1,
    defaults=MappingProxyType({}),
    mult_sensitive=False,
    summary="Multivariate Spearman rho (survival-margin variant)",
    fn=lambda p, m, mult, s: dependence.spearman_rho_mv(s[0], "rho1"),
))

_register(EstimatorDescriptor(
    kind=MeasureKind.ASSOCIATION, name="spearman_rho2", min_arity=1, max_arity=1,
    defaults=MappingProxyType({}),
    mult_sensitive=False,
    summary="Multivariate Spearman rho (margin-product variant)",
    fn=lambda p, m, mult, s: dependence.spearman_rho_mv(s[0], "rho2"),
))

_register(EstimatorDescriptor(
    kind=MeasureKind.ASSOCIATION, name="spearman_rho3", min_arity=1, max_arity=1,
    defaults=MappingProxyType({}),
    mult_sensitive=False,
    summary="Multivariate Spearman rho (average of the two variants)",
    fn=lambda p, m, mult, s: dependence.spearman_rho_mv(s[0], "rho3"),
))

_register(EstimatorDescriptor(
    kind=MeasureKind.ASSOCIATION, name="blomqvist_beta", min_arity=1, max_arity=1,
    defaults=MappingProxyType({}),
    mult_sensitive=False,
    summary="Multivariate Blomqvist beta (median-point copula value)",
    fn=lambda p, m, mult, s: dependence.blomqvist_beta_mv(s[0]),
))

_register(EstimatorDescriptor(
    kind=MeasureKind.CROSS_QUANTITY, name="cross_entropy_knn_k", min_arity=2, max_arity=2,
    defaults=MappingProxyType({"k": kernels.DEFAULT_K}),
    mult_sensitive=False,
    summary="Cross-entropy -E_P log q from k-th neighbor distances",
    fn=lambda p, m, mult, s: kernels.cross_entropy_knn_k(s[0], s[1], k=p["k"]),
))

_register(EstimatorDescriptor(
    kind=MeasureKind.DISTRIBUTION_KERNEL, name="expected", min_arity=2, max_arity=2,
    defaults=MappingProxyType({"bandwidth": 1.0}),
    mult_sensitive=False,
    summary="Expected (mean-embedding) Gaussian kernel between distributions",
    fn=lambda p, m, mult, s: kernels.expected_kernel(s[0], s[1], bandwidth=p["bandwidth"]),
    check=_check_numeric_bandwidth,
))

_register(EstimatorDescriptor(
    kind=MeasureKind.DISTRIBUTION_KERNEL, name="ejs", min_arity=2, max_arity=2,
    defaults=MappingProxyType({"u": 1.0, "member_name": "jensen_shannon", "seed": 0}),
    mult_sensitive=False,
    summary="Exponentiated Jensen-Shannon kernel exp(-u * JS)",
    fn=lambda p, m, mult, s: kernels.ejs_kernel(
        s[0], s[1],
        js_fn=lambda a, b, sd: estimate(reseeded(m[0], sd), a, b),
        u=p["u"], seed=p["seed"],
    ),
    member_slots=(("member_name", MeasureKind.DIVERGENCE),),
))
