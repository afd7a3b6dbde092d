"""Entropic expressivity and its relation to bias.

All entropies and divergences are in bits.  ``0 log 0`` is taken as 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import InvalidParameter
from .search import ResourceDistribution, StrategyDistribution, TargetFunction, mix_strategies, strategy_matrix

EPS_SLACK = 1e-12


@dataclass(frozen=True)
class ExpressivityRange:
    eps: float
    p_plus_eps: float
    lower: float
    upper: float


@dataclass(frozen=True)
class TradeoffBounds:
    expressivity_upper: float
    bias_upper: float


def _xlog2(x: float) -> float:
    return x * math.log2(x) if x > 0 else 0.0


def binary_entropy(a: float) -> float:
    return 0.0 - _xlog2(a) - _xlog2(1.0 - a)


def entropy_bits(p_dist: StrategyDistribution | np.ndarray) -> float:
    m = p_dist.mass if isinstance(p_dist, StrategyDistribution) else np.asarray(p_dist)
    nz = m[m > 0]
    return float(max(0.0, -(nz * np.log2(nz)).sum()))


def entropy_rows(P: np.ndarray) -> np.ndarray:
    """Row-wise entropy in bits of a stack of distributions."""
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(P > 0, P * np.log2(np.where(P > 0, P, 1.0)), 0.0)
    return -terms.sum(axis=1)


def kl_to_uniform(p_dist: StrategyDistribution) -> float:
    """``D_KL(P || U)`` in bits, computed term by term."""
    m = p_dist.mass
    nz = m[m > 0]
    return float(max(0.0, (nz * np.log2(nz * m.size)).sum()))


def entropic_expressivity(d: ResourceDistribution, strategies: Mapping) -> float:
    """Entropy of the averaged strategy (not the average of entropies)."""
    return entropy_bits(mix_strategies(d, strategies))


def _check_eps(p: float, eps: float) -> float:
    if not (-p - EPS_SLACK <= eps <= 1.0 - p + EPS_SLACK):
        raise InvalidParameter(f"bias {eps!r} outside the attainable range [{-p}, {1 - p}]")
    return min(1.0, max(0.0, p + eps))


def _range_upper(n: int, k: int, a: float) -> float:
    # vanishing terms are 0 by continuity
    up = a * math.log2(k / a) if a > 0 else 0.0
    b = 1.0 - a
    if b > 0:
        up += b * math.log2((n - k) / b)
    return up


def expressivity_range(n: int, k: int, eps: float) -> ExpressivityRange:
    if not 1 <= k < n:
        raise InvalidParameter(f"need 1 <= k < n, got n={n}, k={k}")
    a = _check_eps(k / n, eps)
    return ExpressivityRange(eps, a, binary_entropy(a), _range_upper(n, k, a))


def min_entropy_construction(t: TargetFunction, eps: float) -> StrategyDistribution:
    """Lowest-entropy distribution with bias ``eps`` on ``t``.

    All target mass sits on the lowest-index target element and all other
    mass on the lowest-index non-target element.
    """
    a = _check_eps(t.p, eps)
    mass = np.zeros(t.space_size)
    mass[t.indices[0]] = a
    rest = t.complement()
    if rest:
        mass[rest[0]] = 1.0 - a
    return StrategyDistribution(mass)


def max_entropy_construction(t: TargetFunction, eps: float) -> StrategyDistribution:
    """Highest-entropy distribution with bias ``eps`` on ``t`` (uniform within each block)."""
    n, k = t.space_size, t.k
    if k >= n:
        raise InvalidParameter("the maximum-entropy construction needs a proper target (k < n)")
    a = _check_eps(t.p, eps)
    mass = np.full(n, (1.0 - a) / (n - k))
    mass[list(t.indices)] = a / k
    return StrategyDistribution(mass)


def tradeoff_expressivity_upper(n: int, bias_value: float) -> float:
    if abs(bias_value) > 1.0:
        raise InvalidParameter(f"|bias| cannot exceed 1, got {bias_value!r}")
    return math.log2(n) - 2.0 * bias_value * bias_value


def tradeoff_bias_upper(pbar_d: StrategyDistribution) -> float:
    return math.sqrt(0.5 * kl_to_uniform(pbar_d))


def tradeoff_bounds(pbar_d: StrategyDistribution, t: TargetFunction) -> TradeoffBounds:
    b = per_target_bias(pbar_d, t)
    return TradeoffBounds(tradeoff_expressivity_upper(pbar_d.space_size, b), tradeoff_bias_upper(pbar_d))


def per_target_bias(pbar: StrategyDistribution, t: TargetFunction) -> float:
    return float(pbar.mass[list(t.indices)].sum()) - t.p


def expected_entropy(d: ResourceDistribution, strategies: Mapping) -> float:
    """``E_D[H(P_F)]``, the weighted mean of per-resource entropies."""
    return float(d.weights @ entropy_rows(strategy_matrix(d, strategies)))


def expected_expressivity_bias_upper(d: ResourceDistribution, strategies: Mapping) -> float:
    n = d.resource_set.space_size
    return math.sqrt(0.5 * max(0.0, math.log2(n) - expected_entropy(d, strategies)))


def table_of_ranges(n: int, k: int) -> list[ExpressivityRange]:
    """Ranges at minimum, zero and maximum bias, in that order."""
    if not 1 <= k < n:
        raise InvalidParameter(f"need 1 <= k < n, got n={n}, k={k}")
    p = k / n
    return [expressivity_range(n, k, e) for e in (-p, 0.0, 1.0 - p)]
