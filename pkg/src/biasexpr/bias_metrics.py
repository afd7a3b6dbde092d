"""Bias of a search algorithm toward a target, and the bounds that constrain it.

Bias is the expected per-query success on a target minus the uniform
baseline ``p = k / n``.  Everything here is a pure function of strategy
vectors; Monte Carlo routines take an explicit ``seed``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptySample, InvalidParameter
from .oracle import simplex_batch
from .search import (
    DEFAULT_ENUMERATION_CAP,
    ResourceDistribution,
    ResourceSet,
    StrategyDistribution,
    TargetFunction,
    mix_strategies,
    per_query_success,
    strategy_matrix,
    target_index_matrix,
)

FLOAT_SLACK = 1e-12


@dataclass(frozen=True)
class BiasExtrema:
    inf_bias: float
    sup_bias: float
    theorem1_bound: float
    p: float


@dataclass(frozen=True)
class HoeffdingResult:
    sample_size: int
    epsilon: float
    bound: float
    exceedance_frequency: float
    trials: int
    exceedances: int
    true_bias: float


@dataclass(frozen=True)
class FamineReport:
    proportion: float
    bound: float
    q_min: float

    @property
    def holds(self) -> bool:
        return self.proportion <= min(1.0, self.bound) + FLOAT_SLACK


@dataclass(frozen=True)
class MCEstimate:
    estimate: float
    std_error: float
    samples: int


@dataclass(frozen=True)
class GeometricReport:
    cos_theta: float
    bound: float
    success: float


def _check_q_min(q_min: float) -> None:
    if not 0.0 < q_min <= 1.0:
        raise InvalidParameter(f"q_min must lie in (0, 1], got {q_min!r}")


def _target_values(
    rs: ResourceSet | ResourceDistribution, strategies: Mapping, t: TargetFunction
) -> np.ndarray:
    """Per-resource success ``t . P_f`` in resource-set order."""
    mat = strategy_matrix(rs, strategies)
    if t.space_size != mat.shape[1]:
        raise DimensionMismatch(f"target over {t.space_size} elements, strategies over {mat.shape[1]}")
    return mat[:, list(t.indices)].sum(axis=1)


def bias_of_strategy(pbar: StrategyDistribution, t: TargetFunction) -> float:
    return per_query_success(t, pbar) - t.p


def bias(d: ResourceDistribution | ResourceSet, strategies: Mapping, t: TargetFunction) -> float:
    """Bias of the mixture of ``strategies`` under ``d``.

    Passing a bare ``ResourceSet`` uses uniform weights over it.
    """
    if isinstance(d, ResourceSet):
        d = ResourceDistribution.uniform(d)
    return bias_of_strategy(mix_strategies(d, strategies), t)


def empirical_bias(sample: Sequence[StrategyDistribution], t: TargetFunction) -> float:
    if len(sample) == 0:
        raise EmptySample("empirical bias needs at least one strategy")
    return float(np.mean([per_query_success(t, s) for s in sample])) - t.p


def hoeffding_bound(n: int, epsilon: float) -> float:
    if n < 1:
        raise InvalidParameter(f"n must be >= 1, got {n}")
    if not epsilon > 0:
        raise InvalidParameter(f"epsilon must be positive, got {epsilon!r}")
    return 2.0 * math.exp(-2.0 * n * epsilon * epsilon)


def hoeffding_experiment(
    d: ResourceDistribution,
    strategies: Mapping,
    t: TargetFunction,
    n: int,
    epsilon: float,
    trials: int,
    seed: int,
    chunk: int = 2_000_000,
) -> HoeffdingResult:
    """Frequency with which the bias of an iid size-``n`` sample misses the true bias by ``epsilon``.

    Resources are drawn by inverse CDF over ``d.weights``; each contributes
    its exact ``t . P_f``.  A deviation counts when it reaches ``epsilon``
    up to a relative 1e-9 rounding allowance.
    """
    bound = hoeffding_bound(n, epsilon)
    if trials < 1:
        raise InvalidParameter(f"trials must be >= 1, got {trials}")
    values = _target_values(d, strategies, t)
    expected = float(d.weights @ values)
    cdf = np.cumsum(d.weights)
    rng = np.random.default_rng(seed)
    threshold = epsilon * (1.0 - 1e-9)
    rows_per_chunk = max(1, chunk // n)
    hits = 0
    done = 0
    while done < trials:
        m = min(rows_per_chunk, trials - done)
        u = rng.random((m, n)) * cdf[-1]
        idx = np.minimum(np.searchsorted(cdf, u, side="right"), values.size - 1)
        means = values[idx].mean(axis=1)
        hits += int(np.count_nonzero(np.abs(means - expected) >= threshold))
        done += m
    return HoeffdingResult(n, epsilon, bound, hits / trials, trials, hits, expected - t.p)


def bias_extrema(pbar: StrategyDistribution, k: int) -> BiasExtrema:
    """Supremum and infimum of bias over all k-hot targets, via sorting."""
    n = pbar.space_size
    if not 1 <= k <= n:
        raise InvalidParameter(f"need 1 <= k <= {n}, got k={k}")
    p = k / n
    if k == n:
        return BiasExtrema(0.0, 0.0, 0.0, 1.0)
    srt = np.sort(pbar.mass)
    inf_b = float(srt[:k].sum()) - p
    sup_b = float(srt[n - k :].sum()) - p
    return BiasExtrema(inf_b, sup_b, ((p - 1.0) / p) * inf_b, p)


def extrema_batch(P: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise ``(inf_bias, sup_bias)`` for a stack of strategies."""
    n = P.shape[1]
    p = k / n
    srt = np.sort(P, axis=1)
    return srt[:, :k].sum(axis=1) - p, srt[:, n - k :].sum(axis=1) - p


def conservation_sum(pbar: StrategyDistribution, k: int, cap: int = DEFAULT_ENUMERATION_CAP) -> float:
    """Sum of bias over every k-hot target (zero up to rounding)."""
    idx = target_index_matrix(pbar.space_size, k, cap)
    return float((pbar.mass[idx].sum(axis=1) - k / pbar.space_size).sum())


def improbability_bound(p: float, bias_value: float, q_min: float) -> float:
    _check_q_min(q_min)
    return (p + bias_value) / q_min


def improbability_estimate(
    d: ResourceDistribution,
    strategies: Mapping,
    t: TargetFunction,
    q_min: float,
    samples: int,
    seed: int,
) -> tuple[MCEstimate, float, float]:
    """Sampled and exact ``Pr(q(t, F) >= q_min)`` for ``F ~ d``, plus the bound.

    Returns ``(estimate, exact_probability, bound)``.
    """
    _check_q_min(q_min)
    if samples < 1:
        raise InvalidParameter(f"samples must be >= 1, got {samples}")
    values = _target_values(d, strategies, t)
    favourable = values >= q_min - FLOAT_SLACK
    exact = float(d.weights[favourable].sum())
    cdf = np.cumsum(d.weights)
    rng = np.random.default_rng(seed)
    idx = np.minimum(np.searchsorted(cdf, rng.random(samples) * cdf[-1], side="right"), values.size - 1)
    freq = float(favourable[idx].mean())
    se = math.sqrt(freq * (1.0 - freq) / samples)
    b = improbability_bound(t.p, float(d.weights @ values) - t.p, q_min)
    return MCEstimate(freq, se, samples), exact, b


def famine_proportion(
    b: ResourceSet, strategies: Mapping, t: TargetFunction, q_min: float
) -> FamineReport:
    _check_q_min(q_min)
    values = _target_values(b, strategies, t)
    prop = float(np.count_nonzero(values >= q_min - FLOAT_SLACK)) / values.size
    bias_b = float(values.mean()) - t.p
    return FamineReport(prop, (t.p + bias_b) / q_min, q_min)


def applicable_targets_proportion(
    pbar_d: StrategyDistribution, k: int, q_min: float, cap: int = DEFAULT_ENUMERATION_CAP
) -> FamineReport:
    """Share of k-hot targets on which the bias reaches ``q_min``."""
    if not q_min > 0:
        raise InvalidParameter(f"q_min must be positive, got {q_min!r}")
    n = pbar_d.space_size
    p = k / n
    idx = target_index_matrix(n, k, cap)
    biases = pbar_d.mass[idx].sum(axis=1) - p
    prop = float(np.count_nonzero(biases >= q_min - FLOAT_SLACK)) / biases.size
    return FamineReport(prop, p / (p + q_min), q_min)


def _simplex_biases(
    b: ResourceSet, strategies: Mapping, t: TargetFunction, samples: int, seed: int
) -> tuple[np.ndarray, float]:
    if samples < 1:
        raise InvalidParameter(f"samples must be >= 1, got {samples}")
    values = _target_values(b, strategies, t)
    rng = np.random.default_rng(seed)
    biases = simplex_batch(rng, values.size, samples) @ values - t.p
    return biases, float(values.mean()) - t.p


def favorable_distributions_estimate(
    b: ResourceSet,
    strategies: Mapping,
    t: TargetFunction,
    q_min: float,
    samples: int,
    seed: int,
) -> tuple[MCEstimate, float]:
    """Estimated share of the weight simplex over ``b`` whose bias on ``t`` reaches ``q_min``."""
    _check_q_min(q_min)
    biases, bias_b = _simplex_biases(b, strategies, t, samples, seed)
    frac = float(np.count_nonzero(biases >= q_min - FLOAT_SLACK)) / samples
    se = math.sqrt(frac * (1.0 - frac) / samples)
    return MCEstimate(frac, se, samples), (t.p + bias_b) / q_min


def mean_bias_over_distributions(
    b: ResourceSet, strategies: Mapping, t: TargetFunction, samples: int, seed: int
) -> MCEstimate:
    """Average bias over weight vectors drawn uniformly from the simplex."""
    biases, _ = _simplex_biases(b, strategies, t, samples, seed)
    se = float(biases.std(ddof=1)) / math.sqrt(samples) if samples > 1 else 0.0
    return MCEstimate(float(biases.mean()), se, samples)


def geometric_bound(t: TargetFunction, pbar_d: StrategyDistribution, q_min: float) -> GeometricReport:
    _check_q_min(q_min)
    norm = float(np.linalg.norm(pbar_d.mass))
    if norm == 0.0:
        raise InvalidParameter("strategy has zero norm")
    success = per_query_success(t, pbar_d)
    root_k = math.sqrt(t.k)
    cos_theta = min(1.0, success / (root_k * norm))
    return GeometricReport(cos_theta, root_k * cos_theta / q_min, success)
