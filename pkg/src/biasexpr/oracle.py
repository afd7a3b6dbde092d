"""Brute-force and sampling oracles.

These helpers are deliberately naive: they enumerate subsets or draw random
vectors so that the closed-form routines elsewhere can be checked against
them.
"""

from __future__ import annotations

import math
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import InvalidParameter
from .search import StrategyDistribution, TargetFunction


def min_mass_subset(masses: Sequence[float], k: int) -> tuple[int, ...]:
    """Indices of the ``k`` lightest entries, ties broken by lowest index.

    The returned subset has total mass at most ``k / len(masses)`` times the
    total, which is the guarantee the inductive existence argument gives; the
    direct construction is also the global minimiser over all k-subsets.
    """
    arr = np.asarray(masses, dtype=np.float64).reshape(-1)
    if np.any(arr < 0):
        raise InvalidParameter("masses must be non-negative")
    if not 1 <= k < arr.size:
        raise InvalidParameter(f"need 1 <= k < {arr.size}, got k={k}")
    order = np.argsort(arr, kind="stable")
    return tuple(sorted(int(i) for i in order[:k]))


def lemma2_check(p_dist: StrategyDistribution, k: int) -> tuple[float, float]:
    """Return ``(sup_mass, bound)`` for the largest k-subset mass.

    ``sup_mass`` is the sum of the ``k`` largest entries and
    ``bound = 1 - ((1 - p) / p) * (sum of k smallest entries)`` with
    ``p = k / n``.
    """
    n = p_dist.space_size
    if not 1 <= k < n:
        raise InvalidParameter(f"need 1 <= k < {n}, got k={k}")
    srt = np.sort(p_dist.mass)
    p = k / n
    sup_mass = float(srt[n - k :].sum())
    inf_mass = float(srt[:k].sum())
    return sup_mass, 1.0 - ((1.0 - p) / p) * inf_mass


def sample_simplex(dim: int, seed: int | np.random.Generator) -> np.ndarray:
    """One point drawn uniformly from the (dim-1)-simplex.

    Normalised unit-rate exponentials; ``seed`` may be an int or a generator.
    """
    if dim < 1:
        raise InvalidParameter(f"dim must be >= 1, got {dim}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return simplex_batch(rng, dim, 1)[0]


def simplex_batch(rng: np.random.Generator, dim: int, count: int) -> np.ndarray:
    if dim < 1:
        raise InvalidParameter(f"dim must be >= 1, got {dim}")
    e = rng.standard_exponential((count, dim))
    return e / e.sum(axis=1, keepdims=True)


def random_strategies(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    """Varied random probability vectors, one per row.

    Rows cycle through flat Dirichlet draws, spiky low-concentration draws
    and sparse vectors with a random set of exact zeros, so bounds get
    exercised near the simplex boundary as well as the interior.
    """
    out = np.empty((count, n))
    kind = np.arange(count) % 4
    for c, alpha in ((0, 1.0), (1, 0.1), (2, 10.0)):
        rows = np.flatnonzero(kind == c)
        if rows.size:
            out[rows] = rng.dirichlet(np.full(n, alpha), size=rows.size) if n > 1 else 1.0
    rows = np.flatnonzero(kind == 3)
    if rows.size:
        e = rng.standard_exponential((rows.size, n))
        keep = rng.random((rows.size, n)) < 0.5
        keep[np.arange(rows.size), rng.integers(0, n, rows.size)] = True
        e *= keep
        out[rows] = e / e.sum(axis=1, keepdims=True)
    return out


def brute_force_extrema(pbar: StrategyDistribution, k: int) -> tuple[float, float]:
    """``(min, max)`` of the target mass over every k-subset, by enumeration."""
    n = pbar.space_size
    sums = [float(pbar.mass[list(c)].sum()) for c in combinations(range(n), k)]
    return min(sums), max(sums)


def brute_force_min_subset(masses: Sequence[float], k: int) -> float:
    """Smallest k-subset mass, by enumeration."""
    arr = np.asarray(masses, dtype=np.float64)
    return min(float(arr[list(c)].sum()) for c in combinations(range(arr.size), k))


def random_biased_distribution(
    t: TargetFunction, eps: float, rng: np.random.Generator
) -> np.ndarray:
    """Random distribution whose bias on ``t`` is ``eps``.

    Mixes permuted copies of the two extremal constructions with a random
    within-block Dirichlet draw; every component puts mass ``p + eps`` on
    the target block, so the mixture does too.
    """
    n, k = t.space_size, t.k
    inside = np.asarray(t.indices)
    outside = np.asarray(t.complement(), dtype=np.intp)
    a = t.p + eps
    b = 1.0 - a

    def blocks(target_part, other_part):
        v = np.zeros(n)
        v[inside] = target_part
        if outside.size:
            v[outside] = other_part
        return v

    spike_t = np.zeros(k)
    spike_t[rng.integers(k)] = a
    spike_o = np.zeros(n - k)
    if n - k:
        spike_o[rng.integers(n - k)] = b
    low = blocks(spike_t, spike_o)
    high = blocks(np.full(k, a / k), np.full(n - k, b / (n - k)) if n - k else [])
    alpha = rng.choice([0.2, 1.0, 5.0])
    rand = blocks(
        a * rng.dirichlet(np.full(k, alpha)) if k > 1 else [a],
        b * rng.dirichlet(np.full(n - k, alpha)) if n - k > 1 else ([b] if n - k else []),
    )
    w = rng.dirichlet(np.ones(3))
    return w[0] * low + w[1] * high + w[2] * rand


def lemma2_batch(P: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise ``(sup_mass, bound)`` as in ``lemma2_check``."""
    n = P.shape[1]
    p = k / n
    srt = np.sort(P, axis=1)
    return srt[:, n - k :].sum(axis=1), 1.0 - ((1.0 - p) / p) * srt[:, :k].sum(axis=1)


def binomial_tail(n: int, prob: float, epsilon: float) -> float:
    """Exact ``Pr(|X/n - prob| >= epsilon)`` for ``X ~ Binomial(n, prob)``.

    Uses the same relative 1e-9 rounding allowance at the boundary as the
    sampled experiment.
    """
    threshold = epsilon * (1.0 - 1e-9)
    return sum(
        math.comb(n, x) * prob**x * (1.0 - prob) ** (n - x)
        for x in range(n + 1)
        if abs(x / n - prob) >= threshold
    )
