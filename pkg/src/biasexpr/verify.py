"""Numerical re-verification of every bias and expressivity result.

Each check is a function registered under a unique dotted name.  A check
receives the run configuration and its own generator, seeded from the
master seed and a CRC of the check name, so the outcome of one check never
depends on which others ran or in what order.

Pass rules: exact quantities must satisfy their inequality up to an absolute
1e-12 (or the tolerance the check states); sampled quantities must lie
within three Monte Carlo standard errors of their bound.
"""

from __future__ import annotations

import fnmatch
import math
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from itertools import combinations
from typing import Callable

import numpy as np

from . import bias_metrics as bm
from . import expressivity as ex
from .errors import ConfigError, InvalidParameter
from .oracle import (
    binomial_tail,
    brute_force_extrema,
    brute_force_min_subset,
    lemma2_batch,
    lemma2_check,
    min_mass_subset,
    random_biased_distribution,
    random_strategies,
    simplex_batch,
)
from .reporting import to_csv, to_json
from .search import (
    AlgorithmSpec,
    InformationResource,
    ResourceDistribution,
    ResourceSet,
    StrategyDistribution,
    TargetFunction,
    derive_seed,
    induced_strategy,
    mix_strategies,
    per_query_success,
    uniform_strategy,
)

SLACK = 1e-12
CHECK_COLUMNS = ("name", "passed", "observed", "bound_or_expected", "tolerance", "detail")


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    observed: float
    bound_or_expected: float
    tolerance: float
    detail: str


@dataclass
class VerificationReport:
    checks: list[Check]
    seed: int
    elapsed_ms: int = 0

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.checks]

    def to_dict(self, include_elapsed: bool = True) -> dict:
        out = {
            "seed": self.seed,
            "all_passed": self.all_passed,
            "checks": [asdict(c) for c in self.checks],
        }
        if include_elapsed:
            out["elapsed_ms"] = self.elapsed_ms
        return out

    def to_json(self, include_elapsed: bool = True) -> str:
        return to_json(self.to_dict(include_elapsed))

    def to_csv(self) -> str:
        return to_csv([asdict(c) for c in self.checks], CHECK_COLUMNS)


@dataclass(frozen=True)
class VerifyConfig:
    """Sizes of every grid and sample used by ``verify_all``.

    ``grid_n`` restricts every search-space-size grid to the listed sizes
    (handy for quick runs); ``only`` holds glob patterns over check names,
    where a bare word matches any name containing it.
    """

    seed: int = 0
    enum_max_n: int = 12
    grid_n: tuple[int, ...] = ()
    conservation_strategies: int = 100
    theorem1_max_n: int = 16
    theorem1_strategies: int = 10_000
    lemma1_max_n: int = 10
    lemma1_vectors: int = 40
    lemma2_samples: int = 100_000
    hoeffding_trials: int = 10_000
    sandwich_samples: int = 10_000
    sandwich_n: tuple[int, ...] = (2, 4, 8, 16, 64)
    pinsker_samples: int = 100_000
    pinsker_n: tuple[int, ...] = (2, 4, 8, 16)
    jensen_ensembles: int = 10_000
    famine_ensembles: int = 1_000
    mc_samples: int = 2_000
    induced_runs: int = 4_000
    only: tuple[str, ...] = ()
    workers: int = 1

    def validate(self) -> "VerifyConfig":
        counts = {
            k: v
            for k, v in asdict(self).items()
            if k not in ("seed", "grid_n", "only", "sandwich_n", "pinsker_n")
        }
        for key, value in counts.items():
            if not isinstance(value, int) or value < 1:
                raise ConfigError(f"{key} must be a positive integer, got {value!r}")
        if self.enum_max_n > 20:
            raise ConfigError("enum_max_n above 20 makes exhaustive enumeration impractical")
        if self.lemma1_max_n < 2 or self.theorem1_max_n < 2:
            raise ConfigError("lemma1_max_n and theorem1_max_n must be at least 2")
        for key in ("grid_n", "sandwich_n", "pinsker_n"):
            sizes = getattr(self, key)
            if any(not isinstance(s, int) or s < 1 for s in sizes):
                raise ConfigError(f"{key} entries must be positive integers")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        return self

    def sizes(self, default) -> list[int]:
        return list(self.grid_n) if self.grid_n else list(default)


CheckFn = Callable[[VerifyConfig, np.random.Generator], list[Check]]
_REGISTRY: dict[tuple[str, ...], CheckFn] = {}


def check(*names: str):
    """Register a function producing the named checks, in order."""

    def deco(fn: CheckFn) -> CheckFn:
        taken = set(registered_names())
        for name in names:
            if name in taken:
                raise ValueError(f"duplicate check {name}")
        _REGISTRY[names] = fn
        return fn

    return deco


def registered_names() -> list[str]:
    return sorted(n for group in _REGISTRY for n in group)


def _matches(name: str, patterns) -> bool:
    if not patterns:
        return True
    for pat in patterns:
        if any(ch in pat for ch in "*?["):
            if fnmatch.fnmatchcase(name, pat):
                return True
        elif pat in name:
            return True
    return False


def _worst(name, lhs, rhs, tol, detail="") -> Check:
    """Inequality ``lhs <= rhs + tol`` over arrays; report the tightest instance."""
    lhs = np.atleast_1d(np.asarray(lhs, dtype=float))
    rhs = np.atleast_1d(np.broadcast_to(np.asarray(rhs, dtype=float), lhs.shape))
    gap = lhs - rhs
    i = int(np.argmax(gap))
    ok = bool(gap[i] <= tol)
    return Check(name, ok, float(lhs[i]), float(rhs[i]), tol, f"{detail}; cases={lhs.size}".lstrip("; "))


def _close(name, observed, expected, tol, detail="") -> Check:
    observed = np.atleast_1d(np.asarray(observed, dtype=float))
    expected = np.atleast_1d(np.broadcast_to(np.asarray(expected, dtype=float), observed.shape))
    err = np.abs(observed - expected)
    i = int(np.argmax(err))
    ok = bool(err[i] <= tol)
    return Check(name, ok, float(observed[i]), float(expected[i]), tol, f"{detail}; cases={observed.size}".lstrip("; "))


def _merge(name, parts: list[Check]) -> Check:
    """Combine sub-checks into one; the first failing part (else the first) is reported."""
    bad = [c for c in parts if not c.passed]
    lead = bad[0] if bad else parts[0]
    detail = " | ".join(c.detail for c in parts)
    return Check(name, not bad, lead.observed, lead.bound_or_expected, lead.tolerance, detail)


# ---------------------------------------------------------------------------
# random ensembles
# ---------------------------------------------------------------------------


@dataclass
class Ensemble:
    d: ResourceDistribution
    strategies: dict
    t: TargetFunction

    @property
    def rs(self) -> ResourceSet:
        return self.d.resource_set

    @property
    def values(self) -> np.ndarray:
        """Per-resource success on ``t``."""
        return np.array([per_query_success(self.t, self.strategies[i]) for i in self.rs.ids])

    @property
    def mixture(self) -> StrategyDistribution:
        return mix_strategies(self.d, self.strategies)


def _random_target(rng, n, k=None) -> TargetFunction:
    k = int(rng.integers(1, n + 1)) if k is None else k
    return TargetFunction(n, tuple(sorted(rng.choice(n, size=k, replace=False).tolist())))


def _ensemble_from(masses, weights, t) -> Ensemble:
    rs = ResourceSet.from_strategies(masses)
    strategies = {r.id: r.payload.strategy for r in rs.resources}
    return Ensemble(ResourceDistribution(rs, weights), strategies, t)


def random_ensemble(rng, max_n=12, max_resources=8, n=None) -> Ensemble:
    n = int(rng.integers(2, max_n + 1)) if n is None else n
    m = int(rng.integers(1, max_resources + 1))
    masses = random_strategies(rng, m, n)[rng.permutation(m)]
    weights = simplex_batch(rng, m, 1)[0] if rng.random() < 0.7 else np.full(m, 1.0 / m)
    t = _random_target(rng, n, int(rng.integers(1, max(2, n // 2) + 1)))
    return _ensemble_from(masses, weights, t)


def bias_free_ensemble(rng, max_n=12, n=None) -> Ensemble:
    """All cyclic shifts of one random strategy, weighted uniformly; the mixture is uniform."""
    n = int(rng.integers(2, max_n + 1)) if n is None else n
    base = random_strategies(rng, 1 + int(rng.integers(4)), n)[-1]
    masses = np.array([np.roll(base, s) for s in range(n)])
    t = _random_target(rng, n, int(rng.integers(1, max(2, n // 2) + 1)))
    return _ensemble_from(masses, np.full(n, 1.0 / n), t)


def _q_min_for(rng, values) -> float:
    """A threshold in (0, 1] near the achieved success values, so bounds are not vacuous."""
    top = float(np.max(values))
    q = top * rng.uniform(0.3, 1.0) if top > 0 else rng.uniform(0.05, 1.0)
    return float(min(1.0, max(q, 1e-3)))


def _famine_sizes(cfg):
    return cfg.sizes(range(2, cfg.enum_max_n + 1))


# ---------------------------------------------------------------------------
# search framework and definitions
# ---------------------------------------------------------------------------


@check("expected_per_query_success.uniform_sampler", "expected_per_query_success.epsilon_greedy")
def _check_search(cfg, rng):
    diffs = []
    for n in cfg.sizes([2, 3, 5, 8]):
        res = InformationResource.task("f", rng.normal(size=n), int(rng.integers(1, 6)))
        got = induced_strategy(res, AlgorithmSpec("uniform-sampler"), runs=20, seed=int(rng.integers(2**31)))
        diffs.append(np.abs(got.mass - uniform_strategy(n).mass).max())
    first = _close("expected_per_query_success.uniform_sampler", diffs, 0.0, 1e-12,
                   "induced strategy of the uniform sampler vs uniform")

    runs = cfg.induced_runs
    res = InformationResource.task("f", (1.0, 0.0), 2)
    got = induced_strategy(res, AlgorithmSpec("epsilon-greedy", 1.0), runs=runs, seed=int(rng.integers(2**31)))
    # first coordinate is 0.25 + 0.5 * mean(Bernoulli(0.5))
    se = 0.25 / math.sqrt(runs)
    second = _close("expected_per_query_success.epsilon_greedy", got.mass[0], 0.5, 3 * se,
                    f"gamma=1, fitness=(1,0), queries=2, runs={runs}")
    return [first, second]


@check("bias_definition.finite_set_vs_distribution")
def _check_definitions(cfg, rng):
    gaps, lin = [], []
    for _ in range(200):
        e = random_ensemble(rng, cfg.enum_max_n)
        uni = ResourceDistribution.uniform(e.rs)
        gaps.append(bm.bias(e.rs, e.strategies, e.t) - (float(e.values.mean()) - e.t.p))
        gaps.append(bm.bias(uni, e.strategies, e.t) - bm.bias(e.rs, e.strategies, e.t))
        lin.append(per_query_success(e.t, e.mixture) - float(e.d.weights @ e.values))
    parts = [
        _close("a", gaps, 0.0, SLACK, "uniform-weight bias equals finite-set bias"),
        _close("b", lin, 0.0, SLACK, "success is linear in the mixture"),
    ]
    return [_merge("bias_definition.finite_set_vs_distribution", parts)]


# ---------------------------------------------------------------------------
# conservation, extrema, lemmas
# ---------------------------------------------------------------------------


@check("conservation_of_bias")
def _check_conservation(cfg, rng):
    worst = []
    for n in cfg.sizes(range(1, cfg.enum_max_n + 1)):
        P = random_strategies(rng, cfg.conservation_strategies, n)
        for k in range(1, n + 1):
            c = math.comb(n, k)
            for row in P:
                worst.append(abs(bm.conservation_sum(StrategyDistribution(row), k)) / c)
    return [_close("conservation_of_bias", worst, 0.0, 1e-9,
                   "sum over all k-hot targets of bias, divided by C(n,k)")]


@check("bias_upper_bound", "bias_upper_bound.derived_lower_bound", "bias_upper_bound.extrema_oracle",
       "bias_upper_bound.tightness", "bias_upper_bound.figure2", "bias_upper_bound.fails_for_k_above_half")
def _check_theorem1(cfg, rng):
    lhs, rhs, low_l, low_r, low_tol = [], [], [], [], []
    beyond = []
    for n in cfg.sizes(range(2, cfg.theorem1_max_n + 1)):
        P = random_strategies(rng, cfg.theorem1_strategies, n)
        for k in range(1, n):
            p = k / n
            inf_b, sup_b = bm.extrema_batch(P, k)
            if 2 * k > n:
                beyond.append(float(np.max(sup_b - ((p - 1) / p) * inf_b)))
                continue
            lhs.append(sup_b)
            rhs.append(((p - 1) / p) * inf_b)
            factor = p / (p - 1)
            # dividing by the negative factor (p-1)/p flips the sense: inf <= factor * sup
            low_l.append(inf_b - factor * sup_b)
            low_r.append(np.zeros_like(sup_b))
            low_tol.append(SLACK * max(1.0, abs(factor)))
    if not lhs:
        lhs, rhs, low_l, low_r, low_tol = [np.zeros(1)], [np.zeros(1)], [np.zeros(1)], [np.zeros(1)], [SLACK]
    main = _worst("bias_upper_bound", np.concatenate(lhs), np.concatenate(rhs), SLACK,
                  "sup bias vs ((p-1)/p) * inf bias for k <= n/2")
    lower = _worst("bias_upper_bound.derived_lower_bound", np.concatenate(low_l), np.concatenate(low_r),
                   max(low_tol), "inf bias - (p/(p-1)) * sup bias for k <= n/2")

    # n=3, k=2, P=(0.5, 0.5, 0): sup 1/3 against a bound of 1/12
    ext = bm.bias_extrema(StrategyDistribution([0.5, 0.5, 0.0]), 2)
    excess = [ext.sup_bias - ext.theorem1_bound] + beyond
    fails = Check("bias_upper_bound.fails_for_k_above_half", bool(excess[0] > SLACK), float(max(excess)), 0.0,
                  SLACK, "the bound needs a k-subset inside the complement, i.e. k <= n - k; "
                  "expected excess > 0 for k > n/2 (n=3, k=2, P=(0.5,0.5,0) exceeds by 1/4); "
                  f"random strategies exceeding: {sum(b > SLACK for b in beyond)} of {len(beyond)} (n, k) cells")

    errs = []
    for n in cfg.sizes(range(2, cfg.enum_max_n + 1)):
        P = random_strategies(rng, 8, n)
        for k in range(1, n):
            for row in P:
                s = StrategyDistribution(row)
                ext = bm.bias_extrema(s, k)
                lo, hi = brute_force_extrema(s, k)
                errs.append(max(abs(ext.inf_bias - (lo - k / n)), abs(ext.sup_bias - (hi - k / n))))
    oracle = _close("bias_upper_bound.extrema_oracle", errs, 0.0, SLACK,
                    "sorted partial sums vs enumeration of every target")

    ext = bm.bias_extrema(StrategyDistribution([0.5, 0.3, 0.2, 0.0]), 2)
    tight = _close("bias_upper_bound.tightness", [ext.sup_bias, ext.theorem1_bound], 0.3, SLACK,
                   "P=(0.5,0.3,0.2,0), k=2")

    rows = figure2_rows(-0.5, np.linspace(0.05, 0.95, 19))
    bounds = np.array([r.bound for r in rows])
    fig = _worst("bias_upper_bound.figure2", np.diff(bounds), 0.0, SLACK,
                 "bound nonincreasing in p at inf bias -0.5")
    return [main, lower, oracle, tight, fig, fails]


@check("lemma1_subset_with_at_most_uniform_mass")
def _check_lemma1(cfg, rng):
    lhs, rhs, opt = [], [], []
    for n in cfg.sizes(range(2, cfg.lemma1_max_n + 1)):
        vectors = [rng.exponential(size=n) * rng.uniform(0.1, 3.0) for _ in range(cfg.lemma1_vectors)]
        vectors.append(np.ones(n))
        vectors.append(rng.integers(0, 3, size=n).astype(float))
        for v in vectors:
            total = v.sum()
            for k in range(1, n):
                got = float(v[list(min_mass_subset(v, k))].sum())
                lhs.append(got)
                rhs.append(k / n * total)
                opt.append(got - brute_force_min_subset(v, k))
    parts = [
        _worst("a", lhs, rhs, SLACK, "k lightest mass vs (k/n) * total"),
        _close("b", opt, 0.0, SLACK, "equals the exhaustive minimum"),
    ]
    return [_merge("lemma1_subset_with_at_most_uniform_mass", parts)]


@check("lemma2_maximum_mass_over_target_set", "lemma2_maximum_mass_over_target_set.tightness",
       "lemma2_maximum_mass_over_target_set.fails_for_k_above_half")
def _check_lemma2(cfg, rng):
    sizes = cfg.sizes(range(2, 17))
    per_n = max(1, cfg.lemma2_samples // len(sizes))
    lhs, rhs, agree = [], [], []
    for n in sizes:
        P = random_strategies(rng, per_n, n)
        for k in range(1, n // 2 + 1):
            sup_m, bound = lemma2_batch(P, k)
            lhs.append(sup_m)
            rhs.append(bound)
            s0, b0 = lemma2_check(StrategyDistribution(P[0]), k)
            agree.append(max(abs(s0 - sup_m[0]), abs(b0 - bound[0])))
    if not lhs:
        lhs, rhs, agree = [np.zeros(1)], [np.zeros(1)], [0.0]
    main = _merge("lemma2_maximum_mass_over_target_set", [
        _worst("a", np.concatenate(lhs), np.concatenate(rhs), SLACK, "largest k-subset mass vs bound, k <= n/2"),
        _close("b", agree, 0.0, SLACK, "batch agrees with lemma2_check"),
    ])
    sup_m, bound = lemma2_check(StrategyDistribution([0.7, 0.1, 0.1, 0.1]), 1)
    tight = _close("lemma2_maximum_mass_over_target_set.tightness", [sup_m, bound], 0.7, SLACK,
                   "P=(0.7,0.1,0.1,0.1), k=1")
    sup_m, bound = lemma2_check(StrategyDistribution([0.5, 0.5, 0.0]), 2)
    fails = Check("lemma2_maximum_mass_over_target_set.fails_for_k_above_half", bool(sup_m - bound > SLACK),
                  sup_m, bound, SLACK, "expected sup mass > bound for n=3, k=2, P=(0.5,0.5,0): 1 vs 0.75")
    return [main, tight, fails]


# ---------------------------------------------------------------------------
# concentration
# ---------------------------------------------------------------------------


def two_point_demo() -> Ensemble:
    return _ensemble_from([[1, 0, 0, 0], [0, 0, 0, 1]], [0.5, 0.5], TargetFunction(4, (0,)))


@check("difference_between_estimated_and_actual_bias",
       "difference_between_estimated_and_actual_bias.binomial_oracle",
       "difference_between_estimated_and_actual_bias.grid")
def _check_hoeffding(cfg, rng):
    e = two_point_demo()
    trials = cfg.hoeffding_trials
    res = bm.hoeffding_experiment(e.d, e.strategies, e.t, 100, 0.2, trials, int(rng.integers(2**31)))
    demo = _worst("difference_between_estimated_and_actual_bias", res.exceedance_frequency, res.bound, 0.0,
                  f"two point masses, n=100, eps=0.2, trials={trials}")
    tail = binomial_tail(100, 0.5, 0.2)
    se = math.sqrt(tail * (1 - tail) / trials)
    oracle = _close("difference_between_estimated_and_actual_bias.binomial_oracle",
                    res.exceedance_frequency, tail, 3 * se, "exact Binomial(100, 0.5) tail")

    freq, bound = [], []
    for n, eps in ((10, 0.3), (25, 0.2), (50, 0.15), (100, 0.1), (200, 0.08)):
        for _ in range(3):
            e = random_ensemble(rng, 12)
            r = bm.hoeffding_experiment(e.d, e.strategies, e.t, n, eps, trials, int(rng.integers(2**31)))
            freq.append(r.exceedance_frequency)
            bound.append(r.bound)
    grid = _worst("difference_between_estimated_and_actual_bias.grid", freq, bound, 0.0,
                  "random ensembles over (n, eps) grid")
    return [demo, oracle, grid]


# ---------------------------------------------------------------------------
# famine / improbability / futility
# ---------------------------------------------------------------------------


def _ensembles(cfg, rng, maker=random_ensemble):
    sizes = _famine_sizes(cfg)
    return [maker(rng, n=int(rng.choice(sizes))) for _ in range(cfg.famine_ensembles)]


@check("improbability_of_favorable_information_resources",
       "improbability_of_favorable_information_resources.sampled")
def _check_improbability(cfg, rng):
    exact, mc, bound, mc_bound = [], [], [], []
    for e in _ensembles(cfg, rng):
        q_min = _q_min_for(rng, e.values)
        est, pr, b = bm.improbability_estimate(e.d, e.strategies, e.t, q_min, cfg.mc_samples,
                                               int(rng.integers(2**31)))
        exact.append(pr)
        bound.append(b)
        mc.append(est.estimate)
        mc_bound.append(b + 3 * est.std_error)
    return [
        _worst("improbability_of_favorable_information_resources", exact, bound, SLACK,
               "exact Pr(q >= q_min) under D vs (p + bias)/q_min"),
        _worst("improbability_of_favorable_information_resources.sampled", mc, mc_bound, 0.0,
               "sampled Pr(q >= q_min) vs bound + 3 se"),
    ]


@check("probability_of_success_under_bias_free_search")
def _check_bias_free_probability(cfg, rng):
    exact, bound, zero = [], [], []
    for e in _ensembles(cfg, rng, bias_free_ensemble):
        q_min = _q_min_for(rng, e.values)
        _, pr, _ = bm.improbability_estimate(e.d, e.strategies, e.t, q_min, 1, 0)
        zero.append(bm.bias(e.d, e.strategies, e.t))
        exact.append(pr)
        bound.append(bm.improbability_bound(e.t.p, 0.0, q_min))
    return [_merge("probability_of_success_under_bias_free_search", [
        _worst("a", exact, bound, SLACK, "Pr(q >= q_min) vs p/q_min on zero-bias ensembles"),
        _close("b", zero, 0.0, SLACK, "ensemble bias"),
    ])]


@check("famine_of_favorable_information_resources")
def _check_fofir(cfg, rng):
    prop, bound, ratio = [], [], []
    for e in _ensembles(cfg, rng):
        rep = bm.famine_proportion(e.rs, e.strategies, e.t, _q_min_for(rng, e.values))
        prop.append(rep.proportion)
        bound.append(min(1.0, rep.bound))
        if rep.bound > 0:
            ratio.append(rep.proportion / rep.bound)
    return [_worst("famine_of_favorable_information_resources", prop, bound, SLACK,
                   f"proportion of favorable resources; median tightness {np.median(ratio):.3f}")]


@check("proportion_of_successful_problems_under_bias_free_search")
def _check_bias_free_proportion(cfg, rng):
    prop, bound, zero = [], [], []
    for e in _ensembles(cfg, rng, bias_free_ensemble):
        q_min = _q_min_for(rng, e.values)
        rep = bm.famine_proportion(e.rs, e.strategies, e.t, q_min)
        prop.append(rep.proportion)
        bound.append(e.t.p / q_min)
        zero.append(bm.bias(e.rs, e.strategies, e.t))
    return [_merge("proportion_of_successful_problems_under_bias_free_search", [
        _worst("a", prop, bound, SLACK, "proportion vs p/q_min on zero-bias sets"),
        _close("b", zero, 0.0, SLACK, "set bias"),
    ])]


@check("futility_of_bias_free_search")
def _check_futility(cfg, rng):
    gap, marg = [], []
    for e in _ensembles(cfg, rng):
        gap.append(per_query_success(e.t, e.mixture) - e.t.p - bm.bias(e.d, e.strategies, e.t))
    for e in _ensembles(cfg, rng, bias_free_ensemble):
        marg.append(per_query_success(e.t, e.mixture) - e.t.p)
    return [_merge("futility_of_bias_free_search", [
        _close("a", gap, 0.0, SLACK, "q(t, P_D) - p - bias(D, t)"),
        _close("b", marg, 0.0, SLACK, "marginal success minus p on zero-bias ensembles"),
    ])]


@check("famine_of_applicable_targets")
def _check_foat(cfg, rng):
    prop, bound, weak = [], [], []
    for e in _ensembles(cfg, rng):
        pbar = e.mixture
        ext = bm.bias_extrema(pbar, e.t.k)
        q_min = max(1e-3, ext.sup_bias * rng.uniform(0.2, 1.0))
        rep = bm.applicable_targets_proportion(pbar, e.t.k, q_min)
        prop.append(rep.proportion)
        bound.append(rep.bound)
        weak.append(rep.bound - (e.t.p / q_min))
    return [_merge("famine_of_applicable_targets", [
        _worst("a", prop, bound, SLACK, "share of targets with bias >= q_min vs p/(p + q_min)"),
        _worst("b", weak, 0.0, SLACK, "p/(p + q_min) <= p/q_min"),
    ])]


@check("famine_of_favorable_biasing_distributions")
def _check_fofbd(cfg, rng):
    est, bound = [], []
    for e in _ensembles(cfg, rng):
        vals = e.values - e.t.p
        q_min = float(min(1.0, max(1e-3, vals.max() * rng.uniform(0.2, 1.0))))
        mc, b = bm.favorable_distributions_estimate(e.rs, e.strategies, e.t, q_min, cfg.mc_samples,
                                                    int(rng.integers(2**31)))
        est.append(mc.estimate)
        bound.append(b + 3 * mc.std_error)
    return [_worst("famine_of_favorable_biasing_distributions", est, bound, 0.0,
                   "sampled share of the weight simplex with bias >= q_min vs bound + 3 se")]


@check("bias_over_distributions", "bias_over_distributions.demo")
def _check_bias_over_distributions(cfg, rng):
    dev, var = 0.0, 0.0
    for e in _ensembles(cfg, rng):
        mc = bm.mean_bias_over_distributions(e.rs, e.strategies, e.t, cfg.mc_samples,
                                             int(rng.integers(2**31)))
        dev += mc.estimate - bm.bias(e.rs, e.strategies, e.t)
        var += mc.std_error**2
    pooled = _close("bias_over_distributions", dev, 0.0, 3 * math.sqrt(var),
                    "summed deviation of simplex-average bias from bias(B, t) across ensembles")

    e = _ensemble_from([[1, 0, 0, 0], [0.25] * 4], [0.5, 0.5], TargetFunction(4, (0,)))
    mc = bm.mean_bias_over_distributions(e.rs, e.strategies, e.t, max(cfg.mc_samples, 20_000),
                                         int(rng.integers(2**31)))
    demo = _close("bias_over_distributions.demo", mc.estimate, 0.375, 3 * mc.std_error,
                  "B = {(1,0,0,0), uniform}, t = {0}")
    return [pooled, demo]


@check("conservation_of_bias_over_distributions")
def _check_conservation_over_distributions(cfg, rng):
    worst = []
    sizes = [n for n in _famine_sizes(cfg) if n <= 8] or _famine_sizes(cfg)[:1]
    for _ in range(10):
        e = random_ensemble(rng, n=int(rng.choice(sizes)))
        n = e.rs.space_size
        seed = int(rng.integers(2**31))
        for k in range(1, n + 1):
            total = sum(
                bm.mean_bias_over_distributions(e.rs, e.strategies, TargetFunction(n, c), 500, seed).estimate
                for c in combinations(range(n), k)
            )
            worst.append(abs(total) / math.comb(n, k))
    return [_close("conservation_of_bias_over_distributions", worst, 0.0, 1e-9,
                   "sum over all k-hot targets of the simplex-average bias, divided by C(n,k)")]


@check("geometric_divergence")
def _check_geometric(cfg, rng):
    pr, bound, q, align = [], [], [], []
    for e in _ensembles(cfg, rng):
        q_min = _q_min_for(rng, e.values)
        rep = bm.geometric_bound(e.t, e.mixture, q_min)
        _, exact, _ = bm.improbability_estimate(e.d, e.strategies, e.t, q_min, 1, 0)
        pr.append(exact)
        bound.append(rep.bound)
        q.append(rep.success)
        align.append(math.sqrt(e.t.k) * rep.cos_theta)
    return [_merge("geometric_divergence", [
        _worst("a", pr, bound, SLACK, "Pr(q >= q_min) vs sqrt(k) cos(theta)/q_min"),
        _worst("b", q, align, SLACK, "t . P_D vs sqrt(k) cos(theta)"),
    ])]


# ---------------------------------------------------------------------------
# expressivity
# ---------------------------------------------------------------------------


@check("entropic_expressivity.kl_decomposition")
def _check_decomposition(cfg, rng):
    err = []
    for n in cfg.sizes([1, 2, 3, 4, 8, 16, 64]):
        for row in random_strategies(rng, 200, n):
            s = StrategyDistribution(row)
            err.append(ex.kl_to_uniform(s) + ex.entropy_bits(s) - math.log2(n))
    return [_close("entropic_expressivity.kl_decomposition", err, 0.0, SLACK, "KL(P||U) + H(P) - log2 n")]


@check("expressivity_bounded_by_bias.constructions", "expressivity_bounded_by_bias.sandwich",
       "expressivity_ranges_table")
def _check_expressivity_range(cfg, rng):
    bias_err, ent_err = [], []
    for n in cfg.sizes(cfg.sandwich_n):
        for k in range(1, n):
            t = TargetFunction(n, tuple(range(k)))
            p = k / n
            for eps in np.linspace(-p, 1 - p, 11):
                rng_ = ex.expressivity_range(n, k, eps)
                lo = ex.min_entropy_construction(t, eps)
                hi = ex.max_entropy_construction(t, eps)
                bias_err += [ex.per_target_bias(lo, t) - eps, ex.per_target_bias(hi, t) - eps]
                ent_err += [ex.entropy_bits(lo) - rng_.lower, ex.entropy_bits(hi) - rng_.upper]
    cons = _merge("expressivity_bounded_by_bias.constructions", [
        _close("a", bias_err, 0.0, SLACK, "construction bias minus eps"),
        _close("b", ent_err, 0.0, 1e-9, "construction entropy minus range endpoint"),
    ])

    below, above = [], []
    sizes = [n for n in cfg.sizes([2, 4, 8, 16]) if n >= 2]
    for _ in range(cfg.sandwich_samples):
        n = int(rng.choice(sizes))
        k = int(rng.integers(1, n))
        t = _random_target(rng, n, k)
        eps = rng.uniform(-t.p, 1 - t.p)
        h = ex.entropy_bits(random_biased_distribution(t, eps, rng))
        r = ex.expressivity_range(n, k, eps)
        below.append(r.lower - h)
        above.append(h - r.upper)
    sandwich = _merge("expressivity_bounded_by_bias.sandwich", [
        _worst("a", below, 0.0, 1e-9, "lower endpoint minus entropy"),
        _worst("b", above, 0.0, 1e-9, "entropy minus upper endpoint"),
    ])

    got = [[r.lower, r.upper] for r in ex.table_of_ranges(4, 2)]
    table = _close("expressivity_ranges_table", np.ravel(got), [0, 1, 1, 2, 0, 1], 0.0,
                   "n=4, k=2 rows (min, zero, max bias)")
    return [cons, sandwich, table]


@check("bias_expressivity_tradeoff")
def _check_tradeoff(cfg, rng):
    b_l, b_r, h_l, h_r = [], [], [], []

    def run(P, n):
        h = ex.entropy_rows(P)
        kl = np.maximum(0.0, math.log2(n) - h)
        for k in sorted({1, max(1, n // 2)}):
            if k >= n:
                continue
            inf_b, sup_b = bm.extrema_batch(P, k)
            worst = np.maximum(np.abs(inf_b), np.abs(sup_b))
            b_l.append(worst)
            b_r.append(np.sqrt(0.5 * kl))
            h_l.append(h)
            h_r.append(math.log2(n) - 2 * worst**2)

    sizes = cfg.sizes(cfg.pinsker_n)
    n_main = max(sizes)
    run(simplex_batch(rng, n_main, cfg.pinsker_samples), n_main)
    for n in sizes:
        run(random_strategies(rng, max(1, cfg.pinsker_samples // len(sizes)), n), n)
    if not b_l:
        return [Check("bias_expressivity_tradeoff", True, 0.0, 0.0, SLACK, "no proper targets for n=1")]
    return [_merge("bias_expressivity_tradeoff", [
        _worst("a", np.concatenate(b_l), np.concatenate(b_r), SLACK, "max |bias| vs sqrt(KL/2)"),
        _worst("b", np.concatenate(h_l), np.concatenate(h_r), SLACK, "H vs log2 n - 2 bias^2"),
    ])]


@check("bias_bound_under_expected_expressivity")
def _check_jensen(cfg, rng):
    exp_h, mix_h, cor, thm, worst_b = [], [], [], [], []
    sizes = cfg.sizes([2, 3, 4, 8, 16])
    for _ in range(cfg.jensen_ensembles):
        n = int(rng.choice(sizes))
        masses = random_strategies(rng, 4, n)[rng.choice(4, size=2, replace=False)]
        e = _ensemble_from(masses, simplex_batch(rng, 2, 1)[0], _random_target(rng, n, 1))
        mix = e.mixture
        exp_h.append(ex.expected_entropy(e.d, e.strategies))
        mix_h.append(ex.entropy_bits(mix))
        cor.append(ex.expected_expressivity_bias_upper(e.d, e.strategies))
        thm.append(ex.tradeoff_bias_upper(mix))
        worst_b.append(abs(ex.per_target_bias(mix, e.t)))
    return [_merge("bias_bound_under_expected_expressivity", [
        _worst("a", exp_h, mix_h, SLACK, "E_D[H(P_F)] vs H(P_D)"),
        _worst("b", thm, cor, SLACK, "trade-off bound vs expected-entropy bound"),
        _worst("c", worst_b, cor, SLACK, "|bias| vs expected-entropy bound"),
    ])]


# ---------------------------------------------------------------------------
# figure data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Figure2Row:
    p: float
    m: float
    bound: float


def figure2_rows(inf_bias: float, p_grid) -> list[Figure2Row]:
    """``(p, m, m * inf_bias)`` with ``m = (p - 1) / p`` for each grid value."""
    if inf_bias > 0:
        raise InvalidParameter(f"inf_bias must be <= 0, got {inf_bias!r}")
    rows = []
    for p in p_grid:
        p = float(p)
        if not 0.0 < p < 1.0:
            raise InvalidParameter(f"p must lie in (0, 1), got {p!r}")
        m = (p - 1.0) / p
        rows.append(Figure2Row(p, m, m * inf_bias + 0.0))
    return rows


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------


def _run_group(names, fn, cfg) -> list[Check]:
    seed = derive_seed(cfg.seed, zlib.crc32(names[0].encode()))
    checks = fn(cfg, np.random.default_rng(seed))
    assert [c.name for c in checks] == list(names), (names, [c.name for c in checks])
    return checks


def verify_all(config: VerifyConfig | None = None) -> VerificationReport:
    """Run every registered check selected by ``config.only``."""
    cfg = (config or VerifyConfig()).validate()
    start = time.perf_counter()
    groups = [(names, fn) for names, fn in _REGISTRY.items() if any(_matches(n, cfg.only) for n in names)]
    if not groups:
        raise ConfigError(f"no checks match {list(cfg.only)}")
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(lambda g: _run_group(g[0], g[1], cfg), groups))
    else:
        results = [_run_group(names, fn, cfg) for names, fn in groups]
    checks = sorted((c for group in results for c in group if _matches(c.name, cfg.only)), key=lambda c: c.name)
    elapsed = int(round((time.perf_counter() - start) * 1000))
    return VerificationReport(checks, cfg.seed, elapsed)


def quick_config(**overrides) -> VerifyConfig:
    """Small sizes for smoke runs and tests."""
    base = VerifyConfig(
        conservation_strategies=5,
        theorem1_max_n=8,
        theorem1_strategies=200,
        lemma1_max_n=6,
        lemma1_vectors=5,
        lemma2_samples=2_000,
        hoeffding_trials=2_000,
        sandwich_samples=300,
        sandwich_n=(2, 4, 8),
        pinsker_samples=2_000,
        jensen_ensembles=300,
        famine_ensembles=40,
        mc_samples=500,
        induced_runs=500,
        enum_max_n=8,
    )
    return replace(base, **overrides)
