"""Search spaces, targets, strategies, information resources and toy searchers.

A strategy distribution is a probability vector over the search space.  An
information resource is represented either directly by the averaged strategy
it induces (``ExplicitStrategy``) or by a fitness vector plus a query budget
(``FitnessTask``) that one of the built-in algorithms consumes.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from pathlib import Path
from typing import Iterator, Mapping, NamedTuple, Sequence, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidAlgorithmSpec,
    InvalidParameter,
    MissingStrategy,
    NegativeMass,
    NotNormalized,
    SchemaError,
    TooLarge,
)

INPUT_TOL = 1e-6
INTERNAL_TOL = 1e-9
CLAMP_TOL = 1e-12
DEFAULT_ENUMERATION_CAP = 10**6


def derive_seed(master: int, *keys: int) -> int:
    """Deterministic child seed for ``(master, *keys)``, independent of call order."""
    ss = np.random.SeedSequence(entropy=int(master), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SearchSpace:
    size: int

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 1:
            raise InvalidParameter(f"search space size must be a positive integer, got {self.size!r}")


@dataclass(frozen=True)
class TargetFunction:
    """A k-hot indicator over a search space of ``space_size`` elements."""

    space_size: int
    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        object.__setattr__(self, "indices", idx)
        if self.space_size < 1:
            raise InvalidParameter("space_size must be positive")
        if not idx:
            raise InvalidParameter("a target must contain at least one element")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise InvalidParameter(f"target indices must be strictly increasing: {idx}")
        if idx[0] < 0 or idx[-1] >= self.space_size:
            raise InvalidParameter(f"target indices out of range [0, {self.space_size}): {idx}")

    @classmethod
    def of(cls, space_size: int, indices) -> "TargetFunction":
        """Build a target from an unordered collection of indices."""
        uniq = sorted(set(int(i) for i in indices))
        if len(uniq) != len(list(indices)):
            raise InvalidParameter("duplicate target indices")
        return cls(space_size, tuple(uniq))

    @property
    def k(self) -> int:
        return len(self.indices)

    @property
    def p(self) -> float:
        return self.k / self.space_size

    def vector(self) -> np.ndarray:
        v = np.zeros(self.space_size)
        v[list(self.indices)] = 1.0
        return v

    def complement(self) -> tuple[int, ...]:
        inside = set(self.indices)
        return tuple(i for i in range(self.space_size) if i not in inside)


@dataclass(frozen=True, eq=False)
class StrategyDistribution:
    """Probability vector over the search space (immutable)."""

    mass: np.ndarray

    def __post_init__(self):
        arr = np.array(self.mass, dtype=np.float64).reshape(-1)
        if arr.size == 0:
            raise DimensionMismatch("a strategy needs at least one entry")
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise NegativeMass(f"strategy entries must be finite and non-negative: {arr}")
        if abs(arr.sum() - 1.0) > INTERNAL_TOL:
            raise NotNormalized(f"strategy sums to {arr.sum()!r}")
        object.__setattr__(self, "mass", _readonly(arr))

    @property
    def space_size(self) -> int:
        return self.mass.size

    def __eq__(self, other):
        if not isinstance(other, StrategyDistribution):
            return NotImplemented
        return np.array_equal(self.mass, other.mass)

    __hash__ = None

    def __repr__(self):
        return f"StrategyDistribution({self.mass.tolist()})"

    def sample(self, rng: np.random.Generator) -> int:
        """Inverse-CDF draw over the stored entry order."""
        cdf = np.cumsum(self.mass)
        u = rng.random() * cdf[-1]
        return min(int(np.searchsorted(cdf, u, side="right")), self.space_size - 1)


@dataclass(frozen=True, eq=False)
class ExplicitStrategy:
    strategy: StrategyDistribution

    @property
    def space_size(self) -> int:
        return self.strategy.space_size


@dataclass(frozen=True)
class FitnessTask:
    fitness: tuple[float, ...]
    queries: int

    def __post_init__(self):
        object.__setattr__(self, "fitness", tuple(float(x) for x in self.fitness))
        if not self.fitness:
            raise DimensionMismatch("fitness vector is empty")
        if int(self.queries) != self.queries or self.queries < 1:
            raise InvalidParameter(f"queries must be a positive integer, got {self.queries!r}")

    @property
    def space_size(self) -> int:
        return len(self.fitness)


Payload = Union[ExplicitStrategy, FitnessTask]


@dataclass(frozen=True, eq=False)
class InformationResource:
    id: str
    payload: Payload

    @property
    def space_size(self) -> int:
        return self.payload.space_size

    @classmethod
    def explicit(cls, id: str, mass) -> "InformationResource":
        return cls(id, ExplicitStrategy(StrategyDistribution(mass)))

    @classmethod
    def task(cls, id: str, fitness, queries: int) -> "InformationResource":
        return cls(id, FitnessTask(tuple(fitness), queries))


@dataclass(frozen=True, eq=False)
class ResourceSet:
    space_size: int
    resources: tuple[InformationResource, ...]

    def __post_init__(self):
        object.__setattr__(self, "resources", tuple(self.resources))
        if not self.resources:
            raise InvalidParameter("a resource set must be non-empty")
        seen = set()
        for r in self.resources:
            if r.space_size != self.space_size:
                raise DimensionMismatch(
                    f"resource {r.id!r} has dimension {r.space_size}, expected {self.space_size}"
                )
            if r.id in seen:
                raise InvalidParameter(f"duplicate resource id {r.id!r}")
            seen.add(r.id)

    def __len__(self):
        return len(self.resources)

    @property
    def ids(self) -> list[str]:
        return [r.id for r in self.resources]

    @classmethod
    def from_strategies(cls, masses: Sequence, prefix: str = "f") -> "ResourceSet":
        """Convenience constructor for explicit-strategy resource sets."""
        rs = [InformationResource.explicit(f"{prefix}{i}", m) for i, m in enumerate(masses)]
        return cls(rs[0].space_size, tuple(rs))


@dataclass(frozen=True, eq=False)
class ResourceDistribution:
    resource_set: ResourceSet
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64).reshape(-1)
        if w.size != len(self.resource_set):
            raise DimensionMismatch(f"{w.size} weights for {len(self.resource_set)} resources")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise NegativeMass("resource weights must be non-negative")
        if abs(w.sum() - 1.0) > INTERNAL_TOL:
            raise NotNormalized(f"resource weights sum to {w.sum()!r}")
        object.__setattr__(self, "weights", _readonly(w))

    @classmethod
    def uniform(cls, resource_set: ResourceSet) -> "ResourceDistribution":
        n = len(resource_set)
        return cls(resource_set, np.full(n, 1.0 / n))


class Step(NamedTuple):
    queried_index: int
    evaluation: float


@dataclass(frozen=True, eq=False)
class SearchTrace:
    steps: tuple[Step, ...]
    per_step_strategies: tuple[StrategyDistribution, ...]

    def __post_init__(self):
        if len(self.steps) != len(self.per_step_strategies):
            raise DimensionMismatch("trace lists differ in length")

    def __len__(self):
        return len(self.steps)

    def __eq__(self, other):
        if not isinstance(other, SearchTrace):
            return NotImplemented
        return self.steps == other.steps and all(
            a == b for a, b in zip(self.per_step_strategies, other.per_step_strategies)
        )

    __hash__ = None

    def averaged(self) -> np.ndarray:
        """Time average of the per-step strategies for this run."""
        return np.mean([s.mass for s in self.per_step_strategies], axis=0)


# ---------------------------------------------------------------------------
# Algorithms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AlgorithmSpec:
    """Built-in search algorithm.

    ``uniform-sampler`` ignores history.  ``epsilon-greedy`` samples uniformly
    on the first query; afterwards it puts mass ``gamma`` uniformly on the
    indices holding the best evaluation seen so far and ``1 - gamma``
    uniformly over the whole space.
    """

    name: str = "uniform-sampler"
    gamma: float = 0.0

    def __post_init__(self):
        if self.name not in ("uniform-sampler", "epsilon-greedy"):
            raise InvalidAlgorithmSpec(f"unknown algorithm {self.name!r}")
        if not 0.0 <= self.gamma <= 1.0:
            raise InvalidAlgorithmSpec(f"gamma must lie in [0, 1], got {self.gamma!r}")

    @classmethod
    def parse(cls, text: str) -> "AlgorithmSpec":
        """Parse ``uniform-sampler`` or ``epsilon-greedy:<gamma>``."""
        name, _, arg = text.strip().partition(":")
        if name == "uniform-sampler":
            if arg:
                raise InvalidAlgorithmSpec("uniform-sampler takes no parameter")
            return cls(name)
        if name == "epsilon-greedy":
            try:
                gamma = float(arg) if arg else 0.5
            except ValueError:
                raise InvalidAlgorithmSpec(f"bad gamma {arg!r}") from None
            return cls(name, gamma)
        raise InvalidAlgorithmSpec(f"unknown algorithm {text!r}")

    def next_strategy(self, n: int, history: Sequence[Step]) -> np.ndarray:
        probs = np.full(n, 1.0 / n)
        if self.name == "uniform-sampler" or not history or self.gamma == 0.0:
            return probs
        best = max(s.evaluation for s in history)
        argmax = sorted({s.queried_index for s in history if s.evaluation == best})
        probs *= 1.0 - self.gamma
        probs[argmax] += self.gamma / len(argmax)
        return probs


def _simulate(task: FitnessTask, algorithm: AlgorithmSpec, rng: np.random.Generator) -> SearchTrace:
    n = task.space_size
    history: list[Step] = []
    strategies = []
    for _ in range(task.queries):
        strat = StrategyDistribution(algorithm.next_strategy(n, history))
        idx = strat.sample(rng)
        strategies.append(strat)
        history.append(Step(idx, task.fitness[idx]))
    return SearchTrace(tuple(history), tuple(strategies))


def _check_algorithm(algorithm) -> AlgorithmSpec:
    if isinstance(algorithm, str):
        return AlgorithmSpec.parse(algorithm)
    if not isinstance(algorithm, AlgorithmSpec):
        raise InvalidAlgorithmSpec(f"expected an AlgorithmSpec, got {type(algorithm).__name__}")
    return algorithm


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def uniform_strategy(space: SearchSpace | int) -> StrategyDistribution:
    n = space.size if isinstance(space, SearchSpace) else SearchSpace(space).size
    return StrategyDistribution(np.full(n, 1.0 / n))


def validate_strategy(space_size: int, raw: Sequence[float]) -> StrategyDistribution:
    """Accept a raw probability vector from untrusted input.

    Entries in ``[-1e-12, 0)`` are clamped to zero and a vector whose sum is
    within 1e-6 of one is renormalised.
    """
    arr = np.array(raw, dtype=np.float64).reshape(-1)
    if arr.size != space_size:
        raise DimensionMismatch(f"expected {space_size} entries, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise NegativeMass("strategy entries must be finite")
    if np.any(arr < -CLAMP_TOL):
        raise NegativeMass(f"negative mass {arr.min()!r}")
    arr[arr < 0] = 0.0
    total = arr.sum()
    if abs(total - 1.0) > INPUT_TOL:
        raise NotNormalized(f"entries sum to {total!r}")
    if total != 1.0:
        arr = arr / total
    return StrategyDistribution(arr)


def enumerate_targets(
    space_size: int, k: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> Iterator[TargetFunction]:
    """Lazily yield every k-hot target over ``space_size`` elements in lexicographic order."""
    check_enumerable(space_size, k, cap)
    return (TargetFunction(space_size, combo) for combo in combinations(range(space_size), k))


def check_enumerable(space_size: int, k: int, cap: int = DEFAULT_ENUMERATION_CAP) -> int:
    if not 1 <= k <= space_size:
        raise InvalidParameter(f"need 1 <= k <= {space_size}, got k={k}")
    count = math.comb(space_size, k)
    if count > cap:
        raise TooLarge(f"C({space_size}, {k}) = {count} exceeds cap {cap}")
    return count


def target_index_matrix(space_size: int, k: int, cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """All k-subsets as a read-only ``(C(n, k), k)`` integer array, lexicographic rows."""
    count = check_enumerable(space_size, k, cap)
    return _index_matrix(space_size, k, count)


@lru_cache(maxsize=256)
def _index_matrix(space_size: int, k: int, count: int) -> np.ndarray:
    flat = np.fromiter(
        (i for combo in combinations(range(space_size), k) for i in combo),
        dtype=np.intp,
        count=count * k,
    )
    return _readonly(flat.reshape(count, k))


def per_query_success(t: TargetFunction, pbar: StrategyDistribution) -> float:
    if t.space_size != pbar.space_size:
        raise DimensionMismatch(f"target over {t.space_size} elements, strategy over {pbar.space_size}")
    return float(pbar.mass[list(t.indices)].sum())


def run_search(
    resource: InformationResource, algorithm: AlgorithmSpec | str, seed: int | np.random.SeedSequence
) -> SearchTrace:
    algorithm = _check_algorithm(algorithm)
    if not isinstance(resource.payload, FitnessTask):
        raise InvalidAlgorithmSpec(f"resource {resource.id!r} has no fitness task to search")
    return _simulate(resource.payload, algorithm, np.random.default_rng(seed))


def _run_average(task: FitnessTask, algorithm: AlgorithmSpec, seed: int, run: int) -> np.ndarray:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(run,))
    return _simulate(task, algorithm, np.random.default_rng(ss)).averaged()


def induced_strategy(
    resource: InformationResource,
    algorithm: AlgorithmSpec | str = AlgorithmSpec(),
    runs: int = 100,
    seed: int = 0,
    workers: int = 1,
) -> StrategyDistribution:
    """Estimate the averaged strategy a resource induces.

    Each run is time-averaged first; run averages are then averaged.  Run
    ``r`` draws from its own generator derived from ``(seed, r)`` and results
    are summed in run order, so the output does not depend on ``workers``.
    """
    payload = resource.payload
    if isinstance(payload, ExplicitStrategy):
        return payload.strategy
    algorithm = _check_algorithm(algorithm)
    if runs < 1:
        raise InvalidParameter(f"runs must be >= 1, got {runs}")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            averages = list(pool.map(lambda r: _run_average(payload, algorithm, seed, r), range(runs)))
    else:
        averages = [_run_average(payload, algorithm, seed, r) for r in range(runs)]
    total = np.zeros(payload.space_size)
    for avg in averages:
        total += avg
    return StrategyDistribution(total / runs)


def resolve_strategies(
    resource_set: ResourceSet,
    algorithm: AlgorithmSpec | str = AlgorithmSpec(),
    runs: int = 100,
    seed: int = 0,
    workers: int = 1,
) -> dict[str, StrategyDistribution]:
    """Induced strategy for every resource; resource ``i`` uses seed ``derive_seed(seed, i)``."""
    return {
        r.id: induced_strategy(r, algorithm, runs, derive_seed(seed, i), workers)
        for i, r in enumerate(resource_set.resources)
    }


def strategy_matrix(
    d: ResourceDistribution | ResourceSet, strategies: Mapping[str, StrategyDistribution]
) -> np.ndarray:
    """Rows are the strategies of the resources in set order."""
    rs = d.resource_set if isinstance(d, ResourceDistribution) else d
    rows = []
    for r in rs.resources:
        try:
            s = strategies[r.id]
        except KeyError:
            raise MissingStrategy(f"no strategy for resource {r.id!r}") from None
        if s.space_size != rs.space_size:
            raise DimensionMismatch(
                f"strategy for {r.id!r} has dimension {s.space_size}, expected {rs.space_size}"
            )
        rows.append(s.mass)
    return np.vstack(rows)


def mix_strategies(
    d: ResourceDistribution, strategies: Mapping[str, StrategyDistribution]
) -> StrategyDistribution:
    return StrategyDistribution(d.weights @ strategy_matrix(d, strategies))


# ---------------------------------------------------------------------------
# Resource-set documents
# ---------------------------------------------------------------------------


@dataclass
class ResourceDocument:
    """Parsed resource-set file; ``weights`` is ``None`` when the file omits it."""

    resource_set: ResourceSet
    weights: list[float] | None = field(default=None)

    def distribution(self, weights: Sequence[float] | None = None) -> ResourceDistribution:
        w = weights if weights is not None else self.weights
        if w is None:
            return ResourceDistribution.uniform(self.resource_set)
        arr = np.asarray(w, dtype=np.float64)
        if arr.size != len(self.resource_set):
            raise DimensionMismatch(f"{arr.size} weights for {len(self.resource_set)} resources")
        if np.any(arr < -CLAMP_TOL):
            raise NegativeMass("weights must be non-negative")
        arr = np.clip(arr, 0.0, None)
        if abs(arr.sum() - 1.0) > INPUT_TOL:
            raise NotNormalized(f"weights sum to {arr.sum()!r}")
        return ResourceDistribution(self.resource_set, arr / arr.sum())


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def parse_resource_document(doc) -> ResourceDocument:
    """Validate a decoded resource-set document (see ``load_resource_set``)."""
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"line {exc.lineno}, column {exc.colno}", exc.msg) from None
    if not isinstance(doc, dict):
        raise SchemaError("$", "top level must be an object")
    unknown = set(doc) - {"omega_size", "resources", "weights"}
    if unknown:
        raise SchemaError("$", f"unknown fields {sorted(unknown)}")
    n = doc.get("omega_size")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise SchemaError("omega_size", "must be a positive integer")
    items = doc.get("resources")
    if not isinstance(items, list) or not items:
        raise SchemaError("resources", "must be a non-empty list")

    resources = []
    seen = set()
    for i, item in enumerate(items):
        where = f"resources[{i}]"
        if not isinstance(item, dict):
            raise SchemaError(where, "must be an object")
        rid = item.get("id")
        if not isinstance(rid, str) or not rid:
            raise SchemaError(f"{where}.id", "must be a non-empty string")
        if rid in seen:
            raise SchemaError(f"{where}.id", f"duplicate id {rid!r}")
        seen.add(rid)
        if "strategy" in item:
            if set(item) - {"id", "strategy"}:
                raise SchemaError(where, "a strategy resource takes only 'id' and 'strategy'")
            raw = item["strategy"]
            if not isinstance(raw, list) or not all(_is_number(x) for x in raw):
                raise SchemaError(f"{where}.strategy", "must be a list of numbers")
            try:
                strat = validate_strategy(n, raw)
            except (DimensionMismatch, NegativeMass, NotNormalized) as exc:
                raise SchemaError(f"{where}.strategy", str(exc)) from None
            resources.append(InformationResource(rid, ExplicitStrategy(strat)))
        elif "fitness" in item:
            if set(item) - {"id", "fitness", "queries"}:
                raise SchemaError(where, "a fitness resource takes only 'id', 'fitness' and 'queries'")
            fit = item["fitness"]
            if not isinstance(fit, list) or not all(_is_number(x) for x in fit):
                raise SchemaError(f"{where}.fitness", "must be a list of numbers")
            if len(fit) != n:
                raise SchemaError(f"{where}.fitness", f"expected {n} entries, got {len(fit)}")
            q = item.get("queries")
            if not isinstance(q, int) or isinstance(q, bool) or q < 1:
                raise SchemaError(f"{where}.queries", "must be a positive integer")
            resources.append(InformationResource.task(rid, fit, q))
        else:
            raise SchemaError(where, "needs either 'strategy' or 'fitness'")

    weights = doc.get("weights")
    if weights is not None:
        if not isinstance(weights, list) or not all(_is_number(x) for x in weights):
            raise SchemaError("weights", "must be a list of numbers")
        if len(weights) != len(resources):
            raise SchemaError("weights", f"expected {len(resources)} entries, got {len(weights)}")
        if any(w < 0 for w in weights):
            raise SchemaError("weights", "entries must be non-negative")
        if abs(sum(weights) - 1.0) > INPUT_TOL:
            raise SchemaError("weights", f"entries sum to {sum(weights)!r}")
        weights = [float(w) for w in weights]
    return ResourceDocument(ResourceSet(n, tuple(resources)), weights)


def load_resource_set(path: str | Path) -> ResourceDocument:
    """Read a JSON resource-set file.

    Expected layout::

        {"omega_size": 4,
         "resources": [{"id": "a", "strategy": [1, 0, 0, 0]},
                       {"id": "b", "fitness": [3, 1, 2, 0], "queries": 5}],
         "weights": [0.5, 0.5]}
    """
    text = Path(path).read_text()
    return parse_resource_document(text)
