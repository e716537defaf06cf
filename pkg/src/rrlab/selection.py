"""Per-algorithm performance metrics, portfolio contribution analysis, and
recommendation via nearest-neighbour classification on 2D coordinates.

The relative gap of a record is (objective - best) / best capped at 1, with
gap 1 for missing or infeasible results and a zero-best convention of
gap 0 iff the objective is also 0. A solution is "good" when it is feasible
and within 5% of the best known objective.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

GOOD_FACTOR = 1.05

# Published processor clock-speed ratios relative to the fastest (3.9 GHz)
# machine; normalized CPU time = cpu_minutes * ratio.
CLOCK_SPEED_RATIOS = {
    "DES": 3.9 / 3.9,
    "DITUoIArta": 3.2 / 3.9,
    "UoS": 2.0 / 3.9,
    "Goal": 3.2 / 3.9,
    "FBHS": 2.6 / 3.9,
    "Udine": 2.4 / 3.9,
    "Reprobate": 3.2 / 3.9,
    "MODAL": 2.8 / 3.9,
}


@dataclass(frozen=True)
class PerformanceRecord:
    """One (instance, algorithm) result row."""

    instance_id: str
    algorithm: str
    objective: int | None
    feasible: bool
    wall_minutes: float
    cpu_minutes: float
    clock_ratio: float = 1.0

    def __post_init__(self):
        if self.objective is not None and self.objective < 0:
            raise ValueError(f"negative objective {self.objective}")
        if (self.objective is None) == self.feasible:
            raise ValueError("objective must be present exactly for feasible records")

    @property
    def normalized_cpu_minutes(self) -> float:
        return self.cpu_minutes * self.clock_ratio


@dataclass
class GapMatrix:
    """Relative gaps plus good/best/feasible labels per (instance, algorithm).

    Cells without a record count as unsolved: gap 1, no labels.
    """

    instances: tuple[str, ...]
    algorithms: tuple[str, ...]
    gaps: dict[tuple[str, str], float]
    good: frozenset[tuple[str, str]]
    best: frozenset[tuple[str, str]]
    feasible: frozenset[tuple[str, str]]
    best_objective: dict[str, int | None]

    def gap(self, instance: str, algorithm: str) -> float:
        return self.gaps.get((instance, algorithm), 1.0)

    def matrix(self, algorithms: tuple[str, ...] | None = None) -> np.ndarray:
        algs = algorithms if algorithms is not None else self.algorithms
        return np.array(
            [[self.gap(i, a) for a in algs] for i in self.instances], dtype=float
        )


def compute_gaps(records: list[PerformanceRecord]) -> GapMatrix:
    """Build the gap matrix and good/best labels from performance records."""
    instances: list[str] = []
    algorithms: list[str] = []
    by_instance: dict[str, list[PerformanceRecord]] = {}
    for r in records:
        if r.instance_id not in by_instance:
            instances.append(r.instance_id)
            by_instance[r.instance_id] = []
        by_instance[r.instance_id].append(r)
        if r.algorithm not in algorithms:
            algorithms.append(r.algorithm)

    gaps: dict[tuple[str, str], float] = {}
    good = set()
    best_labels = set()
    feasible = set()
    best_objective: dict[str, int | None] = {}
    for inst in instances:
        rows = by_instance[inst]
        solved = [r.objective for r in rows if r.feasible]
        best = min(solved) if solved else None
        best_objective[inst] = best
        for r in rows:
            key = (inst, r.algorithm)
            if not r.feasible:
                gaps[key] = 1.0
                continue
            feasible.add(key)
            if best == 0:
                gaps[key] = 0.0 if r.objective == 0 else 1.0
            else:
                gaps[key] = min(1.0, (r.objective - best) / best)
            if r.objective == best:
                best_labels.add(key)
            if (best == 0 and r.objective == 0) or (
                best > 0 and r.objective <= GOOD_FACTOR * best
            ):
                good.add(key)
    return GapMatrix(
        instances=tuple(instances),
        algorithms=tuple(algorithms),
        gaps=gaps,
        good=frozenset(good),
        best=frozenset(best_labels),
        feasible=frozenset(feasible),
        best_objective=best_objective,
    )


def portfolio_gap(subset: set[str] | tuple[str, ...], gaps: GapMatrix) -> float:
    """Mean over instances of the best (lowest) gap within the subset.

    The empty portfolio scores 1 on every instance.
    """
    if not gaps.instances:
        return 1.0
    subset = tuple(subset)
    if not subset:
        return 1.0
    total = 0.0
    for inst in gaps.instances:
        total += min(gaps.gap(inst, a) for a in subset)
    return total / len(gaps.instances)


@dataclass(frozen=True)
class ContributionScores:
    standalone: float
    marginal: float
    shapley: float


def contribution_scores(
    gaps: GapMatrix, algorithms: tuple[str, ...] | None = None
) -> dict[str, ContributionScores]:
    """Standalone, marginal, and exact Shapley contribution per algorithm.

    Shapley values use the relative-gap portfolio value, so they satisfy
    efficiency (sum = gap of empty portfolio minus gap of full portfolio),
    symmetry, and the dummy axiom. Exact enumeration over all 2^m subsets;
    refuses m > 20.
    """
    algs = tuple(algorithms if algorithms is not None else gaps.algorithms)
    m = len(algs)
    if m == 0:
        return {}
    if m > 20:
        raise ValueError(f"exact Shapley enumeration limited to 20 algorithms, got {m}")

    matrix = gaps.matrix(algs)  # instances x algorithms, 1.0 for missing
    n_inst = matrix.shape[0]

    values = np.empty(1 << m)
    values[0] = 1.0
    for mask in range(1, 1 << m):
        cols = [i for i in range(m) if mask >> i & 1]
        values[mask] = matrix[:, cols].min(axis=1).mean() if n_inst else 1.0

    full = (1 << m) - 1
    fact = [math.factorial(i) for i in range(m + 1)]
    weights = [fact[s] * fact[m - 1 - s] / fact[m] for s in range(m)]

    scores = {}
    for i, name in enumerate(algs):
        bit = 1 << i
        shapley = 0.0
        rest = [b for b in range(m) if b != i]
        for sub in range(1 << (m - 1)):
            mask = 0
            for pos, b in enumerate(rest):
                if sub >> pos & 1:
                    mask |= 1 << b
            size = bin(mask).count("1")
            shapley += weights[size] * (values[mask] - values[mask | bit])
        scores[name] = ContributionScores(
            standalone=values[bit],
            marginal=values[full & ~bit] - values[full],
            shapley=shapley,
        )
    return scores


@dataclass(frozen=True)
class TrainingPoint:
    """One training instance: 2D coordinates plus per-algorithm labels."""

    z1: float
    z2: float
    good: dict[str, bool]
    gap: dict[str, float]


@dataclass
class Selector:
    """k-nearest-neighbour good-performance classifier over 2D coordinates."""

    points: np.ndarray  # (n, 2)
    algorithms: tuple[str, ...]
    good: np.ndarray  # (n, m) bool
    gap: np.ndarray  # (n, m) float
    k: int
    standalone: dict[str, float] = field(default_factory=dict)


def train_selector(training: list[TrainingPoint], k: int = 11) -> Selector:
    """Store the training points for k-NN prediction.

    ``k`` defaults to 11 (odd, so the per-algorithm majority vote cannot
    tie). Requires at least ``k`` points.
    """
    if not training:
        raise ValueError("empty training set")
    if len(training) < k:
        raise ValueError(f"need at least k={k} training points, got {len(training)}")
    algorithms = tuple(sorted({a for p in training for a in p.good}))
    points = np.array([[p.z1, p.z2] for p in training], dtype=float)
    good = np.array(
        [[bool(p.good.get(a, False)) for a in algorithms] for p in training]
    )
    gap = np.array(
        [[float(p.gap.get(a, 1.0)) for a in algorithms] for p in training]
    )
    standalone = {a: float(gap[:, i].mean()) for i, a in enumerate(algorithms)}
    return Selector(points, algorithms, good, gap, k, standalone)


def recommend(selector: Selector, z: tuple[float, float]) -> list[str]:
    """Rank algorithms for a query point, most recommended first.

    Algorithms predicted good (majority good label among the k nearest
    training points, Euclidean distance) come first, ordered by mean
    neighbour gap; ties break on global standalone gap, then name. If no
    algorithm is predicted good the ranking falls back to standalone gap,
    putting the global single best on top.
    """
    point = np.asarray(z, dtype=float)
    d2 = ((selector.points - point) ** 2).sum(axis=1)
    nearest = np.argsort(d2, kind="stable")[: selector.k]
    votes = selector.good[nearest].sum(axis=0)
    mean_gap = selector.gap[nearest].mean(axis=0)

    ranked = []
    for i, name in enumerate(selector.algorithms):
        predicted_good = votes[i] * 2 > len(nearest)
        ranked.append((name, predicted_good, float(mean_gap[i])))
    good_block = sorted(
        (r for r in ranked if r[1]),
        key=lambda r: (r[2], selector.standalone[r[0]], r[0]),
    )
    rest = sorted(
        (r for r in ranked if not r[1]),
        key=lambda r: (selector.standalone[r[0]], r[0]),
    )
    return [name for name, _, _ in good_block + rest]


@dataclass(frozen=True)
class SelectorMetrics:
    feasible_pct: float
    best_pct: float
    good_pct: float
    mean_gap: float


@dataclass(frozen=True)
class SelectorEvaluation:
    selector: SelectorMetrics
    single_best: SelectorMetrics
    single_best_name: str
    oracle: SelectorMetrics


def _metrics_for(choices: list[tuple[str, str]], gaps: GapMatrix) -> SelectorMetrics:
    n = len(choices)
    if n == 0:
        return SelectorMetrics(0.0, 0.0, 0.0, 1.0)
    feas = sum(1 for c in choices if c in gaps.feasible)
    best = sum(1 for c in choices if c in gaps.best)
    good = sum(1 for c in choices if c in gaps.good)
    mean_gap = sum(gaps.gap(*c) for c in choices) / n
    return SelectorMetrics(100.0 * feas / n, 100.0 * best / n, 100.0 * good / n, mean_gap)


def evaluate_selector(
    selector: Selector,
    test: list[tuple[str, tuple[float, float]]],
    gaps: GapMatrix,
) -> SelectorEvaluation:
    """Score the selector's top pick per test instance against the single
    best algorithm (lowest mean test gap) and the per-instance oracle."""
    test_ids = [t[0] for t in test]
    picks = [(tid, recommend(selector, z)[0]) for tid, z in test]

    algs = selector.algorithms
    mean_test_gap = {
        a: sum(gaps.gap(tid, a) for tid in test_ids) / max(1, len(test_ids))
        for a in algs
    }
    single_best_name = min(algs, key=lambda a: (mean_test_gap[a], a))
    single_best = [(tid, single_best_name) for tid in test_ids]
    oracle = [
        (tid, min(algs, key=lambda a: (gaps.gap(tid, a), a))) for tid in test_ids
    ]
    return SelectorEvaluation(
        selector=_metrics_for(picks, gaps),
        single_best=_metrics_for(single_best, gaps),
        single_best_name=single_best_name,
        oracle=_metrics_for(oracle, gaps),
    )
