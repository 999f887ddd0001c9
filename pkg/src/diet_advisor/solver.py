"""Exact combinatorial meal solver.

Selects subsets of 1..max_dishes dishes whose nutrient totals stay within a
relative threshold of the user's targets on every component, ranked by the
sum of the four relative deviations.  The search is a depth-first
branch-and-bound over duplicate-collapsed dish groups with an admissible
lower bound; `brute_force_oracle` enumerates every subset with the same
rules and is used to verify optimality.

All arithmetic runs on integer tenths and exact rationals, so scores and
rankings are bit-reproducible across platforms.
"""

from __future__ import annotations

import itertools
import time
from bisect import insort
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Iterable, Sequence

from .domain import Dish, Nutrients, sum_nutrients
from .errors import TooLargeError

ORACLE_MAX_DISHES = 30

STATUS_OK = "ok"
STATUS_NO_FEASIBLE = "no_feasible_solution"


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    return Fraction(Decimal(str(value)))


@dataclass(frozen=True)
class SolverConfig:
    """Search parameters; defaults give 1-3 dish meals within a ±10% band."""

    max_dishes: int = 3
    threshold: Fraction = Fraction(1, 10)
    max_solutions: int = 5
    # quantization widths for grouping, in nutrient units (kcal, g, g, g)
    group_bins: tuple = (25, 5, 5, 5)
    debug_check_bounds: bool = False

    def __post_init__(self):
        object.__setattr__(self, "threshold", _as_fraction(self.threshold))
        if self.max_dishes < 1:
            raise ValueError("max_dishes must be >= 1")
        if not (0 < self.threshold < 1):
            raise ValueError("threshold must be in (0, 1)")
        if self.max_solutions < 1:
            raise ValueError("max_solutions must be >= 1")
        if len(self.group_bins) != 4 or any(b <= 0 for b in self.group_bins):
            raise ValueError("group_bins must be four positive widths")

    def bins_tenths(self) -> tuple[int, int, int, int]:
        return tuple(int(Decimal(str(b)) * 10) for b in self.group_bins)


@dataclass(frozen=True)
class MealSolution:
    """One ranked dish combination."""

    dish_ids: tuple[str, ...]
    dish_names: tuple[str, ...]
    totals: Nutrients
    deviations: tuple[Fraction, Fraction, Fraction, Fraction]
    score: Fraction

    @property
    def rank_key(self):
        return (self.score, self.dish_names, self.dish_ids)


@dataclass
class SolverReport:
    """Ranked solutions plus search-effort counters."""

    solutions: list[MealSolution] = field(default_factory=list)
    explored_nodes: int = 0
    pruned_nodes: int = 0
    elapsed: float = 0.0
    status: str = STATUS_OK

    @property
    def no_feasible_solution(self) -> bool:
        return self.status == STATUS_NO_FEASIBLE


def score(combination: Iterable[Dish], targets: Nutrients):
    """Per-nutrient relative deviations and their sum, exact.

    deviations[i] = |total_i - target_i| / target_i over
    (calories, carbs, proteins, fats).
    """
    target_tenths = targets.as_tenths()
    if any(t <= 0 for t in target_tenths):
        raise ValueError("targets must be strictly positive in every component")
    totals = sum_nutrients(d.nutrients for d in combination).as_tenths()
    deviations = tuple(Fraction(abs(tot - tgt), tgt)
                       for tot, tgt in zip(totals, target_tenths))
    return deviations, sum(deviations, Fraction(0))


def feasible(combination: Iterable[Dish], targets: Nutrients,
             config: SolverConfig | None = None) -> bool:
    """True iff every per-nutrient deviation is within the threshold (inclusive)."""
    config = config or SolverConfig()
    deviations, _ = score(combination, targets)
    return all(dev <= config.threshold for dev in deviations)


@dataclass(frozen=True)
class DishGroup:
    """Dishes whose quantized nutrient tuples coincide."""

    quantized: tuple[int, int, int, int]
    members: tuple[Dish, ...]


def prune_groups(dishes: Sequence[Dish], config: SolverConfig | None = None) -> list[DishGroup]:
    """Partition dishes into classes by floor-quantized nutrient tuple.

    Near-duplicate dishes land in the same class; the class list is sorted by
    quantized tuple and members by canonical name, so the partition is
    deterministic.
    """
    config = config or SolverConfig()
    bins = config.bins_tenths()
    classes: dict[tuple, list[Dish]] = {}
    for dish in dishes:
        key = tuple(t // b for t, b in zip(dish.nutrients.as_tenths(), bins))
        classes.setdefault(key, []).append(dish)
    return [DishGroup(quantized=key,
                      members=tuple(sorted(classes[key], key=lambda d: (d.key, d.id))))
            for key in sorted(classes)]


def _make_solution(dishes: Sequence[Dish], targets: Nutrients) -> MealSolution:
    ordered = sorted(dishes, key=lambda d: (d.key, d.id))
    deviations, total_score = score(ordered, targets)
    return MealSolution(
        dish_ids=tuple(d.id for d in ordered),
        dish_names=tuple(d.name for d in ordered),
        totals=sum_nutrients(d.nutrients for d in ordered),
        deviations=deviations,
        score=total_score,
    )


class _TopK:
    """Bounded best-k list ordered by (score, name tuple)."""

    def __init__(self, k: int):
        self.k = k
        self.items: list[tuple] = []  # (score, namekey, idkey, solution)

    @property
    def full(self) -> bool:
        return len(self.items) >= self.k

    @property
    def worst_score(self) -> Fraction | None:
        return self.items[-1][0] if self.full else None

    def offer(self, solution: MealSolution) -> None:
        key = (solution.score, solution.dish_names, solution.dish_ids)
        if self.full and key >= self.items[-1][:3]:
            return
        insort(self.items, key + (solution,))
        del self.items[self.k:]

    def solutions(self) -> list[MealSolution]:
        return [item[3] for item in self.items]


def brute_force_oracle(dishes: Sequence[Dish], targets: Nutrients,
                       config: SolverConfig | None = None) -> SolverReport:
    """Exhaustive reference enumeration of every subset of size 1..max_dishes.

    Applies the same feasibility, scoring and tie-break rules as solve();
    guarded to small instances because the subset count explodes.
    """
    config = config or SolverConfig()
    if len(dishes) > ORACLE_MAX_DISHES:
        raise TooLargeError(
            f"oracle refuses {len(dishes)} dishes (max {ORACLE_MAX_DISHES})")
    start = time.perf_counter()
    target_tenths = targets.as_tenths()
    if any(t <= 0 for t in target_tenths):
        raise ValueError("targets must be strictly positive in every component")
    num, den = config.threshold.numerator, config.threshold.denominator
    vectors = [d.nutrients.as_tenths() for d in dishes]
    top = _TopK(config.max_solutions)
    explored = 0
    for size in range(1, min(config.max_dishes, len(dishes)) + 1):
        for combo in itertools.combinations(range(len(dishes)), size):
            explored += 1
            totals = [0, 0, 0, 0]
            for idx in combo:
                vec = vectors[idx]
                for i in range(4):
                    totals[i] += vec[i]
            if all(abs(totals[i] - target_tenths[i]) * den <= target_tenths[i] * num
                   for i in range(4)):
                top.offer(_make_solution([dishes[i] for i in combo], targets))
    solutions = top.solutions()
    return SolverReport(
        solutions=solutions,
        explored_nodes=explored,
        pruned_nodes=0,
        elapsed=time.perf_counter() - start,
        status=STATUS_OK if solutions else STATUS_NO_FEASIBLE,
    )


def _exact_groups(dishes: Sequence[Dish], config: SolverConfig):
    """Refine the quantized classes down to identical nutrient vectors.

    Only dishes with byte-identical vectors are interchangeable without
    changing any score, so only those may share a search branch.
    """
    refined = []
    for group in prune_groups(dishes, config):
        by_vec: dict[tuple, list[Dish]] = {}
        for dish in group.members:
            by_vec.setdefault(dish.nutrients.as_tenths(), []).append(dish)
        for vec in sorted(by_vec):
            refined.append((vec, by_vec[vec]))
    # branch order: calories descending, then name for determinism
    refined.sort(key=lambda item: (-item[0][0], item[1][0].key, item[1][0].id))
    return refined


def solve(dishes: Sequence[Dish], targets: Nutrients,
          config: SolverConfig | None = None) -> SolverReport:
    """Best feasible dish combinations under the threshold, exactly ranked.

    Depth-first branch-and-bound over duplicate-collapsed groups sorted by
    calories descending.  Pruning rules, all exact:
      * over-limit: a nutrient already above target*(1+threshold) can never
        recover (totals only grow);
      * unreachable: remaining picks times the best remaining vector cannot
        lift some nutrient to target*(1-threshold);
      * bound: the deviation already locked in by over-target nutrients
        exceeds the worst retained score (admissible: under-target
        deviations are never negative).
    """
    config = config or SolverConfig()
    start = time.perf_counter()
    target_tenths = targets.as_tenths()
    if any(t <= 0 for t in target_tenths):
        raise ValueError("targets must be strictly positive in every component")
    num, den = config.threshold.numerator, config.threshold.denominator
    max_dishes = config.max_dishes
    k = config.max_solutions

    groups = _exact_groups(dishes, config)
    n_groups = len(groups)
    vecs = [g[0] for g in groups]
    sizes = [len(g[1]) for g in groups]

    # low band in tenths, threshold-inclusive, via cross-multiplication:
    # a combination is in band iff totals*den >= lo_num and the over-limit
    # check below holds on every nutrient
    lo_num = [t * (den - num) for t in target_tenths]

    # suffix maxima of each nutrient over groups[i:]
    suffix_max = [[0, 0, 0, 0] for _ in range(n_groups + 1)]
    for idx in range(n_groups - 1, -1, -1):
        for i in range(4):
            suffix_max[idx][i] = max(vecs[idx][i], suffix_max[idx + 1][i])

    top = _TopK(k)
    counters = {"explored": 0, "pruned": 0}

    def emit_leaf(chosen: list[tuple[int, int]], bound_on_path: Fraction):
        """Expand a feasible group-level combination into concrete dish sets."""
        pools = []
        for gi, cnt in chosen:
            members = groups[gi][1]
            # the k best name tuples only ever use the first cnt+k-1 members
            pools.append(itertools.combinations(members[:cnt + k - 1], cnt))
        for pick in itertools.product(*pools):
            solution = _make_solution([d for part in pick for d in part], targets)
            if config.debug_check_bounds:
                assert bound_on_path <= solution.score, (
                    f"inadmissible bound {bound_on_path} > score {solution.score}")
            top.offer(solution)

    def dfs(start_idx: int, totals: tuple[int, int, int, int], remaining: int,
            chosen: list[tuple[int, int]], path_bound: Fraction):
        for gi in range(start_idx, n_groups):
            vec = vecs[gi]
            # calorie reach: groups are calorie-descending, so if even taking
            # all remaining picks of this group cannot reach the low band,
            # no later group can either
            if (totals[0] + remaining * vec[0]) * den < lo_num[0]:
                counters["pruned"] += n_groups - gi
                break
            take_max = min(sizes[gi], remaining)
            new_totals = totals
            for cnt in range(1, take_max + 1):
                new_totals = tuple(new_totals[i] + vec[i] for i in range(4))
                counters["explored"] += 1
                if any((new_totals[i] - target_tenths[i]) * den > num * target_tenths[i]
                       for i in range(4)):
                    # over the band on some nutrient; larger counts only worsen it
                    counters["pruned"] += take_max - cnt + 1
                    break
                chosen.append((gi, cnt))
                if all(new_totals[i] * den >= lo_num[i] for i in range(4)):
                    emit_leaf(chosen, path_bound)
                left = remaining - cnt
                if left > 0 and gi + 1 < n_groups:
                    reachable = all(
                        (new_totals[i] + left * suffix_max[gi + 1][i]) * den >= lo_num[i]
                        for i in range(4))
                    if not reachable:
                        counters["pruned"] += 1
                    else:
                        bound = sum(
                            (Fraction(new_totals[i] - target_tenths[i], target_tenths[i])
                             for i in range(4) if new_totals[i] > target_tenths[i]),
                            Fraction(0))
                        worst = top.worst_score
                        if worst is not None and bound > worst:
                            counters["pruned"] += 1
                        else:
                            dfs(gi + 1, new_totals, left, chosen,
                                max(path_bound, bound))
                chosen.pop()

    if n_groups:
        dfs(0, (0, 0, 0, 0), max_dishes, [], Fraction(0))

    solutions = top.solutions()
    return SolverReport(
        solutions=solutions,
        explored_nodes=counters["explored"],
        pruned_nodes=counters["pruned"],
        elapsed=time.perf_counter() - start,
        status=STATUS_OK if solutions else STATUS_NO_FEASIBLE,
    )
