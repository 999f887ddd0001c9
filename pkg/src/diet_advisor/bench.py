"""Seeded instance generation, the solver scaling benchmark, and the
solver-versus-oracle verification sweep."""

from __future__ import annotations

import csv
import random
import statistics
import time
from dataclasses import dataclass
from typing import Iterable, Sequence

from .domain import Dish, Nutrients
from .solver import SolverConfig, brute_force_oracle, solve

# Clingo timings reported for the same scaling study shape (50..250 dishes);
# reproduced for side-by-side comparison only, never as a numeric target.
REFERENCE_TIMINGS_S = {50: 0.25, 100: 1.46, 150: 3.54, 200: 6.37, 250: 8.63}

CSV_COLUMNS = ("N", "K", "elapsed_seconds", "explored_nodes", "pruned_nodes", "best_score")


def random_dish(rng: random.Random, index: int) -> Dish:
    return Dish(
        id=f"d{index:04d}",
        name=f"dish {index:04d}",
        nutrients=Nutrients.of(
            round(rng.uniform(80, 600), 1),
            round(rng.uniform(5, 90), 1),
            round(rng.uniform(2, 50), 1),
            round(rng.uniform(1, 40), 1),
        ),
    )


def random_pool(rng: random.Random, size: int) -> list[Dish]:
    return [random_dish(rng, i) for i in range(size)]


def targets_from_pool(rng: random.Random, pool: Sequence[Dish],
                      picks: int = 2) -> Nutrients:
    """Targets near the sum of a few random dishes, so instances are
    usually (not always) feasible."""
    chosen = rng.sample(list(pool), min(picks, len(pool)))
    total = Nutrients.zero()
    for dish in chosen:
        total = total + dish.nutrients
    jitter = rng.uniform(0.95, 1.05)
    return Nutrients.of(*(round(float(v) * jitter, 1) or 0.1 for v in (
        total.calories, total.carbs, total.proteins, total.fats)))


@dataclass
class BenchRow:
    n: int
    k: int
    rep: int
    elapsed_seconds: float
    explored_nodes: int
    pruned_nodes: int
    best_score: float | None


def run_bench(sizes: Iterable[int], max_dishes: int = 3, reps: int = 5,
              seed: int = 42, max_solutions: int = 5) -> list[BenchRow]:
    """One solve per (pool size, repetition); pools are nested per repetition
    so workload grows with N by construction."""
    sizes = sorted(set(sizes))
    config = SolverConfig(max_dishes=max_dishes, max_solutions=max_solutions)
    rows: list[BenchRow] = []
    top = max(sizes)
    for rep in range(reps):
        rng = random.Random(f"{seed}:{rep}")
        pool = random_pool(rng, top)
        targets = targets_from_pool(rng, pool[:min(sizes)])
        for n in sizes:
            start = time.perf_counter()
            report = solve(pool[:n], targets, config)
            elapsed = time.perf_counter() - start
            best = float(report.solutions[0].score) if report.solutions else None
            rows.append(BenchRow(n, max_dishes, rep, elapsed,
                                 report.explored_nodes, report.pruned_nodes, best))
    return rows


def write_bench_csv(rows: Sequence[BenchRow], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([row.n, row.k, f"{row.elapsed_seconds:.6f}",
                             row.explored_nodes, row.pruned_nodes,
                             "" if row.best_score is None else f"{row.best_score:.6f}"])


def median_elapsed(rows: Sequence[BenchRow]) -> dict[int, float]:
    by_n: dict[int, list[float]] = {}
    for row in rows:
        by_n.setdefault(row.n, []).append(row.elapsed_seconds)
    return {n: statistics.median(values) for n, values in sorted(by_n.items())}


def comparison_table(rows: Sequence[BenchRow]) -> str:
    """Medians next to the published Clingo reference values (shape only)."""
    medians = median_elapsed(rows)
    lines = [f"{'N':>5} {'median_s':>10} {'reference_s':>12}"]
    for n, med in medians.items():
        ref = REFERENCE_TIMINGS_S.get(n)
        lines.append(f"{n:>5} {med:>10.3f} {ref if ref is not None else '-':>12}")
    return "\n".join(lines)


@dataclass
class VerifyOutcome:
    instances: int
    mismatches: int
    elapsed_seconds: float

    @property
    def ok(self) -> bool:
        return self.mismatches == 0


def _report_key(report):
    return [(s.score, s.dish_names, s.dish_ids) for s in report.solutions]


def run_verify(instances: int = 200, seed: int = 0, max_n: int = 25,
               max_dishes: int = 3) -> VerifyOutcome:
    """Solver-vs-oracle equivalence over seeded random instances."""
    start = time.perf_counter()
    mismatches = 0
    for case in range(instances):
        rng = random.Random(f"{seed}:{case}")
        n = rng.randint(1, max_n)
        pool = random_pool(rng, n)
        if n > 2 and rng.random() < 0.3:  # inject exact duplicates sometimes
            twin = rng.choice(pool)
            pool.append(Dish(id=f"dup{case}", name=f"twin {case}",
                             nutrients=twin.nutrients))
        targets = targets_from_pool(rng, pool)
        config = SolverConfig(max_dishes=max_dishes)
        got = solve(pool, targets, config)
        want = brute_force_oracle(pool, targets, config)
        if _report_key(got) != _report_key(want) or got.status != want.status:
            mismatches += 1
    return VerifyOutcome(instances, mismatches, time.perf_counter() - start)
