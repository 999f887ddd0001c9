"""Meal solver: exact scoring, pruning correctness, oracle agreement.

The branch-and-bound must be indistinguishable from the exhaustive oracle
on the full ranked list, not just the best solution.
"""

import random
from fractions import Fraction

import pytest

from diet_advisor.bench import random_pool, targets_from_pool, run_verify
from diet_advisor.domain import Dish, Nutrients
from diet_advisor.errors import TooLargeError
from diet_advisor.solver import (
    STATUS_NO_FEASIBLE,
    STATUS_OK,
    SolverConfig,
    brute_force_oracle,
    feasible,
    prune_groups,
    score,
    solve,
)


def dish(name, cal, carbs, prot, fats, did=None):
    return Dish(id=did or name.replace(" ", "-"), name=name,
                nutrients=Nutrients.of(cal, carbs, prot, fats))


TARGETS = Nutrients.of(1000, 120, 60, 30)


# -- scoring and feasibility --------------------------------------------

def test_score_zero_on_exact_match():
    combo = [dish("a", 600, 70, 40, 18), dish("b", 400, 50, 20, 12)]
    deviations, total = score(combo, TARGETS)
    assert deviations == (Fraction(0),) * 4
    assert total == 0


def test_score_exact_fractions():
    deviations, total = score([dish("a", 900, 132, 60, 27)], TARGETS)
    assert deviations == (Fraction(1, 10), Fraction(1, 10),
                          Fraction(0), Fraction(1, 10))
    assert total == Fraction(3, 10)


def test_score_requires_positive_targets():
    with pytest.raises(ValueError):
        score([dish("a", 1, 1, 1, 1)], Nutrients.of(100, 0, 10, 10))


def test_threshold_boundary_is_inclusive():
    # exactly +10 percent on every nutrient
    assert feasible([dish("hi", 1100, 132, 66, 33)], TARGETS)
    # exactly -10 percent
    assert feasible([dish("lo", 900, 108, 54, 27)], TARGETS)
    # one tenth of a unit past the band on calories
    assert not feasible([dish("over", "1100.1", 132, 66, 33)], TARGETS)
    assert not feasible([dish("under", "899.9", 108, 54, 27)], TARGETS)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(max_dishes=0)
    with pytest.raises(ValueError):
        SolverConfig(threshold=0)
    with pytest.raises(ValueError):
        SolverConfig(threshold=1)
    with pytest.raises(ValueError):
        SolverConfig(max_solutions=0)
    with pytest.raises(ValueError):
        SolverConfig(group_bins=(25, 5, 5))
    assert SolverConfig(threshold=0.05).threshold == Fraction(1, 20)


# -- duplicate grouping -------------------------------------------------

def test_prune_groups_merges_near_duplicates():
    a = dish("plate a", 450, 55, 12, 20)
    b = dish("plate b", 460, 57, 13, 21)
    c = dish("plate c", 700, 80, 30, 25)
    groups = prune_groups([c, b, a])
    assert len(groups) == 2
    merged = next(g for g in groups if len(g.members) == 2)
    assert [d.name for d in merged.members] == ["plate a", "plate b"]


def test_prune_groups_respects_bin_edges():
    # 449.9 and 450.0 fall on opposite sides of the 25 kcal bin edge
    a = dish("edge lo", "449.9", 55, 12, 20)
    b = dish("edge hi", "450.0", 55, 12, 20)
    assert len(prune_groups([a, b])) == 2


def test_prune_groups_deterministic_order():
    pool = random_pool(random.Random(5), 30)
    one = prune_groups(pool)
    two = prune_groups(list(reversed(pool)))
    assert one == two


# -- solve() basics -----------------------------------------------------

def test_solve_simple_instance():
    pool = [dish("a", 600, 70, 40, 18), dish("b", 400, 50, 20, 12),
            dish("junk", 50, 1, 1, 1)]
    report = solve(pool, TARGETS)
    assert report.status == STATUS_OK
    assert report.solutions[0].dish_names == ("a", "b")
    assert report.solutions[0].score == 0
    assert report.solutions[0].totals == Nutrients.of(1000, 120, 60, 30)


def test_solve_reports_no_feasible_solution():
    report = solve([dish("tiny", 10, 1, 1, 1)], TARGETS)
    assert report.status == STATUS_NO_FEASIBLE
    assert report.no_feasible_solution and report.solutions == []


def test_solve_empty_pool():
    report = solve([], TARGETS)
    assert report.status == STATUS_NO_FEASIBLE


def test_solve_respects_max_dishes():
    pool = [dish(f"q{i}", "333.3", 40, 20, 10, did=f"q{i}") for i in range(4)]
    report = solve(pool, TARGETS, SolverConfig(max_dishes=3))
    # a fourth copy would overshoot; the best plan uses exactly three
    assert all(len(s.dish_ids) <= 3 for s in report.solutions)
    assert report.solutions[0].score == Fraction(1, 10000)


def test_solutions_sorted_and_capped():
    rng = random.Random(11)
    pool = random_pool(rng, 20)
    targets = targets_from_pool(rng, pool)
    config = SolverConfig(max_solutions=3)
    report = solve(pool, targets, config)
    assert len(report.solutions) <= 3
    keys = [s.rank_key for s in report.solutions]
    assert keys == sorted(keys)
    for s in report.solutions:
        assert list(s.dish_names) == sorted(s.dish_names)


def test_tie_break_on_names_with_identical_vectors():
    twins = [dish("beta", 1000, 120, 60, 30, did="z9"),
             dish("alpha", 1000, 120, 60, 30, did="a1")]
    report = solve(twins, TARGETS)
    assert [s.dish_names for s in report.solutions[:2]] == [("alpha",), ("beta",)]


def test_oracle_refuses_large_pools():
    pool = [dish(f"n{i}", 100, 10, 5, 3, did=f"n{i}") for i in range(31)]
    with pytest.raises(TooLargeError):
        brute_force_oracle(pool, TARGETS)


# -- oracle agreement and properties ------------------------------------

def ranked_key(report):
    return [(s.score, s.dish_names, s.dish_ids, s.totals, s.deviations)
            for s in report.solutions]


@pytest.mark.parametrize("seed", range(40))
def test_full_ranked_list_matches_oracle(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 22)
    pool = random_pool(rng, n)
    if n > 2 and rng.random() < 0.4:  # exact duplicates stress the grouping
        twin = rng.choice(pool)
        pool.append(Dish(id=f"twin{seed}", name=f"twin {seed}",
                         nutrients=twin.nutrients))
    targets = targets_from_pool(rng, pool)
    config = SolverConfig(max_dishes=rng.choice([2, 3]),
                          max_solutions=rng.choice([1, 5, 8]))
    got = solve(pool, targets, config)
    want = brute_force_oracle(pool, targets, config)
    assert got.status == want.status
    assert ranked_key(got) == ranked_key(want)


def test_verify_sweep_clean():
    outcome = run_verify(instances=40, seed=123, max_n=20)
    assert outcome.ok


def test_threshold_soundness_recheck():
    """Every returned solution re-passes an integer-arithmetic band check."""
    for case in range(80):
        rng = random.Random(f"29:{case}")
        pool = random_pool(rng, rng.randint(1, 40))
        targets = targets_from_pool(rng, pool)
        config = SolverConfig()
        report = solve(pool, targets, config)
        by_id = {d.id: d for d in pool}
        num, den = config.threshold.numerator, config.threshold.denominator
        tgt = targets.as_tenths()
        for solution in report.solutions:
            totals = [0, 0, 0, 0]
            for did in solution.dish_ids:
                for i, t in enumerate(by_id[did].nutrients.as_tenths()):
                    totals[i] += t
            assert tuple(totals) == solution.totals.as_tenths()
            for i in range(4):
                assert abs(totals[i] - tgt[i]) * den <= tgt[i] * num


def test_solver_deterministic_and_order_independent():
    rng = random.Random(77)
    pool = random_pool(rng, 60)
    targets = targets_from_pool(rng, pool)
    base = solve(pool, targets)
    again = solve(pool, targets)
    shuffled = list(pool)
    random.Random(1).shuffle(shuffled)
    permuted = solve(shuffled, targets)
    assert ranked_key(base) == ranked_key(again) == ranked_key(permuted)
    assert base.explored_nodes == again.explored_nodes


def test_bound_admissible_under_debug_checks():
    """debug_check_bounds asserts the path bound never exceeds a leaf score."""
    config = SolverConfig(debug_check_bounds=True)
    for case in range(30):
        rng = random.Random(f"31:{case}")
        pool = random_pool(rng, rng.randint(5, 50))
        targets = targets_from_pool(rng, pool)
        solve(pool, targets, config)


def test_explored_nodes_monotone_on_nested_pools():
    """Adding dishes to the pool never shrinks the explored-node count."""
    rng = random.Random(13)
    pool = random_pool(rng, 120)
    targets = targets_from_pool(rng, pool[:40])
    last = -1
    for n in (40, 60, 80, 100, 120):
        report = solve(pool[:n], targets)
        assert report.explored_nodes >= last
        last = report.explored_nodes


def test_timing_counters_populated():
    rng = random.Random(3)
    pool = random_pool(rng, 30)
    report = solve(pool, targets_from_pool(rng, pool))
    assert report.elapsed > 0
    assert report.explored_nodes > 0
