import itertools
import random

import pytest

from botsched.heuristic import find_plan
from botsched.model import (
    Application,
    ExecutionPlan,
    InstanceType,
    Scenario,
    Task,
    VmSlot,
    plan_cost,
    plan_makespan,
    validate_plan,
)
from botsched.oracle import OracleLimitError, OracleLimits, brute_force_optimal

from conftest import worked_example
from randgen import random_scenario


def naive_optimum(s):
    """Every typed slot list and every surjective task->slot map; returns (makespan, cost) or None."""
    n = len(s.tasks)
    best = (0, 0) if n == 0 else None
    for k in range(1, n + 1):
        for types in itertools.product([it.id for it in s.instance_types], repeat=k):
            for where in itertools.product(range(k), repeat=n):
                if len(set(where)) < k:
                    continue
                slots = tuple(
                    VmSlot(j, types[j], tuple(s.tasks[i].id for i in range(n) if where[i] == j)) for j in range(k)
                )
                p = ExecutionPlan(slots)
                c = plan_cost(p, s)
                if c > s.budget:
                    continue
                key = (plan_makespan(p, s), c)
                if best is None or key < best:
                    best = key
    return best


def test_single_task():
    s = Scenario((Application(0, "A"),), (Task(0, 0, 3),), (InstanceType(0, "x", 4, (2,)),), budget=4)
    r = brute_force_optimal(s)
    assert r.plan == ExecutionPlan((VmSlot(0, 0, (0,)),))


def test_worked_example():
    s = worked_example()
    r = brute_force_optimal(s)
    assert plan_makespan(r.plan, s) == 50
    assert plan_cost(r.plan, s) == 2
    assert r.plan.type_counts() == {1: 2}


def test_zero_budget():
    assert not brute_force_optimal(worked_example(budget=0)).feasible


def test_empty_workload():
    s = worked_example(n_tasks=0)
    assert brute_force_optimal(s).plan == ExecutionPlan()


def test_refuses_oversized():
    with pytest.raises(OracleLimitError):
        brute_force_optimal(worked_example(n_tasks=11))
    with pytest.raises(OracleLimitError):
        brute_force_optimal(worked_example(), OracleLimits(max_types=1))


def test_limits_validated():
    with pytest.raises(ValueError):
        OracleLimits(max_tasks=0)


@pytest.mark.parametrize("seed", range(60))
def test_matches_naive_enumeration(seed):
    s = random_scenario(random.Random(seed), max_types=3, max_tasks=4)
    r = brute_force_optimal(s)
    expect = naive_optimum(s)
    if expect is None:
        assert not r.feasible
    else:
        assert validate_plan(r.plan, s).ok
        assert (plan_makespan(r.plan, s), plan_cost(r.plan, s)) == expect


@pytest.mark.parametrize("seed", range(30))
def test_dominates_heuristic(seed):
    s = random_scenario(random.Random(1000 + seed), max_types=3, max_tasks=8)
    o, h = brute_force_optimal(s), find_plan(s)
    if h.feasible:
        assert o.feasible
        assert plan_makespan(o.plan, s) <= plan_makespan(h.plan, s)


def test_deterministic():
    s = random_scenario(random.Random(5), max_types=3, max_tasks=8, min_tasks=8)
    assert brute_force_optimal(s) == brute_force_optimal(s)
