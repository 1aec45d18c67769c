import random
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from botsched.heuristic import (
    add_vms,
    assign,
    balance,
    best_type,
    find_plan,
    initial_plan,
    keep_under_hour,
    provisioned_cost,
    reduce,
    replace,
)
from botsched.model import (
    Application,
    ExecutionPlan,
    InfeasibleError,
    InstanceType,
    ModelError,
    Scenario,
    Task,
    VmSlot,
    plan_cost,
    plan_makespan,
    validate_plan,
    vm_exec_time,
)
from botsched.oracle import OracleLimits, brute_force_optimal

from conftest import table1_catalog, table1_scenario, worked_example
from randgen import random_plan, random_scenario

CATALOG = table1_catalog()
IT1, IT2, IT3, IT4 = (it.id for it in CATALOG)


def scenario(types, sizes_by_app, budget=100, overhead=0, quantum=3600):
    """``types`` is [(cost, perf tuple)], ``sizes_by_app`` a list of size lists."""
    apps = tuple(Application(i, f"A{i}") for i in range(len(sizes_by_app)))
    cat = tuple(InstanceType(i, f"t{i}", c, tuple(p)) for i, (c, p) in enumerate(types))
    tasks = []
    for a, sizes in enumerate(sizes_by_app):
        for z in sizes:
            tasks.append(Task(len(tasks), a, z))
    return Scenario(apps, tuple(tasks), cat, budget, overhead, quantum)


def execs(p, s):
    return sorted(vm_exec_time(v, s) for v in p.slots)


def task_multiset(p):
    return Counter(p.task_ids())


class TestBestType:
    def test_memory_app_prefers_it4(self):
        assert best_type(Application(1, "A2"), CATALOG, 10).name == "it4"

    def test_tie_goes_to_lower_id(self):
        # it3 and it4 both run A1 at 10 s/unit for 10
        assert best_type(Application(0, "A1"), CATALOG, 40).name == "it3"

    def test_affordability_filter(self):
        assert best_type(Application(2, "A3"), CATALOG, 7).name == "it1"

    def test_nothing_affordable(self):
        with pytest.raises(InfeasibleError):
            best_type(0, CATALOG, 4)


class TestInitialPlan:
    def test_floor_division(self):
        s = scenario([(10, (1,))], [[1]], budget=25)
        p = initial_plan(s)
        assert len(p.slots) == 2 and not p.task_ids()

    def test_worked_example(self):
        p = initial_plan(worked_example())
        assert [v.type_id for v in p.slots] == [0]

    def test_table1_budget_40(self):
        p = initial_plan(table1_scenario(budget=40))
        # A1 -> it3 (tie with it4 by id), A2 -> it4, A3 -> it3; four of each
        assert Counter(v.type_id for v in p.slots) == {IT3: 8, IT4: 4}

    def test_unaffordable(self):
        with pytest.raises(InfeasibleError):
            initial_plan(table1_scenario(budget=3))


class TestAssign:
    def test_single_slot_takes_everything(self):
        s = table1_scenario(per_app=5)
        p = assign(s.tasks, ExecutionPlan((VmSlot(0, IT2),)), s)
        assert sorted(p.slots[0].task_ids) == [t.id for t in s.tasks]

    def test_fastest_type_wins(self):
        s = Scenario(
            tuple(Application(i, f"A{i + 1}") for i in range(3)),
            (Task(0, 1, 1), Task(1, 2, 1)),
            CATALOG,
            budget=40,
        )
        p = assign(s.tasks, ExecutionPlan((VmSlot(0, IT3), VmSlot(1, IT4))), s)
        assert p.slots[0].task_ids == (1,)  # A3 on it3: 9 s vs 12 s
        assert p.slots[1].task_ids == (0,)  # A2 on it4: 9 s vs 15 s

    def test_identical_slots_alternate(self):
        s = scenario([(1, (3,))], [[1, 1, 1, 1]])
        p = assign(s.tasks, ExecutionPlan((VmSlot(0, 0), VmSlot(1, 0))), s)
        assert p.slots[0].task_ids == (0, 2)
        assert p.slots[1].task_ids == (1, 3)

    def test_cost_filter_beats_speed(self):
        # the fast slot sits at 95 s of a 100 s quantum; a 10-unit task would spill it
        s = scenario([(1, (1,)), (1, (2,))], [[95, 10]], quantum=100)
        base = ExecutionPlan((VmSlot(0, 0, (0,)), VmSlot(1, 1)))
        p = assign([s.tasks[1]], base, s)
        assert p.slots[1].task_ids == (1,)

    def test_all_raise_cost_falls_back_to_speed(self):
        s = scenario([(1, (1,)), (1, (2,))], [[95, 99, 10]], quantum=100)
        base = ExecutionPlan((VmSlot(0, 0, (0,)), VmSlot(1, 1, (1,))))
        p = assign([s.tasks[2]], base, s)
        assert p.slots[0].task_ids == (0, 2)

    def test_no_slots(self):
        s = worked_example()
        with pytest.raises(ModelError):
            assign(s.tasks, ExecutionPlan(), s)


class TestBalance:
    def test_symmetric_split(self):
        s = scenario([(1, (50,))], [[1, 1]])
        p = balance(ExecutionPlan((VmSlot(0, 0, (0, 1)), VmSlot(1, 0))), s)
        assert execs(p, s) == [50, 50]

    def test_fixpoint(self):
        s = scenario([(1, (50,))], [[1, 1]])
        p = ExecutionPlan((VmSlot(0, 0, (0,)), VmSlot(1, 0, (1,))))
        assert balance(p, s) == p

    def test_moves_to_slower_type_when_it_helps(self):
        s = Scenario((Application(0, "A1"),), (Task(0, 0, 5),), CATALOG)
        p = balance(ExecutionPlan((VmSlot(0, IT1, (0,)), VmSlot(1, IT2))), s)
        assert p.slots[0].task_ids == () and p.slots[1].task_ids == (0,)
        assert plan_makespan(p, s) == 55

    def test_exchange_when_no_single_move_fits(self):
        # {30, 30} vs {25, 25}: moving a 30 overshoots, swapping 30 for 25 gives {55, 55}
        s = scenario([(1, (1,))], [[30, 30, 25, 25]])
        p = balance(ExecutionPlan((VmSlot(0, 0, (0, 1)), VmSlot(1, 0, (2, 3)))), s)
        assert execs(p, s) == [55, 55]


class TestReduce:
    def test_merge_under_one_hour(self):
        s = scenario([(10, (1,))], [[1000, 1000]])
        p = reduce(ExecutionPlan((VmSlot(0, 0, (0,)), VmSlot(1, 0, (1,)))), s)
        assert len(p.slots) == 1 and execs(p, s) == [2000]
        assert plan_cost(p, s) == 10

    def test_single_slot_unchanged(self):
        s = scenario([(10, (1,))], [[1000]])
        p = ExecutionPlan((VmSlot(0, 0, (0,)),))
        assert reduce(p, s) == p

    def test_equal_cost_merge_accepted(self):
        s = scenario([(10, (1,))], [[3000, 3000]])
        p = reduce(ExecutionPlan((VmSlot(0, 0, (0,)), VmSlot(1, 0, (1,)))), s)
        assert len(p.slots) == 1 and plan_cost(p, s) == 20

    def test_cost_increase_rolled_back(self):
        # either merge puts a 3x slower task on the receiver: 10 + 10 -> 30
        s = scenario([(10, (1, 3)), (10, (3, 1))], [[2000], [2100]])
        p = ExecutionPlan((VmSlot(0, 0, (0,)), VmSlot(1, 1, (1,))))
        assert reduce(p, s) == p

    def test_rollback_then_reverse_merge(self):
        # cheap slot into the expensive one would cost 20 > 11; the reverse costs 2
        s = scenario([(1, (1,)), (10, (1,))], [[2000, 2000]])
        p = reduce(ExecutionPlan((VmSlot(0, 0, (0,)), VmSlot(1, 1, (1,)))), s)
        assert p == ExecutionPlan((VmSlot(0, 0, (0, 1)),))
        assert plan_cost(p, s) == 2

    def test_local_mode_keeps_types_apart(self):
        s = scenario([(1, (1,)), (2, (1,))], [[10, 10]])
        p = ExecutionPlan((VmSlot(0, 0, (0,)), VmSlot(1, 1, (1,))))
        assert reduce(p, s, local_mode=True) == p
        assert len(reduce(p, s, local_mode=False).slots) == 1

    def test_excluded_slot_survives(self):
        s = scenario([(10, (1,))], [[1000, 1000]])
        p = ExecutionPlan((VmSlot(0, 0, (0,)), VmSlot(1, 0, (1,))))
        out = reduce(p, s, excluded={0, 1})
        assert out == p


class TestAddVms:
    def test_table1_greedy(self, table1_small):
        # whole-workload seconds on one VM: 75 size units per app
        units = {a: sum(t.size for t in table1_small.tasks if t.app_id == a) for a in range(3)}
        totals = {it.id: sum(it.perf[a] * u for a, u in units.items()) for it in CATALOG}
        assert totals == {IT1: 66 * 75, IT2: 36 * 75, IT3: 34 * 75, IT4: 31 * 75}
        p = add_vms(ExecutionPlan(), table1_small, 25)
        assert [v.type_id for v in p.slots] == [IT4, IT4, IT1]

    @pytest.mark.parametrize("remaining", [4, 0, -10])
    def test_nothing_affordable(self, table1_small, remaining):
        base = ExecutionPlan((VmSlot(0, IT2, (0,)),))
        assert add_vms(base, table1_small, remaining) == base


class TestKeepUnderHour:
    def test_two_hour_slot_split(self):
        s = scenario([(5, (1,))], [[1800] * 4])
        p = keep_under_hour(ExecutionPlan((VmSlot(0, 0, (0, 1, 2, 3)),)), s, 10)
        assert execs(p, s) == [3600, 3600]
        assert plan_cost(p, s) == 10

    def test_one_hour_slot_untouched(self):
        s = scenario([(5, (1,))], [[1800] * 2])
        p = ExecutionPlan((VmSlot(0, 0, (0, 1)),))
        assert keep_under_hour(p, s, 100) == p

    def test_budget_guard(self):
        # 7300 s is 3 hours (15); two 3650 s halves are 2 hours each (20)
        s = scenario([(5, (1,))], [[3650, 3650]])
        p = ExecutionPlan((VmSlot(0, 0, (0, 1)),))
        assert keep_under_hour(p, s, 15) == p
        assert execs(keep_under_hour(p, s, 20), s) == [3650, 3650]


class TestReplace:
    def test_worked_example(self, example4g):
        p = replace(ExecutionPlan((VmSlot(0, 0, tuple(range(10))),)), example4g, 2, 1)
        assert [v.type_id for v in p.slots] == [1, 1]
        assert execs(p, example4g) == [50, 50]
        assert plan_cost(p, example4g) == 2

    def test_no_cheaper_type(self, example4g):
        p = ExecutionPlan((VmSlot(0, 1, tuple(range(10))),))
        assert replace(p, example4g, 2) == p

    def test_slower_replacement_rejected(self):
        s = scenario([(2, (8,)), (1, (800,))], [[1] * 10], budget=2)
        p = ExecutionPlan((VmSlot(0, 0, tuple(range(10))),))
        assert replace(p, s, 2) == p

    def test_batch_must_be_positive(self, example4g):
        with pytest.raises(ValueError):
            replace(ExecutionPlan(), example4g, 2, 0)


class TestFindPlan:
    def test_worked_example(self, example4g):
        r = find_plan(example4g)
        assert r.feasible
        assert [v.type_id for v in r.plan.slots] == [1, 1]
        assert plan_makespan(r.plan, example4g) == 50
        assert plan_cost(r.plan, example4g) == 2

    def test_empty_workload(self):
        s = scenario([(5, (1,))], [[]], budget=10)
        r = find_plan(s)
        assert r.feasible and r.plan.slots == ()

    def test_unaffordable(self):
        r = find_plan(table1_scenario(budget=4))
        assert not r.feasible and "no instance type" in r.reason

    def test_over_budget_reported(self):
        # 750 tasks need at least 60 in hourly charges on the best types
        r = find_plan(table1_scenario(per_app=250, budget=40))
        assert not r.feasible and "above budget" in r.reason

    def test_trace(self, example4g):
        r = find_plan(example4g, keep_trace=True)
        phases = [t[0] for t in r.trace]
        assert phases[:3] == ["initial", "reduce-local", "reduce-global"]
        assert r.trace[-1][0] == "replace"

    def test_deterministic(self, table1_small):
        assert find_plan(table1_small) == find_plan(table1_small)

    def test_invalid_scenario_rejected(self):
        s = scenario([(5, (1,)), (5, (1,))], [[1]])
        with pytest.raises(ModelError):
            find_plan(s)

    @pytest.mark.parametrize("seed", range(40))
    def test_never_beats_oracle(self, seed):
        rng = random.Random(seed)
        s = random_scenario(rng, max_types=3, max_tasks=6)
        r = find_plan(s)
        o = brute_force_optimal(s, OracleLimits(max_tasks=6))
        if r.feasible:
            assert validate_plan(r.plan, s).ok
            assert o.feasible
            assert plan_makespan(r.plan, s) >= plan_makespan(o.plan, s)


seeds = st.integers(min_value=0, max_value=2**32 - 1)
phase_settings = settings(max_examples=120, deadline=None)


@phase_settings
@given(seeds)
def test_balance_monotone(seed):
    rng = random.Random(seed)
    s = random_scenario(rng, min_tasks=1)
    p = random_plan(rng, s)
    out = balance(p, s)
    assert plan_makespan(out, s) <= plan_makespan(p, s)
    assert plan_cost(out, s) <= plan_cost(p, s)
    assert task_multiset(out) == task_multiset(p)


@phase_settings
@given(seeds)
def test_balance_monotone_with_idle_slots(seed):
    rng = random.Random(seed)
    s = random_scenario(rng, min_tasks=1)
    p = random_plan(rng, s, allow_empty=True)
    out = balance(p, s)
    assert plan_makespan(out, s) <= plan_makespan(p, s)
    assert provisioned_cost(out, s) <= provisioned_cost(p, s)


@phase_settings
@given(seeds, st.booleans())
def test_reduce_monotone(seed, local):
    rng = random.Random(seed)
    s = random_scenario(rng, min_tasks=1)
    p = random_plan(rng, s)
    out = reduce(p, s, local_mode=local)
    assert plan_cost(out, s) <= plan_cost(p, s)
    assert task_multiset(out) == task_multiset(p)
    assert {v.id for v in out.slots} <= {v.id for v in p.slots}


@phase_settings
@given(seeds)
def test_keep_monotone(seed):
    rng = random.Random(seed)
    s = random_scenario(rng, min_tasks=1)
    p = random_plan(rng, s)
    budget = rng.randint(0, 3 * plan_cost(p, s) + 1)
    out = keep_under_hour(p, s, budget)
    assert plan_makespan(out, s) <= plan_makespan(p, s)
    assert out == p or provisioned_cost(out, s) <= budget
    assert task_multiset(out) == task_multiset(p)


@phase_settings
@given(seeds)
def test_replace_monotone(seed):
    rng = random.Random(seed)
    s = random_scenario(rng, min_tasks=1)
    p = random_plan(rng, s)
    budget = rng.randint(0, 3 * plan_cost(p, s) + 1)
    out = replace(p, s, budget, rng.randint(1, 3))
    assert plan_makespan(out, s) <= plan_makespan(p, s)
    assert out == p or provisioned_cost(out, s) <= budget
    assert task_multiset(out) == task_multiset(p)


@settings(max_examples=80, deadline=None)
@given(seeds)
def test_find_plan_results_validate(seed):
    s = random_scenario(random.Random(seed))
    r = find_plan(s)
    if r.feasible:
        assert validate_plan(r.plan, s).ok
    assert r == find_plan(s)
