"""Seeded random scenarios and plans shared by the property and acceptance tests."""

from __future__ import annotations

import random

from botsched.model import Application, ExecutionPlan, InstanceType, Scenario, Task, VmSlot


def random_catalog(rng: random.Random, n_types: int, n_apps: int, max_cost: int = 8, max_perf: int = 12):
    seen = set()
    out = []
    while len(out) < n_types:
        cost = rng.randint(1, max_cost)
        perf = tuple(rng.randint(1, max_perf) for _ in range(n_apps))
        if (cost, perf) in seen:
            continue
        seen.add((cost, perf))
        out.append(InstanceType(len(out), f"t{len(out)}", cost, perf))
    return out


def random_scenario(
    rng: random.Random,
    max_apps: int = 3,
    max_types: int = 4,
    max_tasks: int = 20,
    min_tasks: int = 0,
) -> Scenario:
    """Small quanta make multi-quantum slots common; budgets run from hopeless to generous."""
    n_apps = rng.randint(1, max_apps)
    n_types = rng.randint(1, max_types)
    apps = [Application(i, f"A{i}") for i in range(n_apps)]
    types = random_catalog(rng, n_types, n_apps)
    tasks = [Task(i, rng.randrange(n_apps), rng.randint(1, 5)) for i in range(rng.randint(min_tasks, max_tasks))]
    quantum = rng.choice([20, 40, 60, 120, 3600])
    overhead = rng.choice([0, 0, 0, 3, 10])
    work = sum(min(it.perf[t.app_id] for it in types) * t.size for t in tasks)
    ample = (work // quantum + 2) * max(it.cost_per_hour for it in types) * 2
    budget = rng.randint(0, max(1, ample))
    return Scenario(tuple(apps), tuple(tasks), tuple(types), budget, overhead, quantum)


def random_plan(rng: random.Random, s: Scenario, allow_empty: bool = False) -> ExecutionPlan:
    """Random full, disjoint assignment of ``s.tasks`` onto 1..6 random slots."""
    n = rng.randint(1, 6)
    slot_types = [rng.choice(s.instance_types).id for _ in range(n)]
    buckets: list[list[int]] = [[] for _ in range(n)]
    for t in s.tasks:
        buckets[rng.randrange(n)].append(t.id)
    slots = [VmSlot(i, ty, tuple(b)) for i, (ty, b) in enumerate(zip(slot_types, buckets)) if b or allow_empty]
    return ExecutionPlan(tuple(slots))
