"""Comparison strategies: fastest-type provisioning (MI) and cheapest-type parallelism (MP).

Both share the heuristic's placement and balancing so that measured
differences come from the provisioning policy alone.
"""

from __future__ import annotations

from .heuristic import SchedulerResult, WorkingPlan, _add, _assign, _balance, _finalize
from .model import ModelError, Scenario, plan_cost, validate_scenario


def _check(s: Scenario) -> None:
    verdict = validate_scenario(s)
    if not verdict.ok:
        raise ModelError("invalid scenario: " + "; ".join(map(str, verdict.violations)))


def _fit(s: Scenario, type_ids: list[int]) -> SchedulerResult:
    """Place all tasks on slots of ``type_ids``, dropping the last slot until the plan fits the budget."""
    n = len(type_ids)
    attempts = 0
    while n > 0:
        attempts += 1
        w = WorkingPlan(s)
        for ty in type_ids[:n]:
            w.add_slot(ty)
        _assign(w, [t.id for t in s.tasks])
        _balance(w)
        plan = _finalize(w)
        cost = plan_cost(plan, s)
        if cost <= s.budget:
            return SchedulerResult(plan, iterations=attempts)
        n -= 1
    return SchedulerResult.infeasible(f"no slot count fits budget {s.budget}", attempts)


def mi_plan(s: Scenario) -> SchedulerResult:
    """Spend the whole budget greedily on the type that runs the workload fastest."""
    _check(s)
    w = WorkingPlan(s)
    added = _add(w, s.budget)
    if not added:
        return SchedulerResult.infeasible(f"no instance type costs at most {s.budget} per hour")
    return _fit(s, [w.slots[i].type_id for i in added])


def mp_plan(s: Scenario) -> SchedulerResult:
    """Hire as many VMs of the cheapest type as the budget buys."""
    _check(s)
    cheapest = min(s.instance_types, key=lambda it: (it.cost_per_hour, it.id), default=None)
    if cheapest is None or cheapest.cost_per_hour > s.budget:
        return SchedulerResult.infeasible(f"no instance type costs at most {s.budget} per hour")
    return _fit(s, [cheapest.id] * (s.budget // cheapest.cost_per_hour))
