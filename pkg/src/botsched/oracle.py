"""Exhaustive optimum for tiny scenarios, used as ground truth in tests.

The search is a depth-first enumeration: tasks are taken longest first and
each goes either to an already opened slot or to a newly opened slot of any
type. Opening slots in task order means each partition of tasks into typed
slots is visited exactly once. Branches are cut when their partial
(makespan, cost) can no longer beat the incumbent or the budget.
"""

from __future__ import annotations

from dataclasses import dataclass

from .heuristic import SchedulerResult
from .model import ExecutionPlan, ModelError, Scenario, VmSlot, validate_scenario


class OracleLimitError(ValueError):
    """The scenario is too large for exhaustive search."""


@dataclass(frozen=True)
class OracleLimits:
    max_tasks: int = 10
    max_types: int = 3
    max_vms_per_type: int = 10
    max_total_vms: int = 10

    def __post_init__(self) -> None:
        for name in ("max_tasks", "max_types", "max_vms_per_type", "max_total_vms"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")

    def check(self, s: Scenario) -> None:
        if len(s.tasks) > self.max_tasks:
            raise OracleLimitError(f"{len(s.tasks)} tasks exceed the oracle limit of {self.max_tasks}")
        if len(s.instance_types) > self.max_types:
            raise OracleLimitError(
                f"{len(s.instance_types)} instance types exceed the oracle limit of {self.max_types}"
            )


def brute_force_optimal(s: Scenario, lim: OracleLimits = OracleLimits()) -> SchedulerResult:
    """Minimum-makespan plan within budget; ties go to the cheaper plan, then enumeration order."""
    verdict = validate_scenario(s)
    if not verdict.ok:
        raise ModelError("invalid scenario: " + "; ".join(map(str, verdict.violations)))
    lim.check(s)
    if not s.tasks:
        return SchedulerResult(ExecutionPlan())

    ex = s.exec_table
    o, q, budget = s.startup_overhead_s, s.billing_quantum_s, s.budget
    rate = {it.id: it.cost_per_hour for it in s.instance_types}
    types = sorted(s.instance_types, key=lambda it: (it.cost_per_hour, it.id))
    # longest-first ordering tightens the makespan bound early
    order = sorted(s.tasks, key=lambda t: (-min(ex[it.id][t.id] for it in types), t.id))
    tids = [t.id for t in order]
    n = len(tids)

    slot_type: list[int] = []
    slot_load: list[int] = []
    slot_tasks: list[list[int]] = []
    per_type = {it.id: 0 for it in types}
    best: list = [None, None]  # [(makespan, cost), assignment snapshot]

    def price(ty: int, load: int) -> int:
        return -(-(o + load) // q) * rate[ty]

    def search(i: int, cost: int, span: int) -> None:
        if best[0] is not None and (span, cost) >= best[0]:
            return
        if i == n:
            best[0] = (span, cost)
            best[1] = [(slot_type[k], tuple(slot_tasks[k])) for k in range(len(slot_type))]
            return
        tid = tids[i]
        for k in range(len(slot_type)):
            ty = slot_type[k]
            e = ex[ty][tid]
            old = slot_load[k]
            new_cost = cost - price(ty, old) + price(ty, old + e)
            if new_cost > budget:
                continue
            slot_load[k] = old + e
            slot_tasks[k].append(tid)
            search(i + 1, new_cost, max(span, o + old + e))
            slot_tasks[k].pop()
            slot_load[k] = old
        if len(slot_type) >= lim.max_total_vms:
            return
        for it in types:
            if per_type[it.id] >= lim.max_vms_per_type:
                continue
            e = ex[it.id][tid]
            new_cost = cost + price(it.id, e)
            if new_cost > budget:
                continue
            slot_type.append(it.id)
            slot_load.append(e)
            slot_tasks.append([tid])
            per_type[it.id] += 1
            search(i + 1, new_cost, max(span, o + e))
            per_type[it.id] -= 1
            slot_tasks.pop()
            slot_load.pop()
            slot_type.pop()

    search(0, 0, 0)
    if best[1] is None:
        return SchedulerResult.infeasible(f"no plan within oracle limits fits budget {budget}")
    slots = tuple(VmSlot(k, ty, tuple(sorted(ts))) for k, (ty, ts) in enumerate(best[1]))
    return SchedulerResult(ExecutionPlan(slots))
