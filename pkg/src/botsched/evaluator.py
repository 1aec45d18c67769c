"""Replay of an execution plan: per-VM timelines and the resulting report."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .model import (
    ExecutionPlan,
    ModelError,
    PlanReport,
    Scenario,
    VmLine,
    billed_quanta,
    task_exec_time,
    validate_plan,
)


class InvalidPlanError(ModelError):
    def __init__(self, violations):
        self.violations = tuple(violations)
        super().__init__("invalid plan: " + "; ".join(map(str, self.violations)))


@dataclass(frozen=True)
class VmTimeline:
    """Sequential execution on one VM: boot occupies [0, boot_end), tasks follow back to back."""

    vm_id: int
    type_id: int
    boot_end: int
    events: tuple[tuple[int, int, int], ...]  # (task id, start, end)

    @property
    def end(self) -> int:
        return self.events[-1][2] if self.events else self.boot_end


def _check_structure(p: ExecutionPlan, s: Scenario) -> None:
    bad = [v for v in validate_plan(p, s).violations if v.kind != "budget"]
    if bad:
        raise InvalidPlanError(bad)


def build_timelines(p: ExecutionPlan, s: Scenario) -> list[VmTimeline]:
    _check_structure(p, s)
    out = []
    for vm in p.slots:
        it = s.type_by_id[vm.type_id]
        clock = s.startup_overhead_s
        events = []
        for tid in vm.task_ids:
            start = clock
            clock += task_exec_time(it, s.task_by_id[tid])
            events.append((tid, start, clock))
        out.append(VmTimeline(vm.id, vm.type_id, s.startup_overhead_s, tuple(events)))
    return out


def evaluate(p: ExecutionPlan, s: Scenario) -> PlanReport:
    """Replay ``p`` and price it; raises :class:`InvalidPlanError` on coverage or overlap problems."""
    lines = []
    for tl in build_timelines(p, s):
        quanta = billed_quanta(tl.end, s.billing_quantum_s)
        lines.append(VmLine(tl.vm_id, tl.type_id, tl.end, quanta, quanta * s.type_by_id[tl.type_id].cost_per_hour))
    total = sum(line.cost for line in lines)
    return PlanReport(
        makespan_s=max((line.exec_s for line in lines), default=0),
        total_cost=total,
        feasible=total <= s.budget,
        vm_count_by_type=dict(sorted(Counter(line.type_id for line in lines).items())),
        per_vm=tuple(lines),
    )
