"""Domain types and exact cost/time arithmetic for multi-BoT cloud scheduling.

Money is integer currency units and time is integer seconds. The only
rounding anywhere is the billing ceiling in :func:`vm_cost`.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable


class ModelError(ValueError):
    """Raised for references that do not resolve inside a scenario."""


class InfeasibleError(Exception):
    """Raised when no budget-respecting plan can be built."""


@dataclass(frozen=True)
class Application:
    id: int
    name: str


@dataclass(frozen=True)
class Task:
    id: int
    app_id: int
    size: int


@dataclass(frozen=True)
class InstanceType:
    """A purchasable VM flavor.

    ``perf[j]`` is the number of seconds one VM of this type needs to process
    one size unit of a task belonging to application ``j``.
    """

    id: int
    name: str
    cost_per_hour: int
    perf: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "perf", tuple(self.perf))


@dataclass(frozen=True)
class Scenario:
    applications: tuple[Application, ...]
    tasks: tuple[Task, ...]
    instance_types: tuple[InstanceType, ...]
    budget: int = 0
    startup_overhead_s: int = 0
    billing_quantum_s: int = 3600

    def __post_init__(self) -> None:
        object.__setattr__(self, "applications", tuple(self.applications))
        object.__setattr__(self, "tasks", tuple(self.tasks))
        object.__setattr__(self, "instance_types", tuple(self.instance_types))

    @cached_property
    def task_by_id(self) -> dict[int, Task]:
        return {t.id: t for t in self.tasks}

    @cached_property
    def type_by_id(self) -> dict[int, InstanceType]:
        return {it.id: it for it in self.instance_types}

    @cached_property
    def exec_table(self) -> dict[int, dict[int, int]]:
        """``exec_table[type_id][task_id]`` -> seconds for that task on that type."""
        return {
            it.id: {t.id: task_exec_time(it, t) for t in self.tasks}
            for it in self.instance_types
        }

    def with_budget(self, budget: int) -> "Scenario":
        return Scenario(
            self.applications,
            self.tasks,
            self.instance_types,
            budget,
            self.startup_overhead_s,
            self.billing_quantum_s,
        )


@dataclass(frozen=True)
class VmSlot:
    id: int
    type_id: int
    task_ids: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "task_ids", tuple(self.task_ids))


@dataclass(frozen=True)
class ExecutionPlan:
    slots: tuple[VmSlot, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "slots", tuple(self.slots))

    def task_ids(self) -> list[int]:
        return [tid for slot in self.slots for tid in slot.task_ids]

    def type_counts(self) -> Counter[int]:
        return Counter(slot.type_id for slot in self.slots)


@dataclass(frozen=True)
class Violation:
    kind: str
    ids: tuple = ()
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.kind} {list(self.ids)}: {self.detail}" if self.detail else f"{self.kind} {list(self.ids)}"


@dataclass(frozen=True)
class Verdict:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class VmLine:
    vm_id: int
    type_id: int
    exec_s: int
    billed_quanta: int
    cost: int


@dataclass(frozen=True)
class PlanReport:
    makespan_s: int
    total_cost: int
    feasible: bool
    vm_count_by_type: dict[int, int] = field(default_factory=dict)
    per_vm: tuple[VmLine, ...] = ()


def task_exec_time(it: InstanceType, t: Task) -> int:
    if not 0 <= t.app_id < len(it.perf):
        raise ModelError(f"task {t.id} has application {t.app_id}, not covered by type {it.name!r}")
    return it.perf[t.app_id] * t.size


def _slot_type(vm: VmSlot, s: Scenario) -> InstanceType:
    try:
        return s.type_by_id[vm.type_id]
    except KeyError:
        raise ModelError(f"slot {vm.id} references unknown instance type {vm.type_id}") from None


def _slot_task(tid: int, s: Scenario) -> Task:
    try:
        return s.task_by_id[tid]
    except KeyError:
        raise ModelError(f"unknown task id {tid}") from None


def vm_exec_time(vm: VmSlot, s: Scenario) -> int:
    it = _slot_type(vm, s)
    return s.startup_overhead_s + sum(task_exec_time(it, _slot_task(tid, s)) for tid in vm.task_ids)


def billed_quanta(exec_s: int, quantum_s: int) -> int:
    return -(-exec_s // quantum_s)


def vm_cost(vm: VmSlot, s: Scenario) -> int:
    it = _slot_type(vm, s)
    return billed_quanta(vm_exec_time(vm, s), s.billing_quantum_s) * it.cost_per_hour


def plan_makespan(p: ExecutionPlan, s: Scenario) -> int:
    return max((vm_exec_time(vm, s) for vm in p.slots), default=0)


def plan_cost(p: ExecutionPlan, s: Scenario) -> int:
    return sum(vm_cost(vm, s) for vm in p.slots)


def validate_plan(p: ExecutionPlan, s: Scenario) -> Verdict:
    """Check coverage, disjointness and the budget; violations are returned, not raised."""
    out: list[Violation] = []
    seen: dict[int, int] = {}
    refs_ok = True
    for slot in p.slots:
        if slot.type_id not in s.type_by_id:
            out.append(Violation("unknown-type", (slot.id,), f"type {slot.type_id}"))
            refs_ok = False
        for tid in slot.task_ids:
            if tid not in s.task_by_id:
                out.append(Violation("unknown-task", (tid,), f"in slot {slot.id}"))
                refs_ok = False
                continue
            if tid in seen:
                out.append(Violation("disjointness", (tid,), f"in slots {seen[tid]} and {slot.id}"))
            else:
                seen[tid] = slot.id
    for t in s.tasks:
        if t.id not in seen:
            out.append(Violation("coverage", (t.id,), "task not assigned to any slot"))
    if refs_ok:
        cost = plan_cost(p, s)
        if cost > s.budget:
            out.append(Violation("budget", (), f"cost {cost} exceeds budget {s.budget}"))
    return Verdict(tuple(out))


def _dense(ids: Iterable[int]) -> bool:
    ids = list(ids)
    return sorted(ids) == list(range(len(ids)))


def validate_scenario(s: Scenario) -> Verdict:
    out: list[Violation] = []
    m = len(s.applications)
    if not _dense(a.id for a in s.applications):
        out.append(Violation("dense-ids", tuple(a.id for a in s.applications), "application ids must be 0..M-1"))
    if not _dense(it.id for it in s.instance_types):
        out.append(Violation("dense-ids", tuple(it.id for it in s.instance_types), "instance type ids must be 0..N-1"))
    if not _dense(t.id for t in s.tasks):
        out.append(Violation("dense-ids", (), "task ids must be 0..T-1"))
    for it in s.instance_types:
        if it.cost_per_hour < 1:
            out.append(Violation("cost", (it.id,), f"{it.name}: cost_per_hour {it.cost_per_hour} < 1"))
        if len(it.perf) != m:
            out.append(Violation("perf-length", (it.id,), f"{it.name}: {len(it.perf)} perf entries for {m} applications"))
        if any(p < 1 for p in it.perf):
            out.append(Violation("perf", (it.id,), f"{it.name}: perf entries must be >= 1"))
    first_seen: dict[tuple, int] = {}
    for it in s.instance_types:
        key = (it.perf, it.cost_per_hour)
        if key in first_seen:
            out.append(Violation("duplicate-type", (first_seen[key], it.id), "same performance and cost"))
        else:
            first_seen[key] = it.id
    app_ids = {a.id for a in s.applications}
    for t in s.tasks:
        if t.size < 1:
            out.append(Violation("size", (t.id,), f"size {t.size} < 1"))
        if t.app_id not in app_ids:
            out.append(Violation("app-ref", (t.id,), f"unknown application {t.app_id}"))
    if s.budget < 0:
        out.append(Violation("budget", (), f"budget {s.budget} < 0"))
    if s.startup_overhead_s < 0:
        out.append(Violation("overhead", (), f"startup overhead {s.startup_overhead_s} < 0"))
    if s.billing_quantum_s < 1:
        out.append(Violation("quantum", (), f"billing quantum {s.billing_quantum_s} < 1"))
    return Verdict(tuple(out))
