"""Budget-constrained plan search: phase functions and the iterative driver.

Every phase works on a mutable :class:`WorkingPlan` and the public wrappers
convert to and from immutable :class:`~botsched.model.ExecutionPlan` values.

While a plan is being built, each slot in it counts as hired: its price is
at least one billing quantum even when it holds no tasks yet. Slots that end
up empty are pruned before a plan is returned, so the model's
:func:`~botsched.model.plan_cost` of a returned plan never exceeds the
working price the phases reasoned about.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .model import (
    Application,
    ExecutionPlan,
    InfeasibleError,
    InstanceType,
    ModelError,
    Scenario,
    Task,
    VmSlot,
    plan_cost,
    validate_plan,
    validate_scenario,
)

MAX_FIND_ITERATIONS = 1000


@dataclass(frozen=True)
class SchedulerResult:
    plan: ExecutionPlan | None
    reason: str = ""
    iterations: int = 0
    trace: tuple[tuple[str, int, int], ...] = field(default=(), compare=False)

    @property
    def feasible(self) -> bool:
        return self.plan is not None

    @classmethod
    def infeasible(cls, reason: str, iterations: int = 0, trace=()) -> "SchedulerResult":
        return cls(None, reason, iterations, tuple(trace))


class _Slot:
    __slots__ = ("id", "type_id", "tasks", "load")

    def __init__(self, id: int, type_id: int, tasks: Iterable[int] = (), load: int = 0):
        self.id = id
        self.type_id = type_id
        self.tasks = list(tasks)
        self.load = load


class WorkingPlan:
    """Mutable plan with cached per-slot loads (task seconds, overhead excluded)."""

    def __init__(self, s: Scenario):
        self.s = s
        self.ex = s.exec_table
        self.o = s.startup_overhead_s
        self.q = s.billing_quantum_s
        self.rate = {it.id: it.cost_per_hour for it in s.instance_types}
        self.slots: dict[int, _Slot] = {}
        self._next_id = 0

    @classmethod
    def from_plan(cls, plan: ExecutionPlan, s: Scenario) -> "WorkingPlan":
        w = cls(s)
        for vm in plan.slots:
            if vm.type_id not in w.rate:
                raise ModelError(f"slot {vm.id} references unknown instance type {vm.type_id}")
            row = w.ex[vm.type_id]
            try:
                load = sum(row[t] for t in vm.task_ids)
            except KeyError as e:
                raise ModelError(f"slot {vm.id} references unknown task {e.args[0]}") from None
            w.slots[vm.id] = _Slot(vm.id, vm.type_id, vm.task_ids, load)
            w._next_id = max(w._next_id, vm.id + 1)
        return w

    def copy(self) -> "WorkingPlan":
        w = WorkingPlan.__new__(WorkingPlan)
        w.s, w.ex, w.o, w.q, w.rate = self.s, self.ex, self.o, self.q, self.rate
        w.slots = {k: _Slot(v.id, v.type_id, v.tasks, v.load) for k, v in self.slots.items()}
        w._next_id = self._next_id
        return w

    def freeze(self) -> ExecutionPlan:
        return ExecutionPlan(tuple(VmSlot(sl.id, sl.type_id, tuple(sl.tasks)) for sl in self.slots.values()))

    def add_slot(self, type_id: int) -> _Slot:
        sl = _Slot(self._next_id, type_id)
        self.slots[sl.id] = sl
        self._next_id += 1
        return sl

    def remove_slot(self, sl: _Slot) -> None:
        del self.slots[sl.id]

    def exec_of(self, sl: _Slot, extra: int = 0) -> int:
        return self.o + sl.load + extra

    def price(self, sl: _Slot, extra: int = 0) -> int:
        """Hired-slot price: at least one quantum, ceiling of exec otherwise."""
        quanta = -(-(self.o + sl.load + extra) // self.q)
        return max(1, quanta) * self.rate[sl.type_id]

    def cost(self) -> int:
        return sum(self.price(sl) for sl in self.slots.values())

    def makespan(self) -> int:
        return max((self.exec_of(sl) for sl in self.slots.values()), default=0)

    def place(self, tid: int, sl: _Slot) -> None:
        sl.tasks.append(tid)
        sl.load += self.ex[sl.type_id][tid]

    def take(self, tid: int, sl: _Slot) -> None:
        sl.tasks.remove(tid)
        sl.load -= self.ex[sl.type_id][tid]

    def prune_empty(self) -> None:
        for sl in [sl for sl in self.slots.values() if not sl.tasks]:
            del self.slots[sl.id]

    def exec_vector(self) -> list[int]:
        return sorted((self.exec_of(sl) for sl in self.slots.values()), reverse=True)

    def _tiebreak(self, sl: _Slot) -> tuple[int, int, int]:
        return (self.rate[sl.type_id], sl.type_id, sl.id)


def provisioned_cost(plan: ExecutionPlan, s: Scenario) -> int:
    """Cost of ``plan`` with every slot, empty or not, billed for at least one quantum."""
    return WorkingPlan.from_plan(plan, s).cost()


def _finalize(w: WorkingPlan) -> ExecutionPlan:
    """Drop empty slots and renumber the survivors 0..n-1 in slot-id order."""
    kept = [sl for sl in sorted(w.slots.values(), key=lambda x: x.id) if sl.tasks]
    return ExecutionPlan(tuple(VmSlot(i, sl.type_id, tuple(sl.tasks)) for i, sl in enumerate(kept)))


def best_type(app: Application | int, catalog: Sequence[InstanceType], budget: int) -> InstanceType:
    """Fastest affordable type for ``app``; ties go to the cheaper, then lower id."""
    app_id = app.id if isinstance(app, Application) else app
    affordable = [it for it in catalog if it.cost_per_hour <= budget]
    if not affordable:
        raise InfeasibleError(f"no instance type costs at most {budget} per hour")
    return min(affordable, key=lambda it: (it.perf[app_id], it.cost_per_hour, it.id))


def _initial(s: Scenario) -> WorkingPlan:
    w = WorkingPlan(s)
    used = {t.app_id for t in s.tasks}
    for app in s.applications:
        # applications without tasks would only contribute slots that get pruned
        if app.id not in used:
            continue
        it = best_type(app, s.instance_types, s.budget)
        for _ in range(s.budget // it.cost_per_hour):
            w.add_slot(it.id)
    return w


def initial_plan(s: Scenario) -> ExecutionPlan:
    """Per application, hire as many VMs of its best type as the whole budget allows.

    Tasks are not placed here; see :func:`assign`.
    """
    return _initial(s).freeze()


def _assign(w: WorkingPlan, task_ids: Iterable[int], among: Sequence[int] | None = None) -> None:
    pool = [w.slots[i] for i in among] if among is not None else list(w.slots.values())
    if not pool:
        task_ids = list(task_ids)
        if task_ids:
            raise ModelError(f"cannot assign {len(task_ids)} tasks to a plan without slots")
        return
    ex = w.ex
    for tid in task_ids:
        best = None
        best_key = None
        for sl in pool:
            e = ex[sl.type_id][tid]
            raises_cost = w.price(sl, e) > w.price(sl)
            key = (raises_cost, e, w.exec_of(sl), *w._tiebreak(sl))
            if best_key is None or key < best_key:
                best, best_key = sl, key
        w.place(tid, best)


def assign(tasks: Sequence[Task], plan: ExecutionPlan, s: Scenario) -> ExecutionPlan:
    """Place each task, in order, on one slot of ``plan``.

    A slot whose price would not grow is preferred. Among the candidates the
    slot running the task fastest wins, then the least loaded one, then the
    cheaper type, type id and slot id.
    """
    w = WorkingPlan.from_plan(plan, s)
    _assign(w, [t.id for t in tasks])
    return w.freeze()


def _balance(w: WorkingPlan, among: Sequence[int] | None = None) -> int:
    """Move tasks off the busiest slot while that lowers the busiest pair; returns move count."""
    ex = w.ex
    moves = 0
    while True:
        pool = [w.slots[i] for i in among] if among is not None else list(w.slots.values())
        if len(pool) < 2:
            return moves
        src = min(pool, key=lambda sl: (-w.exec_of(sl), sl.id))
        src_exec = w.exec_of(src)
        src_price = w.price(src)
        others = [sl for sl in pool if sl is not src]
        moved = False
        for tid in sorted(src.tasks, key=lambda t: (-ex[src.type_id][t], t)):
            e_src = ex[src.type_id][tid]
            src_delta = w.price(src, -e_src) - src_price
            targets = sorted(others, key=lambda sl: (ex[sl.type_id][tid], w.exec_of(sl), *w._tiebreak(sl)))
            for dst in targets:
                e_dst = ex[dst.type_id][tid]
                if w.exec_of(dst, e_dst) >= src_exec:
                    continue
                if src_delta + w.price(dst, e_dst) - w.price(dst) > 0:
                    continue
                w.take(tid, src)
                w.place(tid, dst)
                moved = True
                break
            if moved:
                break
        if not moved:
            moved = _swap_once(w, src, others)
        if not moved:
            return moves
        moves += 1


def _swap_once(w: WorkingPlan, src: _Slot, others: list[_Slot]) -> bool:
    """Exchange a task of ``src`` for a shorter one elsewhere if both slots end below ``src``'s exec."""
    ex = w.ex
    src_exec = w.exec_of(src)
    src_price = w.price(src)
    src_row = ex[src.type_id]
    ranked = sorted(others, key=lambda sl: (w.exec_of(sl), *w._tiebreak(sl)))
    for a in sorted(src.tasks, key=lambda t: (-src_row[t], t)):
        for dst in ranked:
            dst_row = ex[dst.type_id]
            dst_exec = w.exec_of(dst)
            dst_price = w.price(dst)
            for b in sorted(dst.tasks, key=lambda t: (dst_row[t], t)):
                d_src = src_row[b] - src_row[a]
                if d_src >= 0:
                    continue
                d_dst = dst_row[a] - dst_row[b]
                if dst_exec + d_dst >= src_exec:
                    continue
                if w.price(src, d_src) - src_price + w.price(dst, d_dst) - dst_price > 0:
                    continue
                w.take(a, src)
                w.take(b, dst)
                w.place(b, src)
                w.place(a, dst)
                return True
    return False


def balance(plan: ExecutionPlan, s: Scenario) -> ExecutionPlan:
    """Even out slot execution times without raising makespan or cost.

    The busiest slot (lowest id on ties) gives up its tasks longest first.
    Each task goes to the first slot, ranked by how fast it runs the task and
    then by load, that finishes before the busiest slot currently does and
    whose price rise is covered by the source's saving. After every accepted
    move the busiest slot is recomputed; a pass with no accepted move ends
    the phase. Each move strictly lowers the descending vector of slot
    execution times, which bounds the number of moves.
    """
    w = WorkingPlan.from_plan(plan, s)
    _balance(w)
    return w.freeze()


def _reduce(w: WorkingPlan, excluded: Iterable[int] = (), local_mode: bool = False) -> None:
    ex = w.ex
    marked = set(excluded)
    while True:
        cands = [sl for sl in w.slots.values() if sl.id not in marked]
        if not cands:
            return
        victim = min(cands, key=lambda sl: (w.exec_of(sl), sl.id))
        receivers = [
            sl for sl in w.slots.values()
            if sl is not victim and (not local_mode or sl.type_id == victim.type_id)
        ]
        if not receivers:
            marked.add(victim.id)
            continue
        old_cost = w.cost()
        placed: list[tuple[int, _Slot]] = []
        for tid in sorted(victim.tasks, key=lambda t: (-ex[victim.type_id][t], t)):
            dst = min(receivers, key=lambda sl: (ex[sl.type_id][tid], w.exec_of(sl), *w._tiebreak(sl)))
            w.place(tid, dst)
            placed.append((tid, dst))
        new_cost = w.cost() - w.price(victim)
        if new_cost <= old_cost:
            w.remove_slot(victim)
        else:
            for tid, dst in placed:
                w.take(tid, dst)
            marked.add(victim.id)


def reduce(
    plan: ExecutionPlan,
    s: Scenario,
    excluded: Iterable[int] = (),
    local_mode: bool = False,
) -> ExecutionPlan:
    """Remove whole slots by spreading their tasks over the others.

    The least busy slot not in ``excluded`` is emptied, each task going to the
    receiver that runs it fastest (in ``local_mode`` only slots of the same
    type receive). The removal stands if total cost does not grow; otherwise
    it is undone and that slot is not tried again in this call.
    """
    w = WorkingPlan.from_plan(plan, s)
    _reduce(w, excluded, local_mode)
    return w.freeze()


def _add(w: WorkingPlan, remaining: int) -> list[int]:
    s = w.s
    totals = {it.id: sum(w.ex[it.id].values()) for it in s.instance_types}
    added = []
    while True:
        affordable = [it for it in s.instance_types if it.cost_per_hour <= remaining]
        if not affordable:
            return added
        it = min(affordable, key=lambda it: (totals[it.id], it.cost_per_hour, it.id))
        added.append(w.add_slot(it.id).id)
        remaining -= it.cost_per_hour


def add_vms(plan: ExecutionPlan, s: Scenario, remaining: int) -> ExecutionPlan:
    """Spend ``remaining`` on extra empty slots, one hour each.

    Each pick is the affordable type that would run the whole workload
    fastest on a single VM (then cheaper, then lower id).
    """
    w = WorkingPlan.from_plan(plan, s)
    _add(w, remaining)
    return w.freeze()


def _split_lpt(w: WorkingPlan, sl: _Slot) -> tuple[list[int], list[int]]:
    row = w.ex[sl.type_id]
    bins: tuple[list[int], list[int]] = ([], [])
    loads = [0, 0]
    for tid in sorted(sl.tasks, key=lambda t: (-row[t], t)):
        i = 0 if loads[0] <= loads[1] else 1
        bins[i].append(tid)
        loads[i] += row[tid]
    return bins


def _keep(w: WorkingPlan, budget: int) -> None:
    rejected: set[int] = set()
    while True:
        cands = [
            sl for sl in w.slots.values()
            if w.exec_of(sl) > w.q and len(sl.tasks) >= 2 and sl.id not in rejected
        ]
        if not cands:
            return
        sl = min(cands, key=lambda x: (-w.exec_of(x), x.id))
        old_exec = w.exec_of(sl)
        old_tasks, old_load = list(sl.tasks), sl.load
        keep, move = _split_lpt(w, sl)
        row = w.ex[sl.type_id]
        sl.tasks, sl.load = keep, sum(row[t] for t in keep)
        twin = w.add_slot(sl.type_id)
        twin.tasks, twin.load = move, sum(row[t] for t in move)
        if w.cost() <= budget and max(w.exec_of(sl), w.exec_of(twin)) < old_exec:
            continue
        w.remove_slot(twin)
        sl.tasks, sl.load = old_tasks, old_load
        rejected.add(sl.id)


def keep_under_hour(plan: ExecutionPlan, s: Scenario, budget: int) -> ExecutionPlan:
    """Split slots running past one billing quantum into two of the same type.

    Tasks are re-dealt longest first to the lighter half. A split stands only
    while the plan stays within ``budget``.
    """
    w = WorkingPlan.from_plan(plan, s)
    _keep(w, budget)
    return w.freeze()


def _replace(w: WorkingPlan, budget: int, batch: int = 1) -> WorkingPlan:
    if batch < 1:
        raise ValueError("batch must be >= 1")
    catalog = sorted(w.s.instance_types, key=lambda it: (it.cost_per_hour, it.id))
    while True:
        committed = None
        present = sorted({sl.type_id for sl in w.slots.values()}, key=lambda t: (-w.rate[t], t))
        makespan = w.makespan()
        for ty in present:
            group = sorted(
                (sl for sl in w.slots.values() if sl.type_id == ty),
                key=lambda sl: (-w.exec_of(sl), sl.id),
            )[:batch]
            moved = [tid for sl in group for tid in sl.tasks]
            if not moved:
                continue
            freed = sum(w.price(sl) for sl in group) + max(0, budget - w.cost())
            for cheap in catalog:
                if cheap.cost_per_hour >= w.rate[ty]:
                    break
                k = min(freed // cheap.cost_per_hour, len(moved))
                if k == 0:
                    continue
                trial = w.copy()
                for sl in group:
                    trial.remove_slot(trial.slots[sl.id])
                fresh = [trial.add_slot(cheap.id).id for _ in range(k)]
                row = trial.ex[cheap.id]
                _assign(trial, sorted(moved, key=lambda t: (-row[t], t)), among=fresh)
                _balance(trial, among=fresh)
                if trial.cost() <= budget and trial.makespan() < makespan:
                    committed = trial
                    break
            if committed is not None:
                break
        if committed is None:
            return w
        w = committed


def replace(plan: ExecutionPlan, s: Scenario, budget: int, batch: int = 1) -> ExecutionPlan:
    """Swap the busiest ``batch`` slots of one type for more slots of a cheaper type.

    Types are visited from most expensive down and cheaper types from the
    cheapest up. The freed money plus any unspent ``budget`` decides how many
    cheap slots are hired. The swap is committed only if the plan stays within
    ``budget`` and its makespan drops; the search restarts after each commit.
    """
    w = WorkingPlan.from_plan(plan, s)
    return _replace(w, budget, batch).freeze()


def _snapshot(trace: list, phase: str, w: WorkingPlan) -> None:
    trace.append((phase, w.cost(), w.makespan()))


def find_plan(s: Scenario, max_iterations: int = MAX_FIND_ITERATIONS, keep_trace: bool = False) -> SchedulerResult:
    """Build a budget-feasible, low-makespan plan for the whole scenario.

    Starts from every application's best type, places all tasks and
    consolidates same-type slots. Then it iterates: global consolidation,
    spending leftover budget on extra VMs, balancing, splitting over-long
    slots and swapping expensive VMs for cheaper ones. Iteration continues
    while cost or makespan improves on the previous round. The returned plan
    is the best round seen, ranked by budget overrun, then makespan, then
    cost.
    """
    verdict = validate_scenario(s)
    if not verdict.ok:
        raise ModelError("invalid scenario: " + "; ".join(map(str, verdict.violations)))
    if not s.tasks:
        return SchedulerResult(ExecutionPlan(), iterations=0)

    trace: list[tuple[str, int, int]] = []
    try:
        w = _initial(s)
    except InfeasibleError as e:
        return SchedulerResult.infeasible(str(e))
    _assign(w, [t.id for t in s.tasks])
    if keep_trace:
        _snapshot(trace, "initial", w)
    _reduce(w, (), local_mode=True)
    if keep_trace:
        _snapshot(trace, "reduce-local", w)

    budget = s.budget
    prev_cost = prev_exec = None
    best: WorkingPlan | None = None
    best_key = None
    iterations = 0
    current = w
    while iterations < max_iterations:
        iterations += 1
        w = current.copy()
        _reduce(w, (), local_mode=False)
        if keep_trace:
            _snapshot(trace, "reduce-global", w)
        _add(w, budget - w.cost())
        if keep_trace:
            _snapshot(trace, "add", w)
        _balance(w)
        if keep_trace:
            _snapshot(trace, "balance", w)
        _keep(w, budget)
        if keep_trace:
            _snapshot(trace, "keep", w)
        w = _replace(w, max(budget, w.cost()), 1)
        w.prune_empty()
        if keep_trace:
            _snapshot(trace, "replace", w)

        cost, makespan = w.cost(), w.makespan()
        key = (max(0, cost - budget), makespan, cost)
        if best_key is None or key < best_key:
            best, best_key = w, key
        if prev_cost is None or cost < prev_cost or makespan < prev_exec:
            prev_cost, prev_exec = cost, makespan
            current = w
        else:
            break

    assert best is not None
    plan = _finalize(best)
    final_cost = plan_cost(plan, s)
    if final_cost > budget:
        return SchedulerResult.infeasible(
            f"best plan found costs {final_cost}, above budget {budget}", iterations, trace
        )
    assert validate_plan(plan, s).ok
    return SchedulerResult(plan, iterations=iterations, trace=tuple(trace))


__all__ = [
    "SchedulerResult",
    "WorkingPlan",
    "provisioned_cost",
    "best_type",
    "initial_plan",
    "assign",
    "balance",
    "reduce",
    "add_vms",
    "keep_under_hour",
    "replace",
    "find_plan",
]
