"""Command line: ``botsched plan|sweep|oracle|validate``.

Exit status is 0 on success (an infeasible budget is still a success) and 2
on bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .evaluator import evaluate
from .heuristic import SchedulerResult, find_plan
from .model import Scenario
from .oracle import OracleLimitError, OracleLimits
from .scenario_io import ScenarioError, load_scenario
from .sweep import SCHEDULERS, SweepSpec, parse_budgets, parse_schedulers, run_sweep, scheduler_fn

_LIMIT_KEYS = {
    "tasks": "max_tasks",
    "types": "max_types",
    "per_type": "max_vms_per_type",
    "total": "max_total_vms",
}


def parse_limits(text: str | None) -> OracleLimits:
    """``"tasks=8,types=3,per_type=8,total=8"``; omitted keys keep their defaults."""
    if not text:
        return OracleLimits()
    kwargs = {}
    for part in text.split(","):
        key, sep, val = part.partition("=")
        key = key.strip()
        if not sep or key not in _LIMIT_KEYS:
            raise ValueError(f"bad limit {part!r}; keys are {sorted(_LIMIT_KEYS)}")
        kwargs[_LIMIT_KEYS[key]] = int(val)
    return OracleLimits(**kwargs)


def result_to_dict(res: SchedulerResult, s: Scenario, scheduler: str, trace: bool = False) -> dict:
    names = {it.id: it.name for it in s.instance_types}
    out: dict = {
        "scheduler": scheduler,
        "budget": s.budget,
        "feasible": res.feasible,
        "iterations": res.iterations,
    }
    if not res.feasible:
        out["reason"] = res.reason
    else:
        rep = evaluate(res.plan, s)
        tasks = {vm.id: list(vm.task_ids) for vm in res.plan.slots}
        out["report"] = {
            "makespan_s": rep.makespan_s,
            "total_cost": rep.total_cost,
            "feasible": rep.feasible,
            "vm_count_by_type": {names[t]: c for t, c in rep.vm_count_by_type.items()},
            "per_vm": [
                {
                    "vm_id": line.vm_id,
                    "type": names[line.type_id],
                    "exec_s": line.exec_s,
                    "billed_hours": line.billed_quanta,
                    "cost": line.cost,
                    "tasks": tasks[line.vm_id],
                }
                for line in rep.per_vm
            ],
        }
    if trace:
        out["trace"] = [{"phase": p, "cost": c, "makespan_s": m} for p, c, m in res.trace]
    return out


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_plan(args) -> int:
    s = load_scenario(args.scenario)
    if args.budget is not None:
        s = s.with_budget(args.budget)
    if args.scheduler == "heuristic":
        res = find_plan(s, keep_trace=args.trace)
    else:
        res = scheduler_fn(args.scheduler, parse_limits(args.limits))(s)
    _emit(json.dumps(result_to_dict(res, s, args.scheduler, args.trace), indent=2) + "\n", args.out)
    return 0


def cmd_oracle(args) -> int:
    s = load_scenario(args.scenario)
    if args.budget is not None:
        s = s.with_budget(args.budget)
    res = scheduler_fn("oracle", parse_limits(args.limits))(s)
    _emit(json.dumps(result_to_dict(res, s, "oracle"), indent=2) + "\n", args.out)
    return 0


def cmd_sweep(args) -> int:
    spec = SweepSpec(
        scenario=args.scenario,
        budgets=tuple(parse_budgets(args.budgets)),
        schedulers=parse_schedulers(args.schedulers),
        out=args.out,
        limits=parse_limits(args.limits),
        timing=args.timing,
        jobs=args.jobs,
    )
    table = run_sweep(spec)
    csv_text = table.to_csv(timing=spec.timing)
    if spec.out:
        Path(spec.out).write_text(csv_text)
        sys.stdout.write(table.summary_text())
    else:
        sys.stdout.write(csv_text)
        sys.stderr.write(table.summary_text())
    if args.summary:
        Path(args.summary).write_text(json.dumps(table.summary(), indent=2, sort_keys=True) + "\n")
    return 0


def cmd_validate(args) -> int:
    s = load_scenario(args.scenario)
    print(
        f"ok: {len(s.applications)} applications, {len(s.instance_types)} instance types, "
        f"{len(s.tasks)} tasks, budget {s.budget}, overhead {s.startup_overhead_s}s, "
        f"quantum {s.billing_quantum_s}s"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="botsched", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("plan", help="build one plan and print its report as JSON")
    sp.add_argument("scenario", help="scenario file or bundled fixture name")
    sp.add_argument("--scheduler", choices=SCHEDULERS, default="heuristic")
    sp.add_argument("--budget", type=int)
    sp.add_argument("--out")
    sp.add_argument("--trace", action="store_true", help="include per-phase (cost, makespan) snapshots")
    sp.add_argument("--limits", help="oracle limits, e.g. tasks=8,types=3")
    sp.set_defaults(func=cmd_plan)

    sp = sub.add_parser("sweep", help="run schedulers over a budget range and write CSV")
    sp.add_argument("scenario")
    sp.add_argument("--budgets", required=True, help="'a..b:step' or 'a,b,c'")
    sp.add_argument("--schedulers", default="heuristic,mi,mp")
    sp.add_argument("--out", help="CSV path (stdout if omitted)")
    sp.add_argument("--summary", help="also write the comparison summary as JSON")
    sp.add_argument("--limits")
    sp.add_argument("--timing", action="store_true", help="fill schedule_wall_ms (output is then not reproducible)")
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("oracle", help="exact optimum for a small scenario")
    sp.add_argument("scenario")
    sp.add_argument("--budget", type=int)
    sp.add_argument("--limits")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("validate", help="check a scenario file")
    sp.add_argument("scenario")
    sp.set_defaults(func=cmd_validate)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, OracleLimitError, ValueError) as e:
        print(f"botsched: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
