"""Budget sweeps across schedulers, emitted as plot-ready CSV plus a comparison summary."""

from __future__ import annotations

import csv
import io
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Sequence, TextIO

from .baselines import mi_plan, mp_plan
from .heuristic import SchedulerResult, find_plan
from .model import Scenario, plan_cost, plan_makespan, validate_plan
from .oracle import OracleLimits, brute_force_optimal
from .scenario_io import load_scenario

SCHEDULERS = ("heuristic", "mi", "mp", "oracle")
BASELINES = ("mi", "mp")

_RANGE = re.compile(r"^\s*(\d+)\s*\.\.\s*(\d+)\s*(?::\s*(\d+)\s*)?$")


def parse_budgets(text: str) -> list[int]:
    """``"40..85:5"`` (inclusive range, step defaults to 1) or ``"40,45,60"``."""
    m = _RANGE.match(text)
    if m:
        start, stop = int(m.group(1)), int(m.group(2))
        step = int(m.group(3)) if m.group(3) is not None else 1
        if step <= 0:
            raise ValueError("budget step must be > 0")
        if stop < start:
            raise ValueError(f"empty budget range {text!r}")
        return list(range(start, stop + 1, step))
    try:
        budgets = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ValueError(f"cannot parse budgets {text!r}; use 'a..b:step' or 'a,b,c'") from None
    if not budgets:
        raise ValueError("no budgets given")
    if any(b < 0 for b in budgets):
        raise ValueError("budgets must be >= 0")
    return budgets


def parse_schedulers(text: str | Sequence[str]) -> tuple[str, ...]:
    names = [n.strip() for n in text.split(",")] if isinstance(text, str) else list(text)
    names = [n for n in names if n]
    unknown = [n for n in names if n not in SCHEDULERS]
    if unknown:
        raise ValueError(f"unknown scheduler(s) {unknown}; choose from {list(SCHEDULERS)}")
    if not names:
        raise ValueError("no schedulers given")
    return tuple(dict.fromkeys(names))


def scheduler_fn(name: str, limits: OracleLimits = OracleLimits()) -> Callable[[Scenario], SchedulerResult]:
    if name == "heuristic":
        return find_plan
    if name == "mi":
        return mi_plan
    if name == "mp":
        return mp_plan
    if name == "oracle":
        return partial(brute_force_optimal, lim=limits)
    raise ValueError(f"unknown scheduler {name!r}")


@dataclass(frozen=True)
class SweepSpec:
    scenario: str
    budgets: tuple[int, ...]
    schedulers: tuple[str, ...] = ("heuristic", "mi", "mp")
    out: str | None = None
    limits: OracleLimits = OracleLimits()
    timing: bool = False
    jobs: int = 1

    def __post_init__(self) -> None:
        if not self.budgets:
            raise ValueError("budgets must not be empty")
        parse_schedulers(self.schedulers)


@dataclass(frozen=True)
class SweepRow:
    budget: int
    scheduler: str
    feasible: bool
    cost: int | None
    makespan_s: int | None
    vm_counts: tuple[int, ...]
    wall_ms: float


@dataclass
class SweepTable:
    type_names: tuple[str, ...]
    rows: list[SweepRow] = field(default_factory=list)

    def lookup(self, budget: int, scheduler: str) -> SweepRow | None:
        for r in self.rows:
            if r.budget == budget and r.scheduler == scheduler:
                return r
        return None

    def summary(self) -> dict[str, dict]:
        """Mean percent makespan reduction of the heuristic against each other scheduler present."""
        out: dict[str, dict] = {}
        present = list(dict.fromkeys(r.scheduler for r in self.rows))
        if "heuristic" not in present:
            return out
        budgets = list(dict.fromkeys(r.budget for r in self.rows))
        for other in present:
            if other == "heuristic":
                continue
            gains = []
            for b in budgets:
                h, x = self.lookup(b, "heuristic"), self.lookup(b, other)
                if h and x and h.feasible and x.feasible and x.makespan_s:
                    gains.append(100.0 * (x.makespan_s - h.makespan_s) / x.makespan_s)
            out[other] = {
                "budgets_compared": len(gains),
                "mean_reduction_pct": round(sum(gains) / len(gains), 3) if gains else None,
            }
        for name in present:
            feasible = [r.budget for r in self.rows if r.scheduler == name and r.feasible]
            out.setdefault(name, {})["min_feasible_budget"] = min(feasible) if feasible else None
        return out

    def header(self) -> list[str]:
        return (
            ["budget", "scheduler", "feasible", "cost", "makespan_s"]
            + [f"vm_count_{n}" for n in self.type_names]
            + ["schedule_wall_ms"]
        )

    def write_csv(self, fh: TextIO, timing: bool = False) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(self.header())
        for r in self.rows:
            w.writerow(
                [r.budget, r.scheduler, int(r.feasible), _blank(r.cost), _blank(r.makespan_s)]
                + [c if r.feasible else "" for c in r.vm_counts]
                + [f"{r.wall_ms:.3f}" if timing else ""]
            )

    def to_csv(self, timing: bool = False) -> str:
        buf = io.StringIO()
        self.write_csv(buf, timing)
        return buf.getvalue()

    def summary_text(self) -> str:
        lines = []
        for name, info in self.summary().items():
            parts = [f"{k}={v}" for k, v in info.items()]
            lines.append(f"# {name}: " + " ".join(parts))
        return "\n".join(lines) + ("\n" if lines else "")


def _blank(v: int | None) -> str | int:
    return "" if v is None else v


def _cell(s: Scenario, name: str, limits: OracleLimits) -> SweepRow:
    fn = scheduler_fn(name, limits)
    t0 = time.perf_counter()
    res = fn(s)
    wall_ms = (time.perf_counter() - t0) * 1000.0
    if not res.feasible:
        return SweepRow(s.budget, name, False, None, None, (0,) * len(s.instance_types), wall_ms)
    verdict = validate_plan(res.plan, s)
    if not verdict.ok:
        raise AssertionError(f"{name} returned an invalid plan at budget {s.budget}: {verdict.violations}")
    counts = res.plan.type_counts()
    return SweepRow(
        s.budget,
        name,
        True,
        plan_cost(res.plan, s),
        plan_makespan(res.plan, s),
        tuple(counts.get(it.id, 0) for it in s.instance_types),
        wall_ms,
    )


def run_sweep(spec: SweepSpec, scenario: Scenario | None = None) -> SweepTable:
    """One row per (budget, scheduler), in that order; infeasible results are rows too."""
    base = scenario if scenario is not None else load_scenario(spec.scenario)
    if "oracle" in spec.schedulers:
        spec.limits.check(base)
    cells = [(base.with_budget(b), name) for b in spec.budgets for name in spec.schedulers]
    if spec.jobs > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            rows = list(pool.map(_cell, *zip(*cells), [spec.limits] * len(cells)))
    else:
        rows = [_cell(s, name, spec.limits) for s, name in cells]
    return SweepTable(tuple(it.name for it in base.instance_types), rows)
