"""Budget-constrained scheduling of multiple bag-of-tasks applications on the cloud."""

from .baselines import mi_plan, mp_plan
from .evaluator import build_timelines, evaluate
from .heuristic import SchedulerResult, find_plan
from .model import (
    Application,
    ExecutionPlan,
    InstanceType,
    PlanReport,
    Scenario,
    Task,
    VmSlot,
    plan_cost,
    plan_makespan,
    validate_plan,
    validate_scenario,
)
from .oracle import OracleLimits, brute_force_optimal
from .scenario_io import load_scenario

__all__ = [
    "Application",
    "ExecutionPlan",
    "InstanceType",
    "OracleLimits",
    "PlanReport",
    "Scenario",
    "SchedulerResult",
    "Task",
    "VmSlot",
    "brute_force_optimal",
    "build_timelines",
    "evaluate",
    "find_plan",
    "load_scenario",
    "mi_plan",
    "mp_plan",
    "plan_cost",
    "plan_makespan",
    "validate_plan",
    "validate_scenario",
]
