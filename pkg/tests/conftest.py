import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from botsched.model import Application, InstanceType, Scenario, Task  # noqa: E402

# cost, perf (A1, A2, A3) straight from the instance-type table
TABLE1 = [
    ("it1", 5, (20, 24, 22)),
    ("it2", 10, (11, 13, 12)),
    ("it3", 10, (10, 15, 9)),
    ("it4", 10, (10, 9, 12)),
]


def table1_catalog():
    return tuple(InstanceType(i, name, c, perf) for i, (name, c, perf) in enumerate(TABLE1))


def table1_scenario(per_app=25, budget=40, overhead=0, quantum=3600):
    apps = tuple(Application(i, f"A{i + 1}") for i in range(3))
    tasks = []
    for a in range(3):
        for k in range(per_app):
            tasks.append(Task(len(tasks), a, 1 + k % 5))
    return Scenario(apps, tuple(tasks), table1_catalog(), budget, overhead, quantum)


def worked_example(budget=2, n_tasks=10, overhead=0):
    """Two types (it1 $2 at 8 s/unit, it2 $1 at 10 s/unit), one app, ten size-1 tasks."""
    types = (InstanceType(0, "it1", 2, (8,)), InstanceType(1, "it2", 1, (10,)))
    tasks = tuple(Task(i, 0, 1) for i in range(n_tasks))
    return Scenario((Application(0, "A1"),), tasks, types, budget, overhead, 3600)


@pytest.fixture
def table1_small():
    return table1_scenario()


@pytest.fixture
def example4g():
    return worked_example()
