"""Scenario files: JSON documents, bundled fixtures and the workload shorthand.

Layout::

    {
      "applications": [{"name": "A1"}, ...],
      "instance_types": [{"name": "it1", "cost_per_hour": 5, "perf": [20, 24, 22]}, ...],
      "workload": [{"app": "A1", "count": 250, "sizes": "uniform-levels(1, 5)"}, ...],
      "tasks": [{"app": "A1", "size": 3}, ...],
      "budget": 40,
      "defaults": {"startup_overhead_s": 0, "billing_quantum_s": 3600}
    }

``workload`` and ``tasks`` may be combined; explicit tasks come after the
generated ones. ``app`` accepts an application name or its index.
"""

from __future__ import annotations

import json
import re
from importlib import resources
from pathlib import Path
from typing import Any

from .model import Application, InstanceType, Scenario, Task, validate_scenario

FIXTURES = ("table1", "table1-small", "paper-4g")

_LEVELS = re.compile(r"^\s*uniform-levels\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)\s*$")


class ScenarioError(ValueError):
    """A scenario document failed to parse or validate; ``where`` locates the problem."""

    def __init__(self, where: str, message: str):
        self.where = where
        super().__init__(f"{where}: {message}")


def uniform_levels(count: int, lo: int, hi: int) -> list[int]:
    """Equal numbers of every integer size in ``lo..hi``, dealt cyclically (1, 2, .., hi, 1, 2, ..)."""
    levels = hi - lo + 1
    if levels < 1:
        raise ValueError(f"empty size range {lo}..{hi}")
    if count % levels:
        raise ValueError(f"{count} tasks cannot be split equally over {levels} sizes")
    return [lo + i % levels for i in range(count)]


def _int(doc: dict, key: str, where: str, default: Any = None, minimum: int | None = None) -> int:
    if key not in doc:
        if default is None:
            raise ScenarioError(where, f"missing field {key!r}")
        return default
    val = doc[key]
    if isinstance(val, bool) or not isinstance(val, int):
        raise ScenarioError(f"{where}.{key}", f"expected an integer, got {val!r}")
    if minimum is not None and val < minimum:
        raise ScenarioError(f"{where}.{key}", f"must be >= {minimum}, got {val}")
    return val


def _list(doc: dict, key: str, where: str, required: bool = True) -> list:
    val = doc.get(key)
    if val is None:
        if required:
            raise ScenarioError(where, f"missing list {key!r}")
        return []
    if not isinstance(val, list):
        raise ScenarioError(f"{where}.{key}", "expected a list")
    return val


def scenario_from_dict(doc: Any, source: str = "<scenario>") -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError(source, "top level must be an object")

    apps = []
    for i, a in enumerate(_list(doc, "applications", source)):
        where = f"{source}: applications[{i}]"
        if isinstance(a, str):
            a = {"name": a}
        if not isinstance(a, dict) or not isinstance(a.get("name"), str):
            raise ScenarioError(where, "expected an object with a string 'name'")
        apps.append(Application(i, a["name"]))
    by_name = {a.name: a.id for a in apps}
    if len(by_name) != len(apps):
        raise ScenarioError(f"{source}: applications", "application names must be unique")

    types = []
    for i, it in enumerate(_list(doc, "instance_types", source)):
        where = f"{source}: instance_types[{i}]"
        if not isinstance(it, dict):
            raise ScenarioError(where, "expected an object")
        perf = it.get("perf")
        if not isinstance(perf, list) or not all(isinstance(p, int) and not isinstance(p, bool) for p in perf):
            raise ScenarioError(f"{where}.perf", "expected a list of integers")
        if len(perf) != len(apps):
            raise ScenarioError(f"{where}.perf", f"{len(perf)} entries for {len(apps)} applications")
        name = it.get("name", f"it{i + 1}")
        types.append(InstanceType(i, str(name), _int(it, "cost_per_hour", where), tuple(perf)))

    def app_ref(ref: Any, where: str) -> int:
        if isinstance(ref, str) and ref in by_name:
            return by_name[ref]
        if isinstance(ref, int) and not isinstance(ref, bool) and 0 <= ref < len(apps):
            return ref
        raise ScenarioError(where, f"unknown application {ref!r}")

    tasks: list[Task] = []
    for i, wl in enumerate(_list(doc, "workload", source, required=False)):
        where = f"{source}: workload[{i}]"
        if not isinstance(wl, dict):
            raise ScenarioError(where, "expected an object")
        app_id = app_ref(wl.get("app"), f"{where}.app")
        count = _int(wl, "count", where, minimum=0)
        sizes = wl.get("sizes", "uniform-levels(1, 1)")
        m = _LEVELS.match(sizes) if isinstance(sizes, str) else None
        if m is None:
            raise ScenarioError(f"{where}.sizes", f"expected 'uniform-levels(lo, hi)', got {sizes!r}")
        try:
            drawn = uniform_levels(count, int(m.group(1)), int(m.group(2)))
        except ValueError as e:
            raise ScenarioError(f"{where}.sizes", str(e)) from None
        base = len(tasks)
        tasks.extend(Task(base + k, app_id, size) for k, size in enumerate(drawn))
    for i, t in enumerate(_list(doc, "tasks", source, required=False)):
        where = f"{source}: tasks[{i}]"
        if not isinstance(t, dict):
            raise ScenarioError(where, "expected an object")
        tasks.append(Task(len(tasks), app_ref(t.get("app"), f"{where}.app"), _int(t, "size", where)))

    defaults = doc.get("defaults", {})
    if not isinstance(defaults, dict):
        raise ScenarioError(f"{source}: defaults", "expected an object")
    s = Scenario(
        tuple(apps),
        tuple(tasks),
        tuple(types),
        budget=_int(doc, "budget", source, default=0),
        startup_overhead_s=_int(defaults, "startup_overhead_s", f"{source}: defaults", default=0),
        billing_quantum_s=_int(defaults, "billing_quantum_s", f"{source}: defaults", default=3600),
    )
    verdict = validate_scenario(s)
    if not verdict.ok:
        v = verdict.violations[0]
        if v.kind == "duplicate-type":
            a, b = v.ids
            where = f"{source}: instance_types[{a}] and instance_types[{b}]"
            msg = f"{types[a].name!r} and {types[b].name!r} have the same performance and cost"
        elif v.kind in ("cost", "perf", "perf-length"):
            where, msg = f"{source}: instance_types[{v.ids[0]}]", v.detail
        elif v.kind in ("size", "app-ref"):
            where, msg = f"{source}: task {v.ids[0]}", v.detail
        else:
            where, msg = source, str(v)
        extra = len(verdict.violations) - 1
        raise ScenarioError(where, msg + (f" (+{extra} more)" if extra else ""))
    return s


def load_scenario(path: str | Path) -> Scenario:
    """Load a scenario file, or a bundled fixture by name (see ``FIXTURES``)."""
    key = str(path)
    if key in FIXTURES and not Path(key).exists():
        text = resources.files("botsched.fixtures").joinpath(f"{key}.json").read_text()
        source = f"fixture:{key}"
    else:
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise ScenarioError(key, f"cannot read file ({e.strerror})") from None
        source = key
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{source}:{e.lineno}:{e.colno}", e.msg) from None
    return scenario_from_dict(doc, source)


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "applications": [{"name": a.name} for a in s.applications],
        "instance_types": [
            {"name": it.name, "cost_per_hour": it.cost_per_hour, "perf": list(it.perf)}
            for it in s.instance_types
        ],
        "tasks": [{"app": t.app_id, "size": t.size} for t in s.tasks],
        "budget": s.budget,
        "defaults": {"startup_overhead_s": s.startup_overhead_s, "billing_quantum_s": s.billing_quantum_s},
    }
