"""JSON instance and schedule files.

Instance: ``{"b": 2, "machines": 1, "epsilon": "1/4", "jobs": [{"id": "a",
"size": "1/2"}, ...]}``.  Schedule: ``[{"id": "a", "machine": 0, "start":
"0"}, ...]``.  Rationals are written as strings; numbers are accepted too.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Optional

from .model import Eps, Instance, Job, as_fraction
from .schedule import Schedule, schedule_from_starts


class FormatError(ValueError):
    """Malformed input file."""


def _frac(value: Any, what: str) -> Fraction:
    if isinstance(value, bool):
        raise FormatError(f"{what}: expected a number, got {value!r}")
    try:
        return as_fraction(value)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise FormatError(f"{what}: {exc}") from None


def instance_from_json(data: Any) -> tuple[Instance, Optional[Eps]]:
    if not isinstance(data, dict):
        raise FormatError("instance must be a JSON object")
    for key in ("b", "machines", "jobs"):
        if key not in data:
            raise FormatError(f"instance lacks {key!r}")
    if not isinstance(data["jobs"], list):
        raise FormatError("'jobs' must be a list")
    jobs = []
    for k, j in enumerate(data["jobs"]):
        if not isinstance(j, dict) or "id" not in j or "size" not in j:
            raise FormatError(f"job #{k} needs 'id' and 'size'")
        jobs.append((str(j["id"]), _frac(j["size"], f"job {j['id']!r} size")))
    b, m = data["b"], data["machines"]
    if not isinstance(b, int) or not isinstance(m, int) or isinstance(b, bool) or isinstance(m, bool):
        raise FormatError("'b' and 'machines' must be integers")
    try:
        inst = Instance(tuple(Job(i, p) for i, p in jobs), m, b)
        eps = Eps.parse(data["epsilon"]) if data.get("epsilon") is not None else None
    except ValueError as exc:
        raise FormatError(str(exc)) from None
    return inst, eps


def instance_to_json(inst: Instance, eps: Optional[Eps] = None) -> dict:
    out = {"b": inst.B, "machines": inst.machines,
           "jobs": [{"id": j.id, "size": str(j.size)} for j in inst.jobs]}
    if eps is not None:
        out["epsilon"] = str(eps.value)
    return out


def schedule_from_json(data: Any, inst: Instance) -> Schedule:
    if not isinstance(data, list):
        raise FormatError("schedule must be a JSON list")
    rows = []
    for k, r in enumerate(data):
        if not isinstance(r, dict) or not {"id", "machine", "start"} <= set(r):
            raise FormatError(f"entry #{k} needs 'id', 'machine' and 'start'")
        machine = r["machine"]
        if not isinstance(machine, int) or isinstance(machine, bool) or not 0 <= machine < inst.machines:
            raise FormatError(f"entry #{k}: machine {machine!r} out of range")
        rows.append((str(r["id"]), machine, _frac(r["start"], f"entry #{k} start")))
    try:
        s = schedule_from_starts(inst, rows)
    except ValueError as exc:
        raise FormatError(str(exc)) from None
    if not s.covers(inst):
        raise FormatError("schedule does not place every job exactly once")
    return s


def schedule_to_json(s: Schedule) -> list:
    return [{"id": a.id, "machine": a.machine, "start": str(a.start)}
            for a in sorted(s, key=lambda a: (a.machine, a.start, a.id))]


def load_json(path: str) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror}") from None
