"""Greedy start times, List Scheduling, LPT and an exhaustive oracle.

For a fixed job order on one machine, the ``B + 1`` consecutive jobs
``a .. a+B`` share a unit window iff ``start[a+B] < end[a] + 1``.  Starting
each job at ``max(end[i-1], end[i-B] + 1)`` is therefore the componentwise
earliest feasible start vector, so it minimises the makespan of the order.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .model import Instance, as_fraction
from .schedule import Schedule, ScheduledJob


def next_start(ends: Sequence[Fraction], B: int) -> Fraction:
    """Earliest start for a job appended after ``ends`` on one machine."""
    i = len(ends)
    s = ends[-1] if ends else Fraction(0)
    if i >= B:
        s = max(s, ends[i - B] + 1)
    return s


def earliest_start_times(sizes: Sequence, B: int) -> list[Fraction]:
    if B < 2:
        raise ValueError("B must be at least 2")
    starts, ends = [], []
    for p in sizes:
        s = next_start(ends, B)
        starts.append(s)
        ends.append(s + as_fraction(p))
    return starts


def sequence_makespan(sizes: Sequence[Fraction], B: int) -> Fraction:
    starts = earliest_start_times(sizes, B)
    return starts[-1] + sizes[-1] if sizes else Fraction(0)


def _greedy(inst: Instance, order) -> Schedule:
    ends: list[list[Fraction]] = [[] for _ in range(inst.machines)]
    out = []
    for job in order:
        best_i, best_s = 0, None
        for i in range(inst.machines):
            s = next_start(ends[i], inst.B)
            if best_s is None or s < best_s:
                best_i, best_s = i, s
        ends[best_i].append(best_s + job.size)
        out.append(ScheduledJob(job.id, best_i, best_s, job.size))
    return Schedule(tuple(out))


def list_scheduling(inst: Instance) -> Schedule:
    return _greedy(inst, inst.jobs)


def lpt(inst: Instance) -> Schedule:
    return _greedy(inst, sorted(inst.jobs, key=lambda j: (-j.size, j.id)))


@dataclass(frozen=True)
class OracleCaps:
    max_jobs: int = 8
    max_machines: int = 4
    time_budget: float = 120.0

    def __post_init__(self) -> None:
        if self.max_jobs <= 0 or self.max_machines <= 0 or self.time_budget <= 0:
            raise ValueError("oracle caps must be positive")


def brute_force_opt(inst: Instance, caps: OracleCaps = OracleCaps()) -> tuple[Schedule, Fraction]:
    """Exact optimum by enumerating machine partitions and per-machine orders."""
    if inst.n > caps.max_jobs or inst.machines > caps.max_machines:
        raise ValueError("instance too large for oracle")
    if inst.n == 0:
        return Schedule(()), Fraction(0)
    deadline = time.monotonic() + caps.time_budget
    jobs = list(inst.jobs)
    B = inst.B

    @lru_cache(maxsize=None)
    def best_order(subset: frozenset) -> tuple[Fraction, tuple[int, ...]]:
        idx = sorted(subset)
        best = (None, ())
        seen = set()
        for perm in itertools.permutations(idx):
            key = tuple(jobs[k].size for k in perm)
            if key in seen:
                continue
            seen.add(key)
            c = sequence_makespan(list(key), B)
            if best[0] is None or c < best[0]:
                best = (c, perm)
        return best

    best_val, best_parts = None, None
    # canonical labelling: job k may open at most one new machine
    def assign(k: int, parts: list[list[int]]):
        nonlocal best_val, best_parts
        if time.monotonic() > deadline:
            raise TimeoutError("oracle time budget exceeded")
        if k == len(jobs):
            val = max(best_order(frozenset(p))[0] for p in parts)
            if best_val is None or val < best_val:
                best_val, best_parts = val, [list(p) for p in parts]
            return
        for p in parts:
            p.append(k)
            assign(k + 1, parts)
            p.pop()
        if len(parts) < inst.machines:
            parts.append([k])
            assign(k + 1, parts)
            parts.pop()

    assign(0, [])
    out = []
    for i, part in enumerate(best_parts):
        _, perm = best_order(frozenset(part))
        starts = earliest_start_times([jobs[k].size for k in perm], B)
        out.extend(ScheduledJob(jobs[k].id, i, s, jobs[k].size) for k, s in zip(perm, starts))
    return Schedule(tuple(out)), best_val
