"""Conversion of a feasible schedule into a nice schedule.

The five passes run per machine on ``(id, start, size)`` triples.  Idle is
inserted at a set of positions simultaneously: a job starting at ``s`` is
delayed by the amount times the number of insertion positions ``<= s``.
"""

from __future__ import annotations

import bisect
import math
from fractions import Fraction
from typing import Iterable

from .model import ClassifiedInstance, Eps, RoundedInstance
from .schedule import Schedule, ScheduledJob, check_time_constraint

Row = tuple[str, Fraction, Fraction]  # id, start, size


def _insert(rows: list[Row], positions: Iterable[Fraction], amount: Fraction) -> list[Row]:
    pos = sorted(set(positions))
    return [(jid, s + amount * bisect.bisect_right(pos, s), p) for jid, s, p in rows]


def _insertion_points(rows: list[Row], points: Iterable[Fraction]) -> set[Fraction]:
    """Where to put idle for each time point: at the point itself when it is
    free, otherwise at both ends (``both``) or the end of the job running
    across it."""
    out = set()
    for t in points:
        for jid, s, p in rows:
            if s < t < s + p:
                out.add((s, s + p))
                break
        else:
            out.add((t, None))
    return out


def _step_integer_points(rows: list[Row], eps: Eps) -> list[Row]:
    if not rows:
        return rows
    load = max(s + p for _, s, p in rows)
    points = [Fraction(t) for t in range(1, math.ceil(load))]
    positions = set()
    for a, b in _insertion_points(rows, points):
        positions.add(a)
        if b is not None:
            positions.add(b)
    return _insert(rows, positions, 2 * eps.value)


def _step_pull_big(rows: list[Row], big: set[str], eps: Eps) -> list[Row]:
    bigs = [r for r in rows if r[0] in big]
    if not bigs:
        return rows
    positions = set()
    for _, s, p in bigs:
        positions.update((s, s + p))
    rows = _insert(rows, positions, Fraction(2))
    bigs = [r for r in rows if r[0] in big]
    prefix = []
    for jid, s, p in rows:
        if jid in big:
            continue
        removed = sum((bp for _, bs, bp in bigs if bs < s), Fraction(0))
        prefix.append((jid, s - removed, p))
    # a gap of 1 + eps keeps every unit window from meeting both parts
    t = max((s + p for _, s, p in prefix), default=None)
    t = Fraction(0) if t is None else t + 1 + eps.value
    tail = []
    for jid, _, p in sorted(bigs, key=lambda r: (r[2], r[0])):
        tail.append((jid, t, p))
        t += p
    return prefix + tail


def _step_long_points(rows: list[Row], eps: Eps) -> list[Row]:
    if not rows:
        return rows
    load = max(s + p for _, s, p in rows)
    spacing = eps.inv - eps.value
    points = []
    t = spacing
    while t < load:
        points.append(t)
        t += spacing
    positions = {b if b is not None else a for a, b in _insertion_points(rows, points)}
    return _insert(rows, positions, Fraction(2))


def _step_blocks(rows: list[Row], eps: Eps) -> list[Row]:
    if not rows:
        return rows
    e = eps.value
    groups: dict[int, list[Row]] = {}
    for r in rows:
        groups.setdefault(math.floor(r[1] * eps.inv), []).append(r)
    last = max(groups)
    out = []
    for k, grp in sorted(groups.items()):
        end = max(s + p for _, s, p in grp)
        if k != last:
            end = max(end, (k + 1) * e)
        t = end - sum(p for _, _, p in grp)
        for jid, _, p in sorted(grp, key=lambda r: (r[2], r[0])):
            out.append((jid, t, p))
            t += p
    return out


def nice_machine(rows: list[Row], big: set[str], eps: Eps) -> list[Row]:
    rows = sorted(rows, key=lambda r: (r[1], r[0]))
    rows = _step_integer_points(rows, eps)
    rows = _step_pull_big(rows, big, eps)
    rows = _step_long_points(sorted(rows, key=lambda r: (r[1], r[0])), eps)
    return _step_blocks(rows, eps)


def to_nice(s: Schedule, ci: ClassifiedInstance, eps: Eps, B: int) -> Schedule:
    """Convert a time-feasible schedule of rounded jobs into a nice one.

    Each machine keeps its jobs; its load grows by at most ``17 * eps`` times
    the original load.
    """
    try:
        ok = check_time_constraint(s, B).ok
    except ValueError:
        ok = False
    if not ok:
        raise ValueError("input violates time constraint")
    big = {jid for jid, c in ci.class_of.items() if c.rank > 0}
    out = []
    for i, seq in sorted(s.by_machine().items()):
        rows = nice_machine([(a.id, a.start, a.size) for a in seq], big, eps)
        out.extend(ScheduledJob(jid, i, st, p) for jid, st, p in rows)
    return Schedule(tuple(sorted(out, key=lambda a: (a.machine, a.start, a.id))))


def stretch(s: Schedule, ri: RoundedInstance, eps: Eps) -> Schedule:
    """Rounded sizes with every start scaled by ``1 + eps``.

    A feasible schedule of the original jobs stays feasible, since each
    rounded job ends before the scaled start of its successor.
    """
    f = 1 + eps.value
    return Schedule(tuple(ScheduledJob(a.id, a.machine, a.start * f, ri.rounded_sizes[a.id]) for a in s))
