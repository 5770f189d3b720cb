"""Schedules, makespan and the feasibility validators.

Windows are half-open: a job occupying ``[s, e)`` meets the window
``[a, a + len)`` iff ``s < a + len`` and ``a < e``.  Jobs on one machine are
ordered by start, so the jobs meeting any window form a consecutive run and
``B + 1`` jobs share a window of length ``len`` iff the first and the last of
some run of ``B + 1`` consecutive jobs do.  All checks use that reduction.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Optional

from .model import ClassifiedInstance, Eps, Instance, as_fraction


@dataclass(frozen=True)
class ScheduledJob:
    id: str
    machine: int
    start: Fraction
    size: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "start", as_fraction(self.start))
        object.__setattr__(self, "size", as_fraction(self.size))
        if self.start < 0:
            raise ValueError(f"job {self.id!r} starts before time 0")

    @property
    def end(self) -> Fraction:
        return self.start + self.size


@dataclass(frozen=True)
class Schedule:
    assignments: tuple[ScheduledJob, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "assignments", tuple(self.assignments))

    def __len__(self) -> int:
        return len(self.assignments)

    def __iter__(self):
        return iter(self.assignments)

    def machines(self) -> list[int]:
        return sorted({a.machine for a in self.assignments})

    def on_machine(self, machine: int) -> list[ScheduledJob]:
        return sorted((a for a in self.assignments if a.machine == machine), key=lambda a: (a.start, a.id))

    def by_machine(self) -> dict[int, list[ScheduledJob]]:
        out: dict[int, list[ScheduledJob]] = defaultdict(list)
        for a in self.assignments:
            out[a.machine].append(a)
        for seq in out.values():
            seq.sort(key=lambda a: (a.start, a.id))
        return dict(out)

    def loads(self) -> dict[int, Fraction]:
        """Finishing time of the last job on every used machine."""
        return {i: max(a.end for a in seq) for i, seq in self.by_machine().items()}

    def job(self, jid: str) -> ScheduledJob:
        for a in self.assignments:
            if a.id == jid:
                return a
        raise KeyError(jid)

    def covers(self, inst: Instance) -> bool:
        ids = sorted(a.id for a in self.assignments)
        return ids == sorted(j.id for j in inst.jobs)


def schedule_from_starts(inst: Instance, rows: Iterable[tuple[str, int, Any]]) -> Schedule:
    """Build a schedule from ``(job id, machine, start)`` triples."""
    sizes = inst.size_of()
    out = []
    for jid, machine, start in rows:
        if jid not in sizes:
            raise ValueError(f"unknown job {jid!r}")
        out.append(ScheduledJob(jid, int(machine), as_fraction(start), sizes[jid]))
    return Schedule(tuple(out))


def makespan(s: Schedule) -> Fraction:
    return max((a.end for a in s.assignments), default=Fraction(0))


@dataclass(frozen=True)
class Verdict:
    ok: bool
    witness: Optional[dict] = None

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> dict:
        def enc(v):
            if isinstance(v, Fraction):
                return str(v)
            if isinstance(v, (list, tuple)):
                return [enc(x) for x in v]
            if isinstance(v, dict):
                return {k: enc(x) for k, x in v.items()}
            return v

        return {"ok": self.ok, "witness": enc(self.witness)}


OK = Verdict(True)


def _sequences(s: Schedule) -> dict[int, list[ScheduledJob]]:
    seqs = s.by_machine()
    for i, seq in seqs.items():
        for a, b in zip(seq, seq[1:]):
            if b.start < a.end:
                raise ValueError(f"not a schedule: jobs {a.id} and {b.id} overlap on machine {i}")
    return seqs


def is_schedule(s: Schedule) -> bool:
    try:
        _sequences(s)
    except ValueError:
        return False
    return True


def check_time_constraint(s: Schedule, B: int) -> Verdict:
    for i, seq in sorted(_sequences(s).items()):
        for a in range(len(seq) - B):
            first, last = seq[a], seq[a + B]
            if last.start < first.end + 1:
                # any alpha in (last.start - 1, first.end) works; report the left end clipped at 0
                alpha = max(Fraction(0), last.start - 1)
                return Verdict(False, {
                    "constraint": "time",
                    "machine": i,
                    "window": [alpha, alpha + 1],
                    "jobs": [x.id for x in seq[a:a + B + 1]],
                })
    return OK


def _grid_window_hit(first_end: Fraction, last_start: Fraction, eps: Eps) -> Optional[Fraction]:
    """Left end ``t*eps`` of an eps-aligned window of length ``1 + eps`` meeting both jobs, if any."""
    e = eps.value
    # need t*eps in the open interval (last_start - 1 - eps, first_end), t >= 0
    low = last_start - 1 - e
    t = max(0, math.floor(low / e) + 1)
    if t * e < first_end:
        return t * e
    return None


def check_modified_time_constraint(s: Schedule, B: int, eps: Eps) -> Verdict:
    for i, seq in sorted(_sequences(s).items()):
        for a in range(len(seq) - B):
            left = _grid_window_hit(seq[a].end, seq[a + B].start, eps)
            if left is not None:
                return Verdict(False, {
                    "constraint": "modified-time",
                    "machine": i,
                    "window": [left, left + 1 + eps.value],
                    "jobs": [x.id for x in seq[a:a + B + 1]],
                })
    return OK


@dataclass(frozen=True)
class EpsBlockView:
    machine: int
    index: int
    start: Fraction
    end: Fraction
    starters: tuple[str, ...]
    crossing_in: Optional[str]
    idle: Fraction


def _block_of(t: Fraction, eps: Eps) -> int:
    # a start exactly on a boundary belongs to the later block
    return math.floor(t * eps.inv)


def eps_blocks(s: Schedule, machine: int, eps: Eps) -> list[EpsBlockView]:
    seq = s.on_machine(machine)
    if not seq:
        return []
    e = eps.value
    horizon = max(a.end for a in seq)
    count = math.ceil(horizon * eps.inv)
    starters: dict[int, list[str]] = defaultdict(list)
    for a in seq:
        starters[_block_of(a.start, eps)].append(a.id)
    views = []
    for k in range(count):
        lo, hi = k * e, (k + 1) * e
        crossing = None
        busy = Fraction(0)
        for a in seq:
            if a.start < lo < a.end:
                crossing = a.id
            busy += max(Fraction(0), min(a.end, hi) - max(a.start, lo))
        views.append(EpsBlockView(machine, k, lo, hi, tuple(starters.get(k, ())), crossing, e - busy))
    return views


def check_nice(s: Schedule, ci: ClassifiedInstance, eps: Eps, B: int) -> Verdict:
    """The four niceness conditions, machine by machine."""
    seqs = _sequences(s)
    e = eps.value
    for i, seq in sorted(seqs.items()):
        ranks = [ci.class_of[a.id].rank for a in seq]
        for a, b, ra, rb in zip(seq, seq[1:], ranks, ranks[1:]):
            if rb < ra:
                return Verdict(False, {"condition": 1, "machine": i, "jobs": [a.id, b.id],
                                       "detail": "class order tiny/small, medium, large broken"})

        groups: dict[int, list[ScheduledJob]] = defaultdict(list)
        for a in seq:
            groups[_block_of(a.start, eps)].append(a)
        last_block = _block_of(seq[-1].start, eps)
        for k, grp in sorted(groups.items()):
            for a, b in zip(grp, grp[1:]):
                if b.start != a.end:
                    return Verdict(False, {"condition": 2, "machine": i, "block": k, "jobs": [a.id, b.id],
                                           "detail": "jobs starting in a block do not run back-to-back"})
                if b.size < a.size:
                    return Verdict(False, {"condition": 2, "machine": i, "block": k, "jobs": [a.id, b.id],
                                           "detail": "jobs starting in a block are not in non-decreasing size"})
            if k != last_block and grp[-1].end < (k + 1) * e:
                return Verdict(False, {"condition": 2, "machine": i, "block": k, "jobs": [grp[-1].id],
                                       "detail": "idle time after the jobs starting in the block"})

        gaps = [b.start - a.end for a, b in zip(seq, seq[1:])]
        for a in range(len(seq)):
            widest = Fraction(-1)
            for b in range(a + 1, len(seq)):
                widest = max(widest, gaps[b - 1])
                if seq[b].start - seq[a].start >= eps.inv and widest < 1:
                    return Verdict(False, {"condition": 3, "machine": i, "jobs": [seq[a].id, seq[b].id],
                                           "detail": "no unit idle between jobs whose starts differ by 1/eps"})

    v = check_modified_time_constraint(s, B, eps)
    if not v.ok:
        return Verdict(False, {"condition": 4, **v.witness})
    return OK
