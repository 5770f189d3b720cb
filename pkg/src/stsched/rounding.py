"""From a feasible MILP solution to a concrete schedule.

Stages, in order: rigid assignment of configurations, large jobs and long
containers; greedy assignment of medium jobs and short containers; small-job
slots; the interval LP that fixes how many tiny jobs each block receives;
repair of the fractional tiny assignment; Best-Fit rounding; layout.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Mapping, Optional, Sequence

import gmpy2

from .containers import Container, Pool
from .lp import LinearProgram, solve_lp
from .milp import MilpSolution, _windows
from .model import ClassifiedInstance, Eps, JobClass
from .schedule import Schedule, ScheduledJob, check_time_constraint, makespan

ZERO = Fraction(0)


class RoundingError(RuntimeError):
    """A stage met a state its preconditions rule out."""


@dataclass
class Occurrence:
    container_index: int
    container: Container
    load: Fraction
    short: bool
    small: dict = field(default_factory=dict)  # block -> [job ids]
    tiny: dict = field(default_factory=dict)  # block -> [job ids]


@dataclass
class MachinePlan:
    machine: int
    config_index: int
    occurrences: list = field(default_factory=list)
    medium: list = field(default_factory=list)
    large: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "machine": self.machine,
            "configuration": self.config_index,
            "containers": [
                {"index": o.container_index, "load": str(o.load), "kind": "short" if o.short else "long",
                 "small": {str(k): v for k, v in o.small.items()},
                 "tiny": {str(k): v for k, v in o.tiny.items()}}
                for o in self.occurrences
            ],
            "medium": self.medium,
            "large": self.large,
        }


@dataclass(frozen=True)
class UniversalBlock:
    machine: int
    k: int
    occurrence: tuple[int, int]  # (machine, position in its occurrence list)
    omega: Fraction
    omega_p: Optional[int] = None


def assign_rigid(sol: MilpSolution, pool: Pool, ci: ClassifiedInstance, m: int) -> list[MachinePlan]:
    """One configuration per machine, then large jobs and long containers
    into the slots the configurations provide."""
    plans = []
    for c in sorted(sol.v):
        for _ in range(sol.v[c]):
            plans.append(MachinePlan(len(plans), c))
    if len(plans) != m:
        raise RoundingError(f"configuration counts sum to {len(plans)}, expected {m}")
    confs = pool.configurations

    by_size: dict[Fraction, list[str]] = {}
    for j in sorted(ci.jobs_of(JobClass.LARGE)):
        by_size.setdefault(ci.sizes[j], []).append(j)
    for li, l in enumerate(pool.large_sizes):
        queue = by_size.pop(l, [])
        for p in plans:
            g = confs[p.config_index].gamma[li]
            p.large.extend(queue[:g])
            queue = queue[g:]
        if queue or sum(confs[p.config_index].gamma[li] for p in plans) != sum(
                1 for j in ci.jobs_of(JobClass.LARGE) if ci.sizes[j] == l):
            raise RoundingError(f"large jobs of size {l} do not match the configuration slots")
    if by_size:
        raise RoundingError("large jobs of a size missing from the pool")

    for l in pool.long_classes:
        queue = [t for t in sorted(sol.w) for _ in range(sol.w[t])
                 if not pool.is_short(pool.containers[t]) and pool.load(pool.containers[t]).rounded == l]
        for p in plans:
            a = confs[p.config_index].alpha_of(l)
            if a > len(queue):
                raise RoundingError(f"too few long containers of rounded load {l}")
            for t in queue[:a]:
                p.occurrences.append(_occurrence(pool, t))
            queue = queue[a:]
        if queue:
            raise RoundingError(f"long containers of rounded load {l} left over")
    return plans


def _occurrence(pool: Pool, t: int) -> Occurrence:
    cont = pool.containers[t]
    return Occurrence(t, cont, pool.load(cont).load, pool.is_short(cont))


def assign_flexible_greedy(items: Sequence[tuple[Hashable, Fraction]], budgets: Sequence[Fraction],
                           slack: Fraction) -> list[list]:
    """Sequential first fit: fill the current machine until it reaches its
    budget (the last item may overflow it), then move on."""
    out: list[list] = [[] for _ in budgets]
    loads = [ZERO] * len(budgets)
    i = 0
    for key, size in items:
        while i < len(budgets) and loads[i] >= budgets[i]:
            i += 1
        if i == len(budgets):
            raise RoundingError(f"item {key!r} left over: budgets exhausted")
        out[i].append(key)
        loads[i] += size
        if loads[i] > budgets[i] + slack:
            raise RoundingError(f"item {key!r} overflows machine {i} beyond the slack")
    return out


def assign_flexible(plans: list[MachinePlan], sol: MilpSolution, pool: Pool, ci: ClassifiedInstance) -> None:
    eps, C = pool.eps, pool.c_nice
    unit = eps.sq * C
    slack = unit + eps.value * C
    confs = pool.configurations
    medium = [(j, ci.sizes[j]) for j in sorted(ci.jobs_of(JobClass.MEDIUM))]
    if medium:
        budgets = [confs[p.config_index].delta_p * (confs[p.config_index].delta + 1) * unit for p in plans]
        for p, jobs in zip(plans, assign_flexible_greedy(medium, budgets, slack)):
            p.medium.extend(jobs)
    shorts = [(t, pool.load(pool.containers[t]).load) for t in sorted(sol.w)
              for _ in range(sol.w[t]) if pool.is_short(pool.containers[t])]
    if shorts:
        budgets = [confs[p.config_index].beta_p * (confs[p.config_index].beta + 1) * unit for p in plans]
        for p, ts in zip(plans, assign_flexible_greedy(shorts, budgets, slack)):
            p.occurrences.extend(_occurrence(pool, t) for t in ts)


def assign_small_jobs(plans: list[MachinePlan], pool: Pool, ci: ClassifiedInstance) -> None:
    queues: dict[Fraction, list[str]] = {}
    for j in sorted(ci.jobs_of(JobClass.SMALL)):
        queues.setdefault(ci.sizes[j], []).append(j)
    for p in plans:
        for o in p.occurrences:
            for k, b in enumerate(o.container.blocks):
                for l, cnt in zip(pool.small_sizes, b.S):
                    if cnt:
                        q = queues.get(l, [])
                        if len(q) < cnt:
                            raise RoundingError(f"not enough small jobs of size {l}")
                        o.small.setdefault(k, []).extend(q[:cnt])
                        queues[l] = q[cnt:]
    if any(queues.values()):
        raise RoundingError("small jobs left without a slot")


def universal_blocks(plans: list[MachinePlan], sol: MilpSolution):
    """Blocks of chosen container occurrences that may hold tiny jobs, the
    per-occurrence share ``y / w_t`` of the tiny assignment, and the window
    rows ``(block positions, residual budget)``."""
    blocks: list[UniversalBlock] = []
    y_u: list[dict] = []
    index: dict[tuple, int] = {}
    by_block: dict[tuple[int, int], dict] = {}
    for (j, k, t), a in sol.y.items():
        if a:
            by_block.setdefault((k, t), {})[j] = a
    for p in plans:
        for pos, o in enumerate(p.occurrences):
            w = sol.w[o.container_index]
            for k, b in enumerate(o.container.blocks):
                if b.Tp:
                    share = {j: a / w for j, a in by_block.get((k, o.container_index), {}).items()}
                    index[(p.machine, pos, k)] = len(blocks)
                    blocks.append(UniversalBlock(p.machine, k, (p.machine, pos), sum(share.values(), ZERO)))
                    y_u.append(share)
    return blocks, y_u, index


def omega_windows(plans: list[MachinePlan], index: Mapping, B: int, eps: Eps) -> list[tuple[list[int], int]]:
    rows = []
    for p in plans:
        for pos, o in enumerate(p.occurrences):
            for i, window in _windows(o.container, eps):
                members = [index[(p.machine, pos, k)] for k in window if (p.machine, pos, k) in index]
                if not members:
                    continue
                fixed = sum(sum(o.container.blocks[k].S) for k in window) + o.container.blocks[i].P
                rows.append((members, B - fixed))
    return rows


def solve_omega_lp(omegas: Sequence[Fraction], windows: Sequence[tuple[Sequence[int], int]],
                   total: Optional[int] = None) -> list[int]:
    """Integral block counts between floor and ceiling of ``omegas`` that keep
    every window within its budget and sum to ``total``.

    The rows are intervals over the blocks in their listed order plus one
    all-ones row, so the matrix is totally unimodular and the vertex returned
    by the simplex is integral; that is asserted.
    """
    omegas = [Fraction(w) for w in omegas]
    total = sum(omegas, ZERO) if total is None else Fraction(total)
    lp = LinearProgram()
    for u, w in enumerate(omegas):
        lp.add_var(u, math.floor(w), math.ceil(w))
    for members, budget in windows:
        lp.add_row({u: 1 for u in members}, "<=", budget, "window")
    lp.add_row({u: 1 for u in range(len(omegas))}, "=", total, "total")
    res = solve_lp(lp)
    if not res.feasible:
        raise RoundingError(f"block-count LP infeasible: {res.certificate}")
    out = []
    for u in range(len(omegas)):
        a = res.values[u]
        if a.denominator != 1:
            raise RoundingError("TU violation: fractional vertex")
        out.append(int(a))
    return out


def repair_tiny_fractional(y: Sequence[Mapping[str, Fraction]], omega: Sequence[Fraction],
                           omega_p: Sequence[int]) -> list[dict]:
    """Scale blocks rounded down, pool what they shed, and pour the pool into
    the blocks rounded up, in block order and job order."""
    out: list[dict] = []
    pool: list[list] = []  # [job, amount]
    up = []
    for u, (row, w, wp) in enumerate(zip(y, omega, omega_p)):
        if wp <= w:
            f = Fraction(wp) / w if w else ZERO
            new = {}
            for j in sorted(row):
                a = row[j]
                if a * f:
                    new[j] = a * f
                if a - a * f:
                    pool.append([j, a - a * f])
            out.append(new)
        else:
            out.append(dict(row))
            up.append(u)
    q = 0
    for u in up:
        need = Fraction(omega_p[u]) - omega[u]
        while need > 0:
            if q == len(pool):
                raise RoundingError("tiny pool exhausted before every block was filled")
            j, a = pool[q]
            take = min(a, need)
            out[u][j] = out[u].get(j, ZERO) + take
            need -= take
            pool[q][1] -= take
            if pool[q][1] == 0:
                q += 1
    if any(a for _, a in pool[q:]):
        raise RoundingError("tiny pool left over")
    return out


_MQ0 = gmpy2.mpq(0)


def _mq(x) -> "gmpy2.mpq":
    if not isinstance(x, (Fraction, int)):
        x = Fraction(x)
    return gmpy2.mpq(x.numerator, x.denominator)


def _fr(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


def best_fit_round(y: Mapping[str, Mapping[Hashable, Fraction]], capacities: Mapping[Hashable, int],
                   loads: Mapping[Hashable, Fraction], sizes: Mapping[str, Fraction]) -> dict:
    """Round a fractional assignment to an integral one with the exact
    per-block cardinalities and per-block load at most ``load + p_max``.

    Jobs are ordered by non-increasing size.  Block ``k``'s cumulative mass
    cuts the order into ``c_k`` consecutive slots of one unit each; a job may
    take a slot whose interval contains it.  The intervals admit a perfect
    matching (the fractional one), found by an earliest-deadline sweep.
    Runs in ``O(n log n)`` plus the size of ``y``.
    """
    msize = {j: _mq(sizes[j]) for j in y}
    order = sorted(y, key=lambda j: (-msize[j], j))
    cols: dict[Hashable, list] = {}
    for i, j in enumerate(order):
        tot = _MQ0
        for k, a in y[j].items():
            q = _mq(a)
            if q < 0:
                raise ValueError(f"job {j!r}: negative fraction in block {k!r}")
            if q:
                tot += q
                cols.setdefault(k, []).append((i, q))
        if tot != 1:
            raise ValueError(f"job {j!r}: fractions sum to {_fr(tot)}, not 1")
    for k in cols:
        if k not in capacities:
            raise ValueError(f"block {k!r} has no capacity")
    slots = []  # (first job, last job, block)
    for k, c in capacities.items():
        col = sorted(cols.get(k, []))
        mass = sum((a for _, a in col), _MQ0)
        if mass != c:
            raise ValueError(f"block {k!r}: fractions sum to {_fr(mass)}, capacity is {c}")
        load = sum((msize[order[i]] * a for i, a in col), _MQ0)
        if load > _mq(loads[k]):
            raise ValueError(f"block {k!r}: fractional load {_fr(load)} exceeds {loads[k]}")
        acc = _MQ0
        s = 1
        first = None
        for i, a in col:
            if first is None:
                first = i
            acc += a
            while s <= c and acc >= s:
                slots.append((first, i, k))
                s += 1
                first = i if acc > s - 1 else None
    if len(slots) != len(order):
        raise ValueError("capacities do not sum to the number of jobs")
    slots.sort()
    heap: list = []
    out = {}
    q = 0
    for i, j in enumerate(order):
        while q < len(slots) and slots[q][0] <= i:
            heapq.heappush(heap, (slots[q][1], q, slots[q][2]))
            q += 1
        if not heap:
            raise ValueError(f"no slot available for job {j!r}")
        last, _, k = heapq.heappop(heap)
        if last < i:
            raise ValueError(f"slot of block {k!r} expired before job {j!r}")
        out[j] = k
    return out


def assign_tiny_jobs(plans: list[MachinePlan], sol: MilpSolution, pool: Pool, ci: ClassifiedInstance) -> None:
    tiny = ci.jobs_of(JobClass.TINY)
    if not tiny:
        return
    blocks, y_u, index = universal_blocks(plans, sol)
    omegas = [b.omega for b in blocks]
    windows = omega_windows(plans, index, ci.B, pool.eps)
    omega_p = solve_omega_lp(omegas, windows, len(tiny))
    y_p = repair_tiny_fractional(y_u, omegas, omega_p)
    y_jobs: dict[str, dict] = {j: {} for j in tiny}
    for u, row in enumerate(y_p):
        for j, a in row.items():
            if a:
                y_jobs[j][u] = y_jobs[j].get(u, ZERO) + a
    caps = {u: omega_p[u] for u in range(len(blocks))}
    loads = {u: sum((ci.sizes[j] * a for j, a in y_p[u].items()), ZERO) for u in range(len(blocks))}
    chosen = best_fit_round(y_jobs, caps, loads, ci.sizes)
    for j in sorted(chosen):
        b = blocks[chosen[j]]
        machine, pos = b.occurrence
        plans[machine].occurrences[pos].tiny.setdefault(b.k, []).append(j)


def _layout_container(o: Occurrence, origin: Fraction, sizes: Mapping[str, Fraction], eps: Eps,
                      small_sizes: Sequence[Fraction]) -> tuple[list[tuple[str, Fraction]], Fraction]:
    """Place one container from ``origin``; returns the starts and the time
    its unit idle begins."""
    e, e2 = eps.value, eps.sq
    blocks = o.container.blocks
    starts = []
    b_k = origin
    prev_end = origin
    for k, b in enumerate(blocks):
        anchor = max(b_k, prev_end)
        t = anchor + b.D * e2
        items = sorted(o.tiny.get(k, []), key=lambda j: (sizes[j], j)) + \
            sorted(o.small.get(k, []), key=lambda j: (sizes[j], j))
        last_start = None
        for j in items:
            starts.append((j, t))
            last_start = t
            t += sizes[j]
        if items:
            prev_end = t
        nxt = b_k + e
        stretched = last_start is not None and last_start >= nxt
        if k + 1 < len(blocks):
            declared = blocks[k + 1].P
            if stretched or (not declared and prev_end > nxt):
                nxt = max(nxt, prev_end)
        b_k = nxt
    return starts, max(b_k, prev_end)


def materialize_schedule(plans: list[MachinePlan], ci: ClassifiedInstance, eps: Eps, c_nice,
                         small_sizes: Sequence[Fraction] = ()) -> Schedule:
    """Lay every machine out: containers in non-decreasing load, each followed
    by a unit of idle, then medium and large jobs by non-decreasing size."""
    c_nice = Fraction(c_nice)
    sizes = ci.sizes
    out = []
    for p in plans:
        t = ZERO
        placed_container = False
        for o in sorted(p.occurrences, key=lambda o: (o.load, o.container_index)):
            if not o.small and not o.tiny:
                continue
            starts, end = _layout_container(o, t, sizes, eps, small_sizes)
            out.extend(ScheduledJob(j, p.machine, s, sizes[j]) for j, s in starts)
            t = end + 1
            placed_container = True
        if not placed_container:
            t = ZERO
        for j in sorted(p.medium + p.large, key=lambda j: (sizes[j], j)):
            out.append(ScheduledJob(j, p.machine, t, sizes[j]))
            t += sizes[j]
    s = Schedule(tuple(sorted(out, key=lambda a: (a.machine, a.start, a.id))))
    v = check_time_constraint(s, ci.B)
    if not v.ok:
        raise RoundingError(f"rounded schedule violates the time constraint: {v.witness}")
    bound = (1 + 10 * eps.value) * c_nice
    if makespan(s) > bound:
        raise RoundingError(f"rounded makespan {makespan(s)} exceeds (1+10eps)*C_nice = {bound}")
    return s


def build_plan(sol: MilpSolution, pool: Pool, ci: ClassifiedInstance, machines: Optional[int] = None):
    m = ci.machines if machines is None else machines
    plans = assign_rigid(sol, pool, ci, m)
    assign_flexible(plans, sol, pool, ci)
    assign_small_jobs(plans, pool, ci)
    assign_tiny_jobs(plans, sol, pool, ci)
    return plans


def round_milp_to_schedule(sol: MilpSolution, pool: Pool, ci: ClassifiedInstance, eps: Eps, c_nice,
                           machines: Optional[int] = None) -> Schedule:
    plans = build_plan(sol, pool, ci, machines)
    return materialize_schedule(plans, ci, eps, c_nice, pool.small_sizes)
