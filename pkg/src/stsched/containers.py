"""Containers, configurations, their pruned enumeration, and extraction of a
MILP solution from a nice schedule.

A container is a run of eps-blocks holding tiny and small jobs.  Its
canonical partial schedule places, block by block, ``D*eps^2`` of idle after
the block start (or after the job still running into the block), then a
virtual job of length ``T*eps^2`` standing in for the tiny jobs, then the
small jobs in non-decreasing size.

Extraction measures the idle of a block from the *canonical* anchor rather
than from the real one.  This keeps the canonical layout less than ``eps^2`` (plus ``eps^2`` for the
floored tiny volume) behind the real schedule in every block instead of letting rounding errors drift
along chains of jobs crossing block boundaries; enumeration relies on that
bound (the fill rule of :func:`container_feasible`).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .model import ClassifiedInstance, Eps, JobClass, round_down_power
from .schedule import Schedule, ScheduledJob

ZERO = Fraction(0)


class EnumerationCapExceeded(RuntimeError):
    pass


@dataclass(frozen=True, order=True)
class BlockVec:
    S: tuple[int, ...]  # counts per small size, aligned with the pool's small sizes
    T: int = 0
    Tp: int = 0
    D: int = 0
    P: int = 0

    @property
    def starters(self) -> int:
        return sum(self.S) + self.Tp


@dataclass(frozen=True, order=True)
class Container:
    blocks: tuple[BlockVec, ...] = ()

    def __len__(self) -> int:
        return len(self.blocks)

    def small_count(self, l_index: int) -> int:
        return sum(b.S[l_index] for b in self.blocks)

    def to_json(self) -> list:
        return [{"S": list(b.S), "T": b.T, "Tp": b.Tp, "D": b.D, "P": b.P} for b in self.blocks]


@dataclass(frozen=True)
class ContainerLoad:
    load: Fraction
    rounded: Fraction
    short: bool

    @property
    def kind(self) -> str:
        return "short" if self.short else "long"


def raw_load(t: Container, eps: Eps, small_sizes: Sequence[Fraction]) -> Fraction:
    units = sum(b.D + b.T for b in t.blocks)
    counts = [sum(col) for col in zip(*(b.S for b in t.blocks))]
    return 1 + units * eps.sq + sum((l * c for l, c in zip(small_sizes, counts) if c), ZERO)


def container_load(t: Container, eps: Eps, c_nice, small_sizes: Sequence[Fraction]) -> ContainerLoad:
    L = raw_load(t, eps, small_sizes)
    return ContainerLoad(L, round_down_power(L, eps), L <= eps.value * Fraction(c_nice))


@dataclass
class BlockLayout:
    anchor: Fraction
    start: Fraction  # where the block's first starter begins (anchor + D eps^2)
    end: Fraction  # end of the last item placed so far on the container
    crossing_in: bool
    items: list  # (kind, size, start) for every starter


def canonical_layout(t: Container, eps: Eps, small_sizes: Sequence[Fraction]):
    """Lay the container out from time 0.

    Returns ``(layouts, reason)``; ``reason`` is ``None`` when the container
    is feasible in the structural sense (see :func:`container_feasible`).
    """
    e, e2 = eps.value, eps.sq
    prev_end = ZERO
    out = []
    last_starter_block = max((k for k, b in enumerate(t.blocks) if b.starters), default=-1)
    for k, b in enumerate(t.blocks):
        lo, hi = k * e, (k + 1) * e
        if len(b.S) != len(small_sizes):
            return out, f"block {k}: S has wrong length"
        if b.Tp not in (0, 1) or b.P not in (0, 1):
            return out, f"block {k}: indicator out of range"
        if b.Tp == 0 and b.T:
            return out, f"block {k}: T > 0 without tiny jobs"
        if not (0 <= b.T <= eps.inv and 0 <= b.D <= eps.inv) or min(b.S, default=0) < 0:
            return out, f"block {k}: component out of range"
        crossing = prev_end > lo
        if crossing and not b.P:
            return out, f"block {k}: job runs into the block but P=0"
        if b.P and not crossing:
            return out, f"block {k}: P=1 but nothing runs into the block"
        if k == 0 and b.P:
            return out, "block 0 must have P=0"
        anchor = max(lo, prev_end)
        start = anchor + b.D * e2
        items = []
        if b.starters:
            if start >= hi:
                return out, f"block {k}: starters cannot start inside the block"
            pos = start
            if b.Tp:
                items.append(("tiny", b.T * e2, pos))
                pos += b.T * e2
            for l, c in zip(small_sizes, b.S):
                for _ in range(c):
                    items.append(("small", l, pos))
                    pos += l
            if any(s >= hi for _, _, s in items):
                return out, f"block {k}: more than one job continues out of the block"
            prev_end = pos
            if k < last_starter_block and prev_end <= hi - (1 + b.Tp) * e2:
                return out, f"block {k}: block not filled (idle after its starters)"
        elif b.D and start > hi:
            return out, f"block {k}: idle does not fit in the block"
        out.append(BlockLayout(anchor, start, prev_end, crossing, items))
    if t.blocks:
        if not t.blocks[0].starters:
            return out, "first block has no starters"
        last = t.blocks[-1]
        if not last.starters and not last.P:
            return out, "last block is empty"
        if prev_end > len(t.blocks) * e:
            return out, "content runs past the last block"
    return out, None


def container_feasible(t: Container, eps: Eps, small_sizes: Sequence[Fraction] = ()) -> bool:
    """Feasibility of the canonical partial schedule.

    Every starter begins inside its block (so at most one job continues out of
    a block), ``P`` says exactly whether a job of the layout runs into the
    block, and every block before the last one with starters is filled to
    within ``eps^2`` of its end (``2 eps^2`` when it holds tiny jobs).
    """
    if not small_sizes and t.blocks:
        small_sizes = tuple(Fraction(0) for _ in t.blocks[0].S)
    return canonical_layout(t, eps, small_sizes)[1] is None


def window_counts_ok(t: Container, eps: Eps, B: int) -> bool:
    """Small starters plus tiny indicators plus P within every truncated
    (1/eps + 1)-block window stay within B."""
    K = len(t.blocks)
    for i in range(K):
        c = t.blocks[i].P + sum(t.blocks[k].starters for k in range(i, min(K, i + eps.inv + 1)))
        if c > B:
            return False
    return True


@dataclass(frozen=True, order=True)
class Configuration:
    alpha: tuple[tuple[Fraction, int], ...] = ()  # (rounded long load, count), nonzero only
    beta: int = 0
    beta_p: int = 0
    gamma: tuple[int, ...] = ()  # aligned with the large sizes
    delta: int = 0
    delta_p: int = 0

    def alpha_of(self, l: Fraction) -> int:
        return dict(self.alpha).get(l, 0)

    def load(self, eps: Eps, c_nice, large_sizes: Sequence[Fraction]) -> Fraction:
        c_nice = Fraction(c_nice)
        return (
            sum((l * a for l, a in self.alpha), ZERO)
            + (self.beta + self.delta) * eps.sq * c_nice
            + sum((l * g for l, g in zip(large_sizes, self.gamma)), ZERO)
        )

    def to_json(self) -> dict:
        return {
            "alpha": [[str(l), a] for l, a in self.alpha],
            "beta": self.beta, "beta_p": self.beta_p,
            "gamma": list(self.gamma), "delta": self.delta, "delta_p": self.delta_p,
        }


def load_bound(eps: Eps, c_nice) -> Fraction:
    c_nice = Fraction(c_nice)
    return max((1 + eps.value) * c_nice, c_nice + 1)


def configuration_feasible(c: Configuration, eps: Eps, c_nice, large_sizes: Sequence[Fraction]) -> bool:
    c_nice = Fraction(c_nice)
    if c.beta_p not in (0, 1) or c.delta_p not in (0, 1):
        return False
    if (c.beta and not c.beta_p) or (c.delta and not c.delta_p):
        return False
    if c.beta < 0 or c.delta < 0 or any(a <= 0 for _, a in c.alpha) or any(g < 0 for g in c.gamma):
        return False
    if len(c.gamma) != len(large_sizes):
        return False
    if any(l > c_nice + 1 for l, _ in c.alpha):
        return False
    if c_nice <= eps.inv:
        return (sum(a for _, a in c.alpha) == 1 and not c.beta and not c.beta_p
                and not any(c.gamma) and not c.delta and not c.delta_p)
    return c.load(eps, c_nice, large_sizes) <= load_bound(eps, c_nice)


@dataclass
class Pool:
    small_sizes: tuple[Fraction, ...]
    large_sizes: tuple[Fraction, ...]
    eps: Eps
    c_nice: Fraction
    containers: list[Container] = field(default_factory=list)
    configurations: list[Configuration] = field(default_factory=list)

    def __post_init__(self) -> None:
        self._loads: dict[Container, ContainerLoad] = {}

    def load(self, t: Container) -> ContainerLoad:
        got = self._loads.get(t)
        if got is None:
            got = self._loads[t] = container_load(t, self.eps, self.c_nice, self.small_sizes)
        return got

    def is_short(self, t: Container) -> bool:
        # with c_nice <= 1/eps every machine runs one container, counted as long
        return self.load(t).short and self.c_nice > self.eps.inv

    @property
    def long_classes(self) -> list[Fraction]:
        return sorted({self.load(t).rounded for t in self.containers if not self.is_short(t)})

    def long_containers(self) -> list[int]:
        return [i for i, t in enumerate(self.containers) if not self.is_short(t)]

    def short_containers(self) -> list[int]:
        return [i for i, t in enumerate(self.containers) if self.is_short(t)]

    def to_json(self) -> dict:
        return {
            "c_nice": str(self.c_nice),
            "small_sizes": [str(l) for l in self.small_sizes],
            "large_sizes": [str(l) for l in self.large_sizes],
            "containers": [
                {"blocks": t.to_json(), "load": str(self.load(t).load),
                 "kind": "short" if self.is_short(t) else "long"}
                for t in self.containers
            ],
            "configurations": [c.to_json() for c in self.configurations],
        }


@dataclass(frozen=True)
class EnumCaps:
    max_containers: int = 100_000
    max_configurations: int = 20000

    def __post_init__(self) -> None:
        if self.max_containers < 0 or self.max_configurations < 0:
            raise ValueError("caps must be non-negative")


def _cap_error() -> EnumerationCapExceeded:
    return EnumerationCapExceeded("container explosion: raise caps or shrink eps-regime")


def enumerate_containers(ci: ClassifiedInstance, eps: Eps, c_nice, caps: EnumCaps = EnumCaps(),
                         B: Optional[int] = None, machines: Optional[int] = None,
                         collapse: bool = False, self_check: bool = True) -> list[Container]:
    """All feasible containers the instance could fill, block by block.

    Pruning: small counts and tiny indicators never exceed the instance's
    jobs, tiny volume never exceeds the tiny total, loads stay within
    ``c_nice + 1``, every truncated window holds at most ``B`` starters, and
    (outside the ``c_nice <= 1/eps`` regime) a container never holds a unit of
    consecutive idle.  In that regime every machine runs exactly one
    container, so a container must carry all the job volume the other
    ``machines - 1`` containers cannot.

    With ``collapse`` a partial container is dropped when an earlier one
    reached the same state (position, used jobs, load, the blocks later
    windows still look at) with the same MILP signature so far; their
    completions then share signatures, so :func:`dedupe_containers` loses
    nothing.  In the ``c_nice <= 1/eps`` regime the signature ignores the
    load, so there the earlier state only has to carry no more load.
    """
    if caps.max_containers <= 0:
        raise _cap_error()
    c_nice = Fraction(c_nice)
    B = ci.B if B is None else B
    e, e2, inv = eps.value, eps.sq, eps.inv
    sizes = ci.small_sizes
    small_avail = tuple(ci.count_by_size(JobClass.SMALL).get(l, 0) for l in sizes)
    tiny_ids = ci.jobs_of(JobClass.TINY)
    tiny_total = sum((ci.sizes[j] for j in tiny_ids), ZERO)
    T_budget = math.floor(tiny_total / e2)
    whole = c_nice <= inv
    max_blocks = inv * inv
    max_idle_run = max_blocks if whole else inv - 1
    # positions and loads below are integers in units of 1/Q
    Q = math.lcm(e2.denominator, *(l.denominator for l in sizes))
    qe, qe2 = int(e * Q), int(e2 * Q)
    qsizes = [int(l * Q) for l in sizes]
    max_accounted = math.floor(c_nice * Q)  # load <= c_nice + 1
    m = ci.machines if machines is None else machines
    need = ZERO
    if whole:
        volume = sum(ci.sizes.values(), ZERO)
        need = volume - (m - 1) * (c_nice + len(tiny_ids) * e2)

    need_q = math.ceil(need * Q)

    def carried(used_S, used_Tp, used_T) -> int:
        # every tiny starter carries T + 1 units of eps^2
        return sum(l * c for l, c in zip(qsizes, used_S)) + (used_Tp + used_T) * qe2

    out: list[Container] = []
    if not small_avail or not any(small_avail):
        if not tiny_ids:
            return [Container(())]
    if need <= 0:
        out.append(Container(()))

    # starter options for one block: (S, Tp, T)
    def starter_options(used_S, used_Tp, used_T):
        ranges = [range(0, min(a - u, B) + 1) for a, u in zip(small_avail, used_S)]
        tiny_opts = [(0, 0)]
        if used_Tp < len(tiny_ids):
            tiny_opts += [(1, T) for T in range(0, min(inv, T_budget - used_T) + 1)]
        for S in itertools.product(*ranges):
            if sum(S) > B:
                continue
            for Tp, T in tiny_opts:
                if sum(S) + Tp == 0 or sum(S) + Tp > B:
                    continue
                yield S, Tp, T

    def windows_ok(blocks: list[BlockVec]) -> bool:
        k = len(blocks) - 1
        run = 0
        for i in range(k, max(-1, k - inv - 1), -1):
            run += blocks[i].starters
            if run + blocks[i].P > B:
                return False
        return True

    def emit(blocks, used_S, used_Tp, used_T):
        if whole and carried(used_S, used_Tp, used_T) < need_q:
            return
        out.append(Container(tuple(blocks)))
        if len(out) > caps.max_containers:
            raise _cap_error()

    seen: dict = {}

    def state_key(blocks, prev_end, used_S, used_Tp, used_T, accounted, pending_loose, idle_run):
        k = len(blocks)
        tail = tuple((b.starters - b.Tp, b.Tp, b.P) for b in blocks[max(0, k - inv):])
        tiny = tuple((j, b.T) for j, b in enumerate(blocks) if b.Tp)
        done = []
        for i in range(0, k - inv):
            window = blocks[i:i + inv + 1]
            coef = sum(b.starters - b.Tp for b in window) + blocks[i].P - B
            members = tuple(j for j in range(i, i + inv + 1) if blocks[j].Tp)
            if members or coef > 0:
                done.append((i, coef, members))
        return (k, prev_end, used_S, used_Tp, used_T, None if whole else accounted, pending_loose,
                min(idle_run, max_idle_run), tail, tiny, tuple(done))

    def dfs(blocks, prev_end, used_S, used_Tp, used_T, accounted, pending_loose, idle_run):
        k = len(blocks)
        if k >= max_blocks:
            return
        if collapse:
            key = state_key(blocks, prev_end, used_S, used_Tp, used_T, accounted, pending_loose, idle_run)
            if key in seen and seen[key] <= accounted:
                return
            seen[key] = accounted
        if whole and k * qe >= c_nice * Q:
            return
        if whole and carried(used_S, used_Tp, used_T) + (max_accounted - accounted) + (len(tiny_ids) - used_Tp) * qe2 < need_q:
            return
        lo, hi = k * qe, (k + 1) * qe
        crossing = prev_end > lo
        P_opts = (1,) if crossing else (0,)
        anchor = max(lo, prev_end)
        for P in P_opts:
            # blocks with starters
            if not pending_loose:
                for S, Tp, T in starter_options(used_S, used_Tp, used_T):
                    length = T * qe2 + sum(l * c for l, c in zip(qsizes, S))
                    # first starter must begin inside the block, and so must every later one
                    small_seq = [l for l, c in zip(qsizes, S) for _ in range(c)]
                    for D in range(0, inv + 1):
                        start = anchor + D * qe2
                        if start >= hi:
                            break
                        acc = accounted + D * qe2 + length
                        if acc > max_accounted:
                            break
                        pos = start + (T * qe2 if Tp else 0)
                        ok = True
                        for l in small_seq[:-1]:
                            pos += l
                            if pos >= hi:
                                ok = False
                                break
                        if not ok:
                            continue
                        if Tp and small_seq and start + T * qe2 >= hi:
                            continue
                        end = start + length
                        b = BlockVec(S, T, Tp, D, P)
                        blocks.append(b)
                        if windows_ok(blocks):
                            nS = tuple(u + s for u, s in zip(used_S, S))
                            if end <= hi:
                                emit(blocks, nS, used_Tp + Tp, used_T + T)
                            loose = end <= hi - (1 + Tp) * qe2
                            dfs(blocks, end, nS, used_Tp + Tp, used_T + T, acc, loose, 0)
                        blocks.pop()
            if k == 0:
                continue
            # blocks without starters
            if crossing:
                if prev_end <= hi:
                    b = BlockVec(tuple(0 for _ in sizes), 0, 0, 0, P)
                    blocks.append(b)
                    if windows_ok(blocks):
                        emit(blocks, used_S, used_Tp, used_T)
                    blocks.pop()
                D = (hi - anchor) // qe2 if anchor < hi else 0
                acc = accounted + D * qe2
                if acc <= max_accounted:
                    blocks.append(BlockVec(tuple(0 for _ in sizes), 0, 0, D, P))
                    if windows_ok(blocks):
                        dfs(blocks, prev_end, used_S, used_Tp, used_T, acc, pending_loose, 0)
                    blocks.pop()
            elif idle_run < max_idle_run:
                acc = accounted + inv * qe2
                if acc <= max_accounted:
                    blocks.append(BlockVec(tuple(0 for _ in sizes), 0, 0, inv, 0))
                    dfs(blocks, prev_end, used_S, used_Tp, used_T, acc, pending_loose, idle_run + 1)
                    blocks.pop()

    dfs([], 0, tuple(0 for _ in sizes), 0, 0, 0, False, 0)
    # self-check and canonical order
    uniq = sorted(set(out))
    if self_check:
        _self_check(uniq, eps, sizes)
    return uniq


def _self_check(containers: Sequence[Container], eps: Eps, sizes: Sequence[Fraction]) -> None:
    for t in containers:
        if not container_feasible(t, eps, sizes):
            raise AssertionError(f"enumerated an infeasible container: {canonical_layout(t, eps, sizes)[1]}")


def enumerate_configurations(pool: Pool, ci: ClassifiedInstance, eps: Eps, c_nice,
                             caps: EnumCaps = EnumCaps()) -> list[Configuration]:
    if caps.max_configurations <= 0:
        raise _cap_error()
    c_nice = Fraction(c_nice)
    classes = pool.long_classes
    large = ci.large_sizes
    nlarge = len(large)
    if c_nice <= eps.inv:
        confs = [Configuration(((l, 1),), 0, 0, tuple(0 for _ in large), 0, 0) for l in classes]
        return sorted(c for c in confs if configuration_feasible(c, eps, c_nice, large))
    bound = load_bound(eps, c_nice)
    unit = eps.sq * c_nice
    large_avail = [ci.count_by_size(JobClass.LARGE).get(l, 0) for l in large]
    medium_total = sum((ci.sizes[j] for j in ci.jobs_of(JobClass.MEDIUM)), ZERO)
    has_medium = medium_total > 0
    has_short = bool(pool.short_containers())
    short_total = sum((pool.load(pool.containers[i]).load for i in pool.short_containers()), ZERO)
    out = []

    def alphas(idx, rem):
        if idx == len(classes):
            yield ()
            return
        l = classes[idx]
        for a in range(0, math.floor(rem / l) + 1):
            for rest in alphas(idx + 1, rem - a * l):
                yield (((l, a),) if a else ()) + rest

    def gammas(idx, rem):
        if idx == nlarge:
            yield ()
            return
        for g in range(0, min(large_avail[idx], math.floor(rem / large[idx])) + 1):
            for rest in gammas(idx + 1, rem - g * large[idx]):
                yield (g,) + rest

    for alpha in alphas(0, bound):
        la = sum((l * a for l, a in alpha), ZERO)
        for gamma in gammas(0, bound - la):
            lg = la + sum((l * g for l, g in zip(large, gamma)), ZERO)
            rem_units = math.floor((bound - lg) / unit)
            beta_max = min(rem_units, math.floor(short_total / unit)) if has_short else 0
            for beta_p in ((0, 1) if has_short else (0,)):
                for beta in range(0, (beta_max if beta_p else 0) + 1):
                    delta_max = min(rem_units - beta, math.floor(medium_total / unit)) if has_medium else 0
                    for delta_p in ((0, 1) if has_medium else (0,)):
                        for delta in range(0, (delta_max if delta_p else 0) + 1):
                            c = Configuration(alpha, beta, beta_p, gamma, delta, delta_p)
                            if configuration_feasible(c, eps, c_nice, large):
                                out.append(c)
                                if len(out) > caps.max_configurations:
                                    raise _cap_error()
    return sorted(set(out))


def milp_signature(t: Container, pool: Pool, B: int) -> tuple:
    """Everything the MILP sees of a container: its column is a function of
    this tuple, so containers sharing it are interchangeable."""
    eps = pool.eps
    ld = pool.load(t)
    short = pool.is_short(t)
    totals = tuple(t.small_count(li) for li in range(len(pool.small_sizes)))
    tiny = tuple((k, b.T) for k, b in enumerate(t.blocks) if b.Tp)
    K = len(t.blocks)
    windows = []
    for i in range(K):
        window = range(i, min(K, i + eps.inv + 1))
        coef = sum(t.blocks[k].starters - t.blocks[k].Tp for k in window) + t.blocks[i].P - B
        members = tuple(k for k in window if t.blocks[k].Tp)
        if members or coef > 0:
            windows.append((coef, members))
    if pool.c_nice <= eps.inv:
        # one container per machine, and every long load class has its own
        # configuration: the class does not change feasibility
        level = None
    else:
        level = ld.load if short else ld.rounded
    return (short, level, totals, tiny, tuple(windows))


def dedupe_containers(pool: Pool, B: int) -> list[Container]:
    """The least loaded container (first in sorted order on ties) of every
    MILP signature."""
    best: dict = {}
    for t in pool.containers:
        sig = milp_signature(t, pool, B)
        if sig not in best or pool.load(t).load < pool.load(best[sig]).load:
            best[sig] = t
    return sorted(best.values())


def build_pool(ci: ClassifiedInstance, eps: Eps, c_nice, caps: EnumCaps = EnumCaps(),
               dedupe: bool = True) -> Pool:
    pool = Pool(ci.small_sizes, ci.large_sizes, eps, Fraction(c_nice))
    pool.containers = enumerate_containers(ci, eps, c_nice, caps, collapse=dedupe, self_check=not dedupe)
    if dedupe:
        pool.containers = dedupe_containers(pool, ci.B)
        _self_check(pool.containers, eps, ci.small_sizes)
    pool.configurations = enumerate_configurations(pool, ci, eps, c_nice, caps)
    return pool


# ---------------------------------------------------------------------------
# extraction (a nice schedule yields a feasible MILP solution)


@dataclass
class _Occurrence:
    machine: int
    origin: Fraction
    container: Container
    tiny: dict  # job id -> block index


def _extract_container(jobs: list[ScheduledJob], ci: ClassifiedInstance, eps: Eps) -> _Occurrence:
    e, e2, inv = eps.value, eps.sq, eps.inv
    sizes = ci.small_sizes
    first = min(a.start for a in jobs)
    origin = math.floor(first / e) * e
    last_end = max(a.end for a in jobs)
    K = math.ceil((last_end - origin) / e)
    if K > inv * inv:
        starts_beyond = [a.id for a in jobs if a.start - origin >= inv * inv * e]
        if starts_beyond:
            raise ValueError(f"container longer than 1/eps^2 blocks drops jobs {starts_beyond}")
        K = inv * inv
    by_block: dict[int, list[ScheduledJob]] = {}
    for a in jobs:
        by_block.setdefault(math.floor((a.start - origin) / e), []).append(a)
    blocks = []
    tiny = {}
    canon_end = ZERO
    last_start_block = max(by_block)
    for k in range(K):
        lo, hi = k * e, (k + 1) * e
        starters = sorted(by_block.get(k, []), key=lambda a: (a.start, a.id))
        # P follows the canonical layout, which never runs ahead of the schedule
        P = int(canon_end > lo)
        anchor = max(lo, canon_end)
        S = tuple(sum(1 for a in starters if ci.class_of[a.id] is JobClass.SMALL and a.size == l) for l in sizes)
        tiny_here = [a for a in starters if ci.class_of[a.id] is JobClass.TINY]
        tiny_sum = sum((a.size for a in tiny_here), ZERO)
        T = math.floor(tiny_sum / e2)
        Tp = int(bool(tiny_here))
        for a in tiny_here:
            tiny[a.id] = k
        if starters:
            D = math.floor((starters[0].start - origin - anchor) / e2)
            if D < 0:
                raise AssertionError("canonical layout overtook the schedule")
            canon_end = anchor + D * e2 + T * e2 * Tp + sum((l * c for l, c in zip(sizes, S)), ZERO)
        elif k == K - 1:
            D = 0
        else:
            D = math.floor((hi - anchor) / e2) if anchor < hi else 0
        blocks.append(BlockVec(S, T, Tp, D, P))
    # the canonical layout may finish a block earlier than the schedule does
    while blocks and not blocks[-1].starters and not blocks[-1].P:
        blocks.pop()
    if blocks and not blocks[-1].starters:
        b = blocks[-1]
        blocks[-1] = BlockVec(b.S, b.T, b.Tp, 0, b.P)
    return _Occurrence(jobs[0].machine, origin, Container(tuple(blocks)), tiny)


def extract_milp_solution(nice: Schedule, ci: ClassifiedInstance, eps: Eps, c_nice, B: Optional[int] = None):
    """Read containers, configurations and the (v, w, x, y, z) solution off a
    nice schedule whose makespan is at most ``c_nice``."""
    from .milp import MilpSolution
    from .schedule import check_nice, makespan

    c_nice = Fraction(c_nice)
    B = ci.B if B is None else B
    v = check_nice(nice, ci, eps, B)
    if not v.ok:
        raise ValueError(f"input not nice: {v.witness}")
    if makespan(nice) > c_nice:
        raise ValueError("makespan exceeds c_nice")
    pool = Pool(ci.small_sizes, ci.large_sizes, eps, c_nice)
    whole = c_nice <= eps.inv
    unit = eps.sq * c_nice
    seqs = nice.by_machine()
    machine_ids = list(range(ci.machines))
    occurrences: list[_Occurrence] = []
    machine_conf: dict[int, Configuration] = {}
    medium_on: dict[int, list[str]] = {}
    for i in machine_ids:
        seq = seqs.get(i, [])
        prefix = [a for a in seq if ci.class_of[a.id].rank == 0]
        groups: list[list[ScheduledJob]] = []
        if prefix:
            if whole:
                groups = [prefix]
            else:
                cur = [prefix[0]]
                reach = prefix[0].end
                for a in prefix[1:]:
                    if a.start - reach >= 1:
                        groups.append(cur)
                        cur = []
                    cur.append(a)
                    reach = max(reach, a.end)
                groups.append(cur)
        occ = [_extract_container(g, ci, eps) for g in groups]
        if whole and not occ:
            occ = [_Occurrence(i, ZERO, Container(()), {})]
        for o in occ:
            o.machine = i
        occurrences.extend(occ)
        alpha: dict[Fraction, int] = {}
        short_load = ZERO
        has_short = False
        for o in occ:
            ld = pool.load(o.container)
            if pool.is_short(o.container):
                short_load += ld.load
                has_short = True
            else:
                alpha[ld.rounded] = alpha.get(ld.rounded, 0) + 1
        mediums = [a for a in seq if ci.class_of[a.id] is JobClass.MEDIUM]
        medium_on[i] = [a.id for a in mediums]
        med_total = sum((a.size for a in mediums), ZERO)
        gamma = tuple(sum(1 for a in seq if ci.class_of[a.id] is JobClass.LARGE and a.size == l)
                      for l in ci.large_sizes)
        conf = Configuration(
            tuple(sorted(alpha.items())),
            math.floor(short_load / unit), int(has_short),
            gamma,
            math.floor(med_total / unit), int(bool(mediums)),
        )
        machine_conf[i] = conf

    pool.containers = sorted({o.container for o in occurrences})
    pool.configurations = sorted(set(machine_conf.values()))
    t_index = {t: k for k, t in enumerate(pool.containers)}
    c_index = {c: k for k, c in enumerate(pool.configurations)}
    sol = MilpSolution()
    for i in machine_ids:
        c = c_index[machine_conf[i]]
        sol.v[c] = sol.v.get(c, 0) + 1
        for jid in medium_on[i]:
            sol.x[(jid, c)] = Fraction(1)
    for o in occurrences:
        t = t_index[o.container]
        c = c_index[machine_conf[o.machine]]
        sol.w[t] = sol.w.get(t, 0) + 1
        sol.z[(c, t)] = sol.z.get((c, t), 0) + 1
        for jid, k in o.tiny.items():
            sol.y[(jid, k, t)] = Fraction(1)
    return pool, sol
