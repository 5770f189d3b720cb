"""The approximation scheme driver and the below-one makespan case."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .containers import EnumCaps, EnumerationCapExceeded, Pool, build_pool
from .lp import LinearProgram, solve_lp
from .milp import MilpModel, MilpSolution, SolverBudget, SolverBudgetExceeded, build_milp, solve_milp
from .model import Eps, Instance, classify_jobs, makespan_guesses, round_instance
from .rounding import MachinePlan, best_fit_round, build_plan, materialize_schedule
from .schedule import Schedule, ScheduledJob, check_time_constraint, makespan


@dataclass(frozen=True)
class NotApplicable:
    reason: str


@dataclass(frozen=True)
class SchemeCaps:
    enum: EnumCaps = EnumCaps()
    solver: SolverBudget = SolverBudget()


@dataclass
class EptasRun:
    schedule: Schedule
    guess: Optional[Fraction] = None
    pool: Optional[Pool] = None
    model: Optional[MilpModel] = None
    solution: Optional[MilpSolution] = None
    plans: list = field(default_factory=list)
    log: list = field(default_factory=list)  # (guess, outcome)


def _restore_sizes(s: Schedule, inst: Instance) -> Schedule:
    sizes = inst.size_of()
    return Schedule(tuple(ScheduledJob(a.id, a.machine, a.start, sizes[a.id]) for a in s))


def small_makespan_case(inst: Instance, eps: Eps):
    """At most ``B`` jobs per machine, back to back from time 0.

    Cardinalities are balanced, an LP spreads the jobs fractionally with the
    least maximum load, and Best-Fit rounds it.  Returns
    :class:`NotApplicable` unless the result finishes before time 1.
    """
    n, m, B = inst.n, inst.machines, inst.B
    if n == 0:
        return Schedule(())
    if inst.p_max >= 1:
        return NotApplicable("a job of size at least 1")
    if n > B * m:
        return NotApplicable("more than B jobs per machine needed")
    caps = {k: n // m + (1 if k < n % m else 0) for k in range(m)}
    sizes = inst.size_of()
    ids = sorted(sizes)
    lp = LinearProgram()
    T = lp.add_var("T", 0)
    for j in ids:
        for k in range(m):
            lp.add_var((j, k), 0, 1)
    for j in ids:
        lp.add_row({(j, k): 1 for k in range(m)}, "=", 1, "job")
    for k in range(m):
        lp.add_row({(j, k): 1 for j in ids}, "=", caps[k], "count")
        row = {(j, k): sizes[j] for j in ids}
        row[T] = -1
        lp.add_row(row, "<=", 0, "load")
    lp.objective = {T: 1}
    res = solve_lp(lp)
    t = res.values[T]
    y = {j: {k: res.values[(j, k)] for k in range(m) if res.values[(j, k)]} for j in ids}
    chosen = best_fit_round(y, caps, {k: t for k in range(m)}, sizes)
    out = []
    for k in range(m):
        start = Fraction(0)
        for j in sorted((j for j in ids if chosen[j] == k), key=lambda j: (sizes[j], j)):
            out.append(ScheduledJob(j, k, start, sizes[j]))
            start += sizes[j]
    s = Schedule(tuple(out))
    if not check_time_constraint(s, B).ok:
        return NotApplicable("validator rejected the back-to-back layout")
    if makespan(s) >= 1:
        return NotApplicable("makespan reached 1")
    return s


def eptas_run(inst: Instance, eps: Eps, caps: SchemeCaps = SchemeCaps()) -> EptasRun:
    if inst.n == 0:
        return EptasRun(Schedule(()))
    ri = round_instance(inst, eps)
    grid = makespan_guesses(ri, eps)
    log = []
    if grid.below_one_flag:
        s = small_makespan_case(inst, eps)
        if isinstance(s, Schedule):
            return EptasRun(s, log=[("below one", "scheduled")])
        log.append(("below one", s.reason))
    for g in grid:
        try:
            ci = classify_jobs(ri, eps, g)
        except ValueError:
            log.append((g, "guess below the largest job"))
            continue
        try:
            pool = build_pool(ci, eps, g, caps.enum)
        except EnumerationCapExceeded as exc:
            log.append((g, str(exc)))
            continue
        model = build_milp(ci, pool)
        try:
            sol = solve_milp(model, caps.solver)
        except SolverBudgetExceeded as exc:
            log.append((g, str(exc)))
            continue
        if sol is None:
            log.append((g, "infeasible"))
            continue
        plans: list[MachinePlan] = build_plan(sol, pool, ci)
        rounded = materialize_schedule(plans, ci, eps, g, pool.small_sizes)
        s = _restore_sizes(rounded, inst)
        v = check_time_constraint(s, inst.B)
        if not v.ok:
            raise RuntimeError(f"output violates the time constraint: {v.witness}")
        log.append((g, "scheduled"))
        return EptasRun(s, g, pool, model, sol, plans, log)
    raise RuntimeError("no guess admitted a solution")


def eptas(inst: Instance, eps: Eps, caps: SchemeCaps = SchemeCaps()) -> Schedule:
    return eptas_run(inst, eps, caps).schedule
