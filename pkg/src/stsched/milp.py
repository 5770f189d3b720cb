"""The configuration MILP: model construction, verification and an exact
branch-and-bound solver on top of :mod:`stsched.lp`.

Variables are keyed by tuples: ``("v", c)``, ``("w", t)``, ``("z", c, t)``,
``("x", j, c)`` and ``("y", j, k, t)`` where ``c`` and ``t`` index the pool's
configuration and container lists.  Every row is tagged with its
constraint family (``tiny_once``, ``machines`` and so on); variable bounds
are ``bound`` rows in the text dump.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .containers import Pool
from .lp import LinearProgram, solve_lp_state
from .model import ClassifiedInstance, JobClass
from .schedule import OK, Verdict

ZERO = Fraction(0)


class SolverBudgetExceeded(RuntimeError):
    pass


@dataclass
class MilpSolution:
    v: dict = field(default_factory=dict)  # config index -> int
    w: dict = field(default_factory=dict)  # container index -> int
    z: dict = field(default_factory=dict)  # (config, container) -> int
    x: dict = field(default_factory=dict)  # (medium job, config) -> Fraction
    y: dict = field(default_factory=dict)  # (tiny job, block, container) -> Fraction

    def values(self) -> dict:
        out = {}
        out.update({("v", c): Fraction(a) for c, a in self.v.items()})
        out.update({("w", t): Fraction(a) for t, a in self.w.items()})
        out.update({("z",) + k: Fraction(a) for k, a in self.z.items()})
        out.update({("x",) + k: Fraction(a) for k, a in self.x.items()})
        out.update({("y",) + k: Fraction(a) for k, a in self.y.items()})
        return out

    @classmethod
    def from_values(cls, values: dict) -> "MilpSolution":
        sol = cls()
        for key, a in values.items():
            if not a:
                continue
            kind, rest = key[0], key[1:]
            if kind == "v":
                sol.v[rest[0]] = int(a)
            elif kind == "w":
                sol.w[rest[0]] = int(a)
            elif kind == "z":
                sol.z[rest] = int(a)
            elif kind == "x":
                sol.x[rest] = a
            elif kind == "y":
                sol.y[rest] = a
        return sol


@dataclass
class MilpModel:
    lp: LinearProgram
    integer: list  # names of integer variables
    pool: Pool
    ci: ClassifiedInstance
    machines: int

    def count(self, kind: str) -> int:
        return sum(1 for v in self.lp.lower if v[0] == kind)

    def dump(self) -> str:
        """Plain-text listing of variables, bounds and rows."""

        def name(v):
            return "_".join(str(p) for p in v)

        lines = [f"integer {len(self.integer)}"]
        for v in self.lp.variables:
            hi = self.lp.upper[v]
            lines.append(f"bound {name(v)} {self.lp.lower[v]} {'inf' if hi is None else hi}")
        for r in self.lp.rows:
            lhs = " + ".join(f"{c}*{name(v)}" for v, c in r.coeffs.items()) or "0"
            lines.append(f"{r.tag}: {lhs} {r.sense} {r.rhs}")
        return "\n".join(lines) + "\n"


def _compatible(pool: Pool, conf, t) -> bool:
    if pool.is_short(t):
        return conf.beta_p == 1
    return conf.alpha_of(pool.load(t).rounded) > 0


def _windows(t, eps):
    """Truncated windows ``(i, range of blocks)``; the last window ends with
    the container."""
    K = len(t.blocks)
    return [(i, range(i, min(K, i + eps.inv + 1))) for i in range(K)]


def build_milp(ci: ClassifiedInstance, pool: Pool, machines: Optional[int] = None) -> MilpModel:
    eps = pool.eps
    e2 = eps.sq
    C = pool.c_nice
    m = ci.machines if machines is None else machines
    B = ci.B
    lp = LinearProgram()
    n = len(ci.sizes)
    confs, conts = pool.configurations, pool.containers
    sizes = ci.sizes
    tiny = ci.jobs_of(JobClass.TINY)
    medium = ci.jobs_of(JobClass.MEDIUM)
    # upper bounds implied by the equality rows are left implicit
    integer = []
    for c in range(len(confs)):
        integer.append(lp.add_var(("v", c), 0))
    for t in range(len(conts)):
        integer.append(lp.add_var(("w", t), 0))
    for c, conf in enumerate(confs):
        for t, cont in enumerate(conts):
            integer.append(lp.add_var(("z", c, t), 0, None if _compatible(pool, conf, cont) else 0))
    for j in medium:
        for c, conf in enumerate(confs):
            lp.add_var(("x", j, c), 0, None if conf.delta_p else 0)
    tiny_blocks = [(k, t) for t, cont in enumerate(conts) for k, b in enumerate(cont.blocks) if b.Tp]
    for j in tiny:
        for k, t in tiny_blocks:
            lp.add_var(("y", j, k, t), 0)

    for j in tiny:
        lp.add_row({("y", j, k, t): 1 for k, t in tiny_blocks}, "=", 1, "tiny_once")
    for k, t in tiny_blocks:
        b = conts[t].blocks[k]
        row = {("y", j, k, t): sizes[j] for j in tiny}
        row[("w", t)] = -(b.T + 1) * e2
        lp.add_row(row, "<=", 0, "tiny_volume")
    small_counts = ci.count_by_size(JobClass.SMALL)
    for li, l in enumerate(pool.small_sizes):
        row = {("w", t): cont.small_count(li) for t, cont in enumerate(conts)}
        lp.add_row(row, "=", small_counts.get(l, 0), "small_count")
    for j in medium:
        lp.add_row({("x", j, c): 1 for c in range(len(confs))}, "=", 1, "medium_once")
    for c, conf in enumerate(confs):
        if medium:
            row = {("x", j, c): sizes[j] for j in medium}
            row[("v", c)] = -conf.delta_p * (conf.delta + 1) * e2 * C
            lp.add_row(row, "<=", 0, "medium_volume")
    large_counts = ci.count_by_size(JobClass.LARGE)
    for li, l in enumerate(pool.large_sizes):
        row = {("v", c): conf.gamma[li] for c, conf in enumerate(confs)}
        lp.add_row(row, "=", large_counts.get(l, 0), "large_count")
    for t in range(len(conts)):
        row = {("z", c, t): 1 for c in range(len(confs))}
        row[("w", t)] = -1
        lp.add_row(row, "=", 0, "container_slot")
    # with no jobs the empty container still needs one slot per machine
    big = max(n, 1)
    for c in range(len(confs)):
        for t in range(len(conts)):
            if lp.upper[("z", c, t)] is None:
                lp.add_row({("z", c, t): 1, ("v", c): -big}, "<=", 0, "slot_link")
    short = pool.short_containers()
    for c, conf in enumerate(confs):
        if short:
            row = {("z", c, t): pool.load(conts[t]).load for t in short}
            row[("v", c)] = -conf.beta_p * (conf.beta + 1) * e2 * C
            lp.add_row(row, "<=", 0, "short_volume")
    short_set = set(short)
    for l in pool.long_classes:
        row = {("w", t): 1 for t, cont in enumerate(conts)
               if t not in short_set and pool.load(cont).rounded == l}
        for c, conf in enumerate(confs):
            a = conf.alpha_of(l)
            if a:
                row[("v", c)] = row.get(("v", c), 0) - a
        lp.add_row(row, "=", 0, "long_class")
    tiny_at = {}
    for k, t in tiny_blocks:
        tiny_at.setdefault(t, set()).add(k)
    for t, cont in enumerate(conts):
        for i, window in _windows(cont, eps):
            coef = sum(cont.blocks[k].starters - cont.blocks[k].Tp for k in window) + cont.blocks[i].P - B
            row = {("w", t): coef}
            for k in window:
                if k in tiny_at.get(t, ()):
                    for j in tiny:
                        row[("y", j, k, t)] = 1
            if len(row) > 1 or coef > 0:
                lp.add_row(row, "<=", 0, "tiny_window")
    lp.add_row({("v", c): 1 for c in range(len(confs))}, "=", m, "machines")
    return MilpModel(lp, integer, pool, ci, m)


def verify_milp_solution(model: MilpModel, sol: MilpSolution) -> Verdict:
    """Exact check of every row, bound and integrality requirement."""
    values = sol.values()
    lp = model.lp
    for v, a in values.items():
        if v not in lp.lower:
            if a:
                return Verdict(False, {"tag": "bound", "variable": list(map(str, v)), "detail": "unknown variable"})
            continue
    for v in lp.lower:
        a = values.get(v, ZERO)
        hi = lp.upper[v]
        if a < lp.lower[v] or (hi is not None and a > hi):
            return Verdict(False, {"tag": "bound", "variable": list(map(str, v)), "value": a})
    for v in model.integer:
        if values.get(v, ZERO).denominator != 1:
            return Verdict(False, {"tag": "integrality", "variable": list(map(str, v))})
    bad = lp.violated_rows(values)
    if bad:
        return Verdict(False, {"tag": bad[0].tag, "row": {"|".join(map(str, k)): c for k, c in bad[0].coeffs.items()},
                               "sense": bad[0].sense, "rhs": bad[0].rhs})
    return OK


@dataclass(frozen=True)
class SolverBudget:
    max_nodes: int = 2000
    seconds: float = 120.0


def solve_milp(model: MilpModel, budget: SolverBudget = SolverBudget()) -> Optional[MilpSolution]:
    """Depth-first branch and bound on the most fractional integer variable.

    Children are warm-started from the parent's optimal tableau.  Stops at
    the first integral LP solution (feasibility is all that is needed).
    Returns ``None`` when the model is infeasible.
    """
    deadline = time.monotonic() + budget.seconds
    res, root = solve_lp_state(model.lp)
    if root is None:
        return None
    stack = [root]
    nodes = 0
    while stack:
        state = stack.pop()
        nodes += 1
        if nodes > budget.max_nodes or time.monotonic() > deadline:
            raise SolverBudgetExceeded("solver budget exceeded")
        values = state.result().values
        pick, frac = None, None
        for v in model.integer:
            a = values[v]
            if a.denominator != 1:
                d = abs(a - (a.numerator // a.denominator) - Fraction(1, 2))
                if frac is None or d < frac:
                    pick, frac = v, d
        if pick is None:
            sol = MilpSolution.from_values(values)
            assert verify_milp_solution(model, sol).ok
            return sol
        a = values[pick]
        fl = a.numerator // a.denominator
        down = state.with_bound(pick, "<=", fl)
        up = state.with_bound(pick, ">=", fl + 1)
        # the nearer side is explored first
        first, second = (up, down) if a - fl >= Fraction(1, 2) else (down, up)
        stack.extend(x for x in (second, first) if x is not None)
    return None
