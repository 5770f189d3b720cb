"""Exact rational two-phase simplex with Bland's rule.

Sparse tableau: every row is a ``{column: Fraction}`` dict.  Returned
solutions are basic (vertices of the feasible region), which is what the
totally-unimodular rounding steps rely on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Mapping, Optional

from gmpy2 import mpq

ZERO = Fraction(0)
QZERO = mpq(0)


def _q(x) -> mpq:
    x = Fraction(x)
    return mpq(x.numerator, x.denominator)


def _frac(x: mpq) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator))


@dataclass
class Row:
    coeffs: dict
    sense: str  # "<=", "=", ">="
    rhs: Fraction
    tag: str = ""


@dataclass
class LinearProgram:
    """Variables carry bounds ``lo <= x <= hi`` (``hi=None`` means unbounded above)."""

    lower: dict = field(default_factory=dict)
    upper: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    objective: dict = field(default_factory=dict)

    def add_var(self, name: Hashable, lo=0, hi=None) -> Hashable:
        if name in self.lower:
            raise ValueError(f"duplicate variable {name!r}")
        self.lower[name] = Fraction(lo)
        self.upper[name] = None if hi is None else Fraction(hi)
        return name

    def add_row(self, coeffs: Mapping, sense: str, rhs, tag: str = "") -> None:
        if sense not in ("<=", "=", ">="):
            raise ValueError(f"bad sense {sense!r}")
        for v in coeffs:
            if v not in self.lower:
                raise KeyError(f"row {tag!r} uses unknown variable {v!r}")
        clean = {v: Fraction(c) for v, c in coeffs.items() if c != 0}
        self.rows.append(Row(clean, sense, Fraction(rhs), tag))

    @property
    def variables(self) -> list:
        return list(self.lower)

    def copy(self) -> "LinearProgram":
        return LinearProgram(dict(self.lower), dict(self.upper), list(self.rows), dict(self.objective))

    def violated_rows(self, values: Mapping, tol=ZERO) -> list[Row]:
        bad = []
        for r in self.rows:
            lhs = sum((c * values.get(v, ZERO) for v, c in r.coeffs.items()), ZERO)
            if (r.sense == "<=" and lhs > r.rhs) or (r.sense == ">=" and lhs < r.rhs) or (
                r.sense == "=" and lhs != r.rhs
            ):
                bad.append(r)
        return bad


@dataclass
class LpResult:
    status: str  # "optimal", "infeasible", "unbounded"
    values: dict = field(default_factory=dict)
    objective: Optional[Fraction] = None
    certificate: tuple = ()

    @property
    def feasible(self) -> bool:
        return self.status == "optimal"


class _Tableau:
    """Rows are sparse dicts; ``cols`` maps a column to the rows holding it
    so that a pivot only touches the rows it changes."""

    def __init__(self, ncols: int):
        self.rows: list[dict] = []
        self.rhs: list = []
        self.basis: list[int] = []
        self.ncols = ncols
        self.cols: dict[int, set] = {}

    def index(self) -> None:
        self.cols = {}
        for i, row in enumerate(self.rows):
            for k in row:
                self.cols.setdefault(k, set()).add(i)

    def pivot(self, r: int, c: int, cost: dict, extra: Optional[list] = None) -> None:
        row = self.rows[r]
        piv = row[c]
        if piv != 1:
            inv = 1 / piv
            for k in row:
                row[k] *= inv
            self.rhs[r] *= inv
        b = self.rhs[r]
        for i in list(self.cols.get(c, ())):
            if i == r:
                continue
            other = self.rows[i]
            f = other[c]
            self._axpy(other, row, f, i)
            self.rhs[i] -= f * b
        for obj in [cost] + (extra or []):
            f = obj["row"].get(c)
            if f:
                self._axpy(obj["row"], row, f)
                obj["val"] -= f * b
        self.basis[r] = c

    def _axpy(self, target: dict, row: dict, f, i: Optional[int] = None) -> None:
        cols = self.cols
        for k, v in row.items():
            old = target.get(k)
            nv = (old if old is not None else QZERO) - f * v
            if nv:
                target[k] = nv
                if old is None and i is not None:
                    cols.setdefault(k, set()).add(i)
            elif old is not None:
                del target[k]
                if i is not None:
                    cols[k].discard(i)

    def run(self, cost: dict, allowed, extra=None, limit: int = 10**7) -> str:
        """Minimise ``cost`` over the current basis with Bland's rule."""
        for _ in range(limit):
            enter = None
            for k, v in cost["row"].items():
                if v < 0 and (enter is None or k < enter) and allowed(k):
                    enter = k
            if enter is None:
                return "optimal"
            best_r, best_ratio = None, None
            for i in self.cols.get(enter, ()):
                a = self.rows[i][enter]
                if a > 0:
                    ratio = self.rhs[i] / a
                    if (best_ratio is None or ratio < best_ratio
                            or (ratio == best_ratio and self.basis[i] < self.basis[best_r])):
                        best_r, best_ratio = i, ratio
            if best_r is None:
                return "unbounded"
            self.pivot(best_r, enter, cost, extra)
        raise RuntimeError("simplex iteration limit reached")

    def run_dual(self, cost: dict, limit: int = 10**7) -> str:
        """Restore primal feasibility from a dual feasible basis (Bland's
        rule in its dual form: lowest basic index leaves, ratio ties go to
        the lowest column)."""
        for _ in range(limit):
            leave = None
            for i, b in enumerate(self.rhs):
                if b < 0 and (leave is None or self.basis[i] < self.basis[leave]):
                    leave = i
            if leave is None:
                return "optimal"
            row = self.rows[leave]
            enter, best = None, None
            for k, a in row.items():
                if a < 0:
                    ratio = cost["row"].get(k, QZERO) / -a
                    if best is None or ratio < best or (ratio == best and k < enter):
                        enter, best = k, ratio
            if enter is None:
                return "infeasible"
            self.pivot(leave, enter, cost)
        raise RuntimeError("simplex iteration limit reached")

    def copy(self) -> "_Tableau":
        t = _Tableau(self.ncols)
        t.rows = [dict(r) for r in self.rows]
        t.rhs = list(self.rhs)
        t.basis = list(self.basis)
        t.cols = {k: set(v) for k, v in self.cols.items()}
        return t


class LpState:
    """An optimal tableau kept for warm starts: :meth:`with_bound` adds one
    variable bound and reoptimises with the dual simplex."""

    def __init__(self, lp, tab, cost, free, index, shift, fixed):
        self.lp, self.tab, self.cost = lp, tab, cost
        self.free, self.index, self.shift, self.fixed = free, index, shift, fixed

    def result(self) -> LpResult:
        n = len(self.free)
        xs = [ZERO] * n
        for i, b in enumerate(self.tab.basis):
            if b < n:
                xs[b] = _frac(self.tab.rhs[i])
        values = dict(self.fixed)
        for v in self.free:
            values[v] = xs[self.index[v]] + self.shift[v]
        obj = sum((Fraction(c) * values[v] for v, c in self.lp.objective.items()), ZERO)
        return LpResult("optimal", values, obj if self.lp.objective else None)

    def with_bound(self, var: Hashable, sense: str, bound) -> Optional["LpState"]:
        """``var <= bound`` (sense ``"<="``) or ``var >= bound``; ``None`` if
        that makes the program infeasible."""
        if var in self.fixed:
            val = self.fixed[var]
            ok = val <= bound if sense == "<=" else val >= bound
            return self if ok else None
        tab = self.tab.copy()
        cost = {"row": dict(self.cost["row"]), "val": self.cost["val"]}
        j = self.index[var]
        b = _q(Fraction(bound) - self.shift[var])
        slack = tab.ncols
        tab.ncols += 1
        r = next((i for i, c in enumerate(tab.basis) if c == j), None)
        sign = 1 if sense == "<=" else -1
        if r is None:
            row = {j: mpq(sign), slack: mpq(1)}
            rhs = sign * b
        else:
            # substitute the basic variable by its row: x_j = rhs_r - sum(a_k x_k)
            row = {k: -sign * a for k, a in tab.rows[r].items() if k != j}
            row[slack] = mpq(1)
            rhs = sign * (b - tab.rhs[r])
        i = len(tab.rows)
        tab.rows.append(row)
        tab.rhs.append(rhs)
        tab.basis.append(slack)
        for k in row:
            tab.cols.setdefault(k, set()).add(i)
        if tab.run_dual(cost) != "optimal":
            return None
        return LpState(self.lp, tab, cost, self.free, self.index, self.shift, self.fixed)


def solve_lp(lp: LinearProgram) -> LpResult:
    """Return a basic optimal (or, without objective, basic feasible) solution."""
    res, _ = solve_lp_state(lp)
    return res


def solve_lp_state(lp: LinearProgram) -> tuple[LpResult, Optional[LpState]]:
    for v in lp.lower:
        hi = lp.upper[v]
        if hi is not None and hi < lp.lower[v]:
            return LpResult("infeasible", certificate=(f"bounds of {v!r}",)), None
    fixed = {v: lp.lower[v] for v in lp.lower if lp.upper[v] is not None and lp.upper[v] == lp.lower[v]}
    free = [v for v in lp.lower if v not in fixed]
    index = {v: i for i, v in enumerate(free)}
    shift = {v: lp.lower[v] for v in free}

    # rows over shifted columns x' = x - lo >= 0; the tableau itself runs on mpq
    prepared = []
    for r in lp.rows:
        coeffs = {}
        rhs = r.rhs
        for v, c in r.coeffs.items():
            if v in fixed:
                rhs -= c * fixed[v]
            else:
                coeffs[index[v]] = c
                rhs -= c * shift[v]
        if not coeffs:
            ok = (r.sense == "<=" and 0 <= rhs) or (r.sense == ">=" and 0 >= rhs) or (r.sense == "=" and rhs == 0)
            if not ok:
                return LpResult("infeasible", certificate=(r.tag,)), None
            continue
        prepared.append(({k: _q(c) for k, c in coeffs.items()}, r.sense, _q(rhs), r.tag))
    for v in free:
        hi = lp.upper[v]
        if hi is not None:
            prepared.append(({index[v]: mpq(1)}, "<=", _q(hi - shift[v]), f"ub:{v}"))

    n = len(free)
    col = n
    tab = _Tableau(n)
    artificial = set()
    tags = []
    for coeffs, sense, rhs, tag in prepared:
        row = dict(coeffs)
        if sense != "=":
            row[col] = mpq(1 if sense == "<=" else -1)
            slack = col
            col += 1
        else:
            slack = None
        if rhs < 0:
            row = {k: -v for k, v in row.items()}
            rhs = -rhs
        if slack is not None and row[slack] == 1:
            basic = slack
        else:
            basic = col
            row[col] = mpq(1)
            artificial.add(col)
            col += 1
        tab.rows.append(row)
        tab.rhs.append(rhs)
        tab.basis.append(basic)
        tags.append(tag)
    tab.ncols = col
    tab.index()

    # phase I
    phase1 = {"row": {}, "val": QZERO}
    for i, row in enumerate(tab.rows):
        if tab.basis[i] in artificial:
            for k, v in row.items():
                if k not in artificial:
                    nv = phase1["row"].get(k, QZERO) - v
                    if nv:
                        phase1["row"][k] = nv
                    else:
                        phase1["row"].pop(k, None)
            phase1["val"] -= tab.rhs[i]
    cost = {"row": {}, "val": QZERO}
    for v, c in lp.objective.items():
        if v in index and c:
            cost["row"][index[v]] = _q(c)
    # express the phase II cost in terms of the initial basis (slacks have zero cost)
    tab.run(phase1, lambda k: k not in artificial, extra=[cost])
    if phase1["val"] != 0:
        cert = tuple(tags[i] for i in range(len(tab.rows)) if tab.basis[i] in artificial and tab.rhs[i] > 0)
        return LpResult("infeasible", certificate=cert), None

    # drive zero-valued artificials out of the basis, dropping redundant rows
    i = 0
    while i < len(tab.rows):
        if tab.basis[i] in artificial:
            row = tab.rows[i]
            enter = next((k for k in sorted(row) if k not in artificial and row[k] != 0), None)
            if enter is None:
                del tab.rows[i], tab.rhs[i], tab.basis[i], tags[i]
                tab.index()
                continue
            tab.pivot(i, enter, cost)
        i += 1
    for row in tab.rows:
        for a in [k for k in row if k in artificial]:
            del row[a]
    tab.index()
    for a in [k for k in cost["row"] if k in artificial]:
        del cost["row"][a]

    status = tab.run(cost, lambda k: k not in artificial)
    if status == "unbounded":
        return LpResult("unbounded"), None
    state = LpState(lp, tab, cost, free, index, shift, fixed)
    return state.result(), state
