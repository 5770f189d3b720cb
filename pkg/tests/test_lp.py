import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from stsched.lp import LinearProgram, solve_lp, solve_lp_state


def test_fixed_variable():
    lp = LinearProgram()
    lp.add_var("x")
    lp.add_row({"x": 1}, "=", 1)
    res = solve_lp(lp)
    assert res.feasible and res.values["x"] == 1


def test_infeasible_bounds():
    lp = LinearProgram()
    lp.add_var("x")
    lp.add_row({"x": 1}, ">=", 1, "low")
    lp.add_row({"x": 1}, "<=", 0, "high")
    assert solve_lp(lp).status == "infeasible"


def test_unbounded():
    lp = LinearProgram()
    lp.add_var("x")
    lp.objective = {"x": -1}
    assert solve_lp(lp).status == "unbounded"


def test_minimizes_with_bounds():
    lp = LinearProgram()
    lp.add_var("x", 1, 5)
    lp.add_var("y", 0, 3)
    lp.add_row({"x": 1, "y": 1}, ">=", F(7, 2))
    lp.objective = {"x": 2, "y": 1}
    res = solve_lp(lp)
    assert res.values == {"x": 1, "y": F(5, 2)}
    assert res.objective == F(9, 2)


def test_unknown_variable_and_bad_sense():
    lp = LinearProgram()
    lp.add_var("x")
    with pytest.raises(KeyError):
        lp.add_row({"y": 1}, "<=", 1)
    with pytest.raises(ValueError):
        lp.add_row({"x": 1}, "<", 1)


def _random_lp(rng: random.Random, n: int, m: int) -> LinearProgram:
    lp = LinearProgram()
    for k in range(n):
        lp.add_var(k, rng.randint(-2, 1), rng.choice([None, rng.randint(2, 6)]))
    for _ in range(m):
        coeffs = {k: rng.randint(-3, 3) for k in range(n) if rng.random() < 0.7}
        lp.add_row(coeffs, rng.choice(["<=", ">=", "="]), rng.randint(-4, 8))
    lp.objective = {k: rng.randint(-2, 4) for k in range(n)}
    for k in range(n):  # keep the objective bounded
        lp.add_row({k: 1}, "<=", 10)
    return lp


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.integers(1, 5))
def test_matches_scipy(seed, n, m):
    scipy = pytest.importorskip("scipy.optimize")
    lp = _random_lp(random.Random(seed), n, m)
    res = solve_lp(lp)
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for r in lp.rows:
        row = [float(r.coeffs.get(k, 0)) for k in range(n)]
        if r.sense == "=":
            A_eq.append(row), b_eq.append(float(r.rhs))
        else:
            sign = 1 if r.sense == "<=" else -1
            A_ub.append([sign * a for a in row]), b_ub.append(sign * float(r.rhs))
    ref = scipy.linprog([float(lp.objective[k]) for k in range(n)], A_ub=A_ub or None, b_ub=b_ub or None,
                        A_eq=A_eq or None, b_eq=b_eq or None,
                        bounds=[(float(lp.lower[k]), None if lp.upper[k] is None else float(lp.upper[k]))
                                for k in range(n)], method="highs")
    assert res.feasible == (ref.status == 0)
    if res.feasible:
        assert not lp.violated_rows(res.values)
        assert abs(float(res.objective) - ref.fun) < 1e-6


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.integers(1, 4))
def test_warm_bound_matches_fresh_solve(seed, n, m):
    rng = random.Random(seed)
    lp = _random_lp(rng, n, m)
    res, state = solve_lp_state(lp)
    if state is None:
        return
    var = rng.randrange(n)
    sense = rng.choice(["<=", ">="])
    bound = rng.randint(-1, 4)
    child = state.with_bound(var, sense, bound)
    fresh = lp.copy()
    fresh.add_row({var: 1}, sense, bound)
    ref = solve_lp(fresh)
    assert (child is not None) == ref.feasible
    if child is not None:
        assert child.result().objective == ref.objective


def test_interval_matrix_vertices_are_integral():
    # consecutive-ones rows with integral data
    rng = random.Random(5)
    for _ in range(50):
        n = rng.randint(2, 6)
        lp = LinearProgram()
        for k in range(n):
            lp.add_var(k, 0, rng.randint(1, 3))
        for _ in range(rng.randint(1, 4)):
            a, b = sorted(rng.sample(range(n + 1), 2))
            lp.add_row({k: 1 for k in range(a, b)}, rng.choice(["<=", ">="]), rng.randint(0, 5))
        lp.objective = {k: rng.randint(-3, 3) for k in range(n)}
        res = solve_lp(lp)
        if res.feasible:
            assert all(v.denominator == 1 for v in res.values.values())
