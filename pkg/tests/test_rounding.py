import itertools
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from gen import fuzz_system
from stsched.rounding import (
    RoundingError,
    assign_flexible_greedy,
    best_fit_round,
    repair_tiny_fractional,
    solve_omega_lp,
)


def test_first_fit_exact_and_single_machine():
    assert assign_flexible_greedy([("a", F(1)), ("b", F(1))], [F(1), F(1)], F(0)) == [["a"], ["b"]]
    assert assign_flexible_greedy([("a", F(1, 2)), ("b", F(1, 3))], [F(5)], F(0)) == [["a", "b"]]


def test_first_fit_slack_and_leftovers():
    # the last item may overflow its machine by less than the slack
    assert assign_flexible_greedy([("a", F(1)), ("b", F(1))], [F(3, 2)], F(1)) == [["a", "b"]]
    with pytest.raises(RoundingError):
        assign_flexible_greedy([("a", F(1)), ("b", F(1))], [F(1, 2)], F(0))


def test_omega_integral_passthrough():
    assert solve_omega_lp([1, 0, 2], [([0, 1, 2], 5)]) == [1, 0, 2]


def test_omega_half_split():
    out = solve_omega_lp([F(3, 2), F(1, 2)], [])
    assert out in ([2, 0], [1, 1])


def test_omega_zero_stays_zero():
    out = solve_omega_lp([0, F(1, 3), F(2, 3)], [([1, 2], 1)])
    assert out[0] == 0 and sum(out) == 1


def test_repair_integral_unchanged():
    y = [{"a": F(1)}, {"b": F(1)}]
    assert repair_tiny_fractional(y, [1, 1], [1, 1]) == y


def test_repair_moves_split_job_to_first_block():
    y = [{"a": F(1, 2)}, {"a": F(1, 2)}]
    out = repair_tiny_fractional(y, [F(1, 2), F(1, 2)], [1, 0])
    assert out == [{"a": F(1)}, {}]


def test_best_fit_integral_unchanged():
    y = {"a": {0: F(1)}, "b": {1: F(1)}}
    assert best_fit_round(y, {0: 1, 1: 1}, {0: F(1), 1: F(2)}, {"a": F(1), "b": F(2)}) == {"a": 0, "b": 1}


def test_best_fit_half_split():
    y = {"a": {0: F(1, 2), 1: F(1, 2)}, "b": {0: F(1, 2), 1: F(1, 2)}}
    out = best_fit_round(y, {0: 1, 1: 1}, {0: F(1), 1: F(1)}, {"a": F(1), "b": F(1)})
    assert sorted(out.values()) == [0, 1]


def test_best_fit_empty_block_and_bad_rows():
    y = {"a": {0: F(1)}}
    assert best_fit_round(y, {0: 1, 1: 0}, {0: F(1), 1: F(0)}, {"a": F(1)}) == {"a": 0}
    with pytest.raises(ValueError, match="'a'"):
        best_fit_round({"a": {0: F(1, 2)}}, {0: 1}, {0: F(1)}, {"a": F(1)})


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 12), st.integers(1, 5))
def test_best_fit_properties(seed, n, K):
    y, caps, loads, sizes = fuzz_system(random.Random(seed), n, K)
    out = best_fit_round(y, caps, loads, sizes)
    p_max = max(sizes.values())
    for k in caps:
        got = [j for j, b in out.items() if b == k]
        assert len(got) == caps[k]
        assert sum(sizes[j] for j in got) <= loads[k] + p_max


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_omega_matches_enumeration(seed):
    rng = random.Random(seed)
    U = rng.randint(1, 6)
    omegas = [F(rng.randint(0, 8), rng.choice([1, 2, 3, 4])) for _ in range(U)]
    windows = []
    for _ in range(rng.randint(0, 3)):
        a, b = sorted(rng.sample(range(U + 1), 2))
        windows.append((list(range(a, b)), rng.randint(0, 6)))
    total = rng.randint(0, 10)
    boxes = [range(int(w.__floor__()), int(w.__ceil__()) + 1) for w in omegas]
    feasible = [p for p in itertools.product(*boxes)
                if sum(p) == total and all(sum(p[u] for u in m) <= cap for m, cap in windows)]
    if not feasible:
        with pytest.raises(RoundingError):
            solve_omega_lp(omegas, windows, total)
        return
    out = solve_omega_lp(omegas, windows, total)
    assert tuple(out) in feasible
