import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from stsched.baselines import brute_force_opt
from stsched.model import Eps, Instance
from stsched.schedule import Schedule, check_time_constraint, makespan
from stsched.scheme import NotApplicable, eptas, eptas_run, small_makespan_case

E4 = Eps(F(1, 4))
BOUND = (1 + E4.value) ** 2 * (1 + 17 * E4.value) * (1 + 10 * E4.value)


def _ok(inst, s):
    return s.covers(inst) and check_time_constraint(s, inst.B).ok


def test_bound_value():
    assert BOUND == F(25, 16) * F(21, 4) * F(7, 2)
    assert round(float(BOUND), 1) == 28.7


def test_single_job():
    inst = Instance.from_sizes([3])
    s = eptas(inst, E4)
    assert _ok(inst, s) and makespan(s) == 3


def test_empty_instance():
    assert len(eptas(Instance((), 2, 2), E4)) == 0


@pytest.mark.parametrize("sizes,m,B", [([F(1, 2)] * 3, 1, 2), ([2] * 4, 1, 2), ([F(1, 2)] * 3, 2, 2)])
def test_examples_within_bound(sizes, m, B):
    inst = Instance.from_sizes(sizes, m, B)
    s = eptas(inst, E4)
    _, opt = brute_force_opt(inst)
    assert _ok(inst, s)
    assert makespan(s) <= BOUND * opt


def test_run_log_records_rejected_guesses():
    run = eptas_run(Instance.from_sizes([F(1, 2)] * 3, 1, 2), E4)
    outcomes = [o for _, o in run.log]
    assert outcomes[-1] == "scheduled" and "infeasible" in outcomes
    assert run.guess is not None and run.pool is not None


def test_below_one_one_job_per_machine():
    s = small_makespan_case(Instance.from_sizes([F(1, 10)] * 2, 3, 2), E4)
    assert isinstance(s, Schedule)
    assert sorted(len(s.on_machine(i)) for i in range(3)) == [0, 1, 1]


def test_below_one_balanced():
    s = small_makespan_case(Instance.from_sizes([F(1, 5)] * 4, 2, 2), E4)
    assert makespan(s) == F(2, 5)


def test_below_one_not_applicable():
    assert isinstance(small_makespan_case(Instance.from_sizes([2], 2, 2), E4), NotApplicable)
    assert isinstance(small_makespan_case(Instance.from_sizes([F(1, 5)] * 5, 2, 2), E4), NotApplicable)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_eptas_on_small_random_instances(seed):
    rng = random.Random(seed)
    sizes = [rng.choice([F(1, 10), F(1, 5), F(1, 4), F(1, 2), F(3, 4)]) for _ in range(rng.randint(1, 4))]
    inst = Instance.from_sizes(sizes, rng.randint(1, 2), rng.randint(2, 3))
    s = eptas(inst, E4)
    _, opt = brute_force_opt(inst)
    assert _ok(inst, s) and makespan(s) <= BOUND * opt
