"""End-to-end acceptance checks; each prints one PASS/FAIL line."""

import itertools
import random
import statistics
import time
from fractions import Fraction as F

import pytest

from stsched.baselines import brute_force_opt, earliest_start_times
from stsched.cli import main
from stsched.containers import build_pool, extract_milp_solution
from stsched.lp import LinearProgram, solve_lp
from stsched.milp import build_milp, solve_milp, verify_milp_solution
from stsched.model import Eps, Instance, classify_jobs, makespan_guesses, round_instance
from stsched.nice import stretch, to_nice
from stsched.rounding import RoundingError, best_fit_round, solve_omega_lp
from stsched.scheme import eptas_run
from stsched.schedule import (
    check_modified_time_constraint,
    check_nice,
    check_time_constraint,
    makespan,
)

from gen import corpus_instance, fuzz_system, random_feasible_schedule, random_schedule

E4 = Eps(F(1, 4))
CORPUS_SIZE = 200


def test_modified_constraint_implies_time_constraint(record):
    rng = random.Random(1)
    t0 = time.perf_counter()
    bad = passed = 0
    for k in range(10_000):
        n, B = rng.randint(1, 10), rng.choice([2, 3, 4])
        m = rng.randint(1, 3)
        if k % 2:
            _, s = random_feasible_schedule(rng, n, m, B)
        else:
            _, s = random_schedule(rng, n, m)
        if check_modified_time_constraint(s, B, E4).ok:
            passed += 1
            bad += not check_time_constraint(s, B).ok
    dt = time.perf_counter() - t0
    record("modified check implies time check on 10^4 schedules, < 10 s",
           bad == 0 and dt < 10, f"{passed} passed the modified check, {bad} counterexamples, {dt:.1f} s")


def test_stretch_is_feasible_and_bounded(record):
    rng = random.Random(2)
    t0 = time.perf_counter()
    bad = 0
    for _ in range(1000):
        n, m, B = rng.randint(1, 10), rng.randint(1, 3), rng.choice([2, 3, 4])
        inst, s = random_feasible_schedule(rng, n, m, B)
        ri = round_instance(inst, E4)
        st = stretch(s, ri, E4)
        ok = (st.covers(ri.instance) and check_time_constraint(st, B).ok
              and makespan(st) <= (1 + E4.value) * makespan(s))
        bad += not ok
    dt = time.perf_counter() - t0
    record("stretch on 10^3 schedules: rounded-feasible, makespan <= (1+eps) original, < 30 s",
           bad == 0 and dt < 30, f"{bad} failures, {dt:.1f} s")


def test_to_nice_is_nice_and_bounded(record):
    rng = random.Random(3)
    t0 = time.perf_counter()
    bad = 0
    for _ in range(1000):
        n, m, B = rng.randint(1, 10), rng.randint(1, 3), rng.choice([2, 3, 4])
        inst, s = random_feasible_schedule(rng, n, m, B)
        ri = round_instance(inst, E4)
        st = stretch(s, ri, E4)
        ci = classify_jobs(ri, E4, makespan_guesses(ri, E4).values[-1])
        nice = to_nice(st, ci, E4, B)
        loads = {i: max(a.end for a in seq) for i, seq in st.by_machine().items()}
        ok = check_nice(nice, ci, E4, B).ok and all(
            max(a.end for a in seq) <= (1 + 17 * E4.value) * loads[i] for i, seq in nice.by_machine().items())
        bad += not ok
    dt = time.perf_counter() - t0
    record("to_nice on 10^3 schedules: nice and load <= (1+17eps) L_i, < 60 s",
           bad == 0 and dt < 60, f"{bad} failures, {dt:.1f} s")


def _grid_min_starts(quarters: list[int], B: int) -> list[int]:
    """Least start of every job over all placements in the given order on the
    quarter grid, counted in eighths so every window position is seen."""
    n = len(quarters)
    p = [2 * q for q in quarters]
    horizon = sum(p) + 8 * n
    best = [None] * n

    def fits(recent, s, e):
        for t in range(s - 7, e):
            if 1 + sum(1 for a, b in recent if a < t + 8 and b > t) > B:
                return False
        return True

    seen = set()

    def dfs(k, recent, at):
        # only intervals reaching into the last window can constrain later jobs
        recent = tuple(iv for iv in recent if iv[1] > at - 8)
        if k == n or (k, at, recent) in seen:
            return
        seen.add((k, at, recent))
        for s in range(at, horizon + 1, 2):
            e = s + p[k]
            if fits(recent, s, e):
                if best[k] is None or s < best[k]:
                    best[k] = s
                dfs(k + 1, recent + ((s, e),), e)

    dfs(0, (), 0)
    return best


def test_oracles(record):
    mismatch = []
    for length in range(1, 5):
        for seq in itertools.product([1, 2, 3, 4], repeat=length):
            for B in (2, 3):
                est = earliest_start_times([F(q, 4) for q in seq], B)
                if [8 * s for s in est] != _grid_min_starts(list(seq), B):
                    mismatch.append((seq, B))
    ok = not mismatch
    ok &= brute_force_opt(Instance.from_sizes([F(1, 2)] * 3, 1, 2))[1] == 2
    ok &= brute_force_opt(Instance.from_sizes([F(1, 2)] * 3, 2, 2))[1] == 1
    record("earliest starts match grid brute force on orders of <= 4 jobs; oracle gives 2 and 1",
           ok, f"{len(mismatch)} mismatching orders")


@pytest.fixture(scope="module")
def corpus():
    """Instances with the oracle's nice schedule in the ``c_nice <= 1/eps`` regime."""
    rng = random.Random(11)
    t0 = time.perf_counter()
    out = []
    while len(out) < CORPUS_SIZE:
        inst = corpus_instance(rng)
        ri = round_instance(inst, E4)
        s, _ = brute_force_opt(ri.instance)
        grid = makespan_guesses(ri, E4)
        nice = to_nice(s, classify_jobs(ri, E4, grid.values[-1]), E4, inst.B)
        c_nice = next(g for g in grid.values if g >= makespan(nice))
        if c_nice > E4.inv:
            continue
        out.append((inst, classify_jobs(ri, E4, c_nice), c_nice, nice))
    return out, time.perf_counter() - t0


def test_milp_extraction_and_solve(record, corpus):
    instances, t_build = corpus
    t0 = time.perf_counter()
    failures = []
    for inst, ci, c_nice, nice in instances:
        pool, sol = extract_milp_solution(nice, ci, E4, c_nice)
        extracted = verify_milp_solution(build_milp(ci, pool), sol).ok
        solved = solve_milp(build_milp(ci, build_pool(ci, E4, c_nice))) is not None
        if not (extracted and solved):
            failures.append(([str(j.size) for j in inst.jobs], inst.machines, inst.B))
    dt = t_build + time.perf_counter() - t0
    record(f"{len(instances)} tiny instances: extracted solution verifies and the MILP is feasible, < 10 min",
           not failures and len(instances) >= 200 and dt < 600, f"{len(failures)} failures, {dt:.0f} s")


def test_eptas_on_corpus(record, corpus):
    instances, _ = corpus
    bound = (1 + E4.value) ** 2 * (1 + 17 * E4.value) * (1 + 10 * E4.value)
    ratios, slow, bad = [], 0, 0
    worst = 0.0
    for inst, *_ in instances:
        t0 = time.perf_counter()
        s = eptas_run(inst, E4).schedule
        dt = time.perf_counter() - t0
        worst = max(worst, dt)
        slow += dt > 120
        _, opt = brute_force_opt(inst)
        ratio = makespan(s) / opt
        ratios.append(ratio)
        bad += not (s.covers(inst) and check_time_constraint(s, inst.B).ok and ratio <= bound)
    r = sorted(float(x) for x in ratios)
    dist = (f"ratio min {r[0]:.3f} median {statistics.median(r):.3f} p90 {r[int(0.9 * len(r))]:.3f} "
            f"max {r[-1]:.3f}, bound {float(bound):.2f}, {sum(x == 1 for x in r)} optimal, slowest {worst:.1f} s")
    record("eptas on the corpus: feasible, ratio within bound, <= 2 min per instance",
           bad == 0 and slow == 0, f"{bad} bad, {slow} slow; {dist}")


def _interval_lp(rng: random.Random) -> LinearProgram:
    n = rng.randint(2, 8)
    lp = LinearProgram()
    for k in range(n):
        lp.add_var(k, rng.randint(0, 2), rng.choice([None, rng.randint(2, 5)]))
    for _ in range(rng.randint(1, 6)):
        a, b = sorted(rng.sample(range(n + 1), 2))
        lp.add_row({k: 1 for k in range(a, b)}, rng.choice(["<=", ">=", "="]), rng.randint(0, 12))
    lp.objective = {k: rng.randint(-3, 3) for k in range(n)}
    for k in range(n):
        lp.add_row({k: 1}, "<=", 20)
    return lp


def _omega_case(rng: random.Random):
    U = rng.randint(1, 6)
    omegas = [F(rng.randint(0, 8), rng.choice([1, 2, 3, 4])) for _ in range(U)]
    windows = []
    for _ in range(rng.randint(0, 3)):
        a, b = sorted(rng.sample(range(U + 1), 2))
        windows.append((list(range(a, b)), rng.randint(0, 6)))
    return omegas, windows, rng.randint(0, 12)


def test_interval_integrality(record):
    rng = random.Random(6)
    fractional = feasible = 0
    for _ in range(1000):
        res = solve_lp(_interval_lp(rng))
        if res.feasible:
            feasible += 1
            fractional += any(v.denominator != 1 for v in res.values.values())
    wrong = 0
    for _ in range(500):
        omegas, windows, total = _omega_case(rng)
        boxes = [range(w.numerator // w.denominator, -(-w.numerator // w.denominator) + 1) for w in omegas]
        ref = {p for p in itertools.product(*boxes)
               if sum(p) == total and all(sum(p[u] for u in mem) <= cap for mem, cap in windows)}
        try:
            wrong += tuple(solve_omega_lp(omegas, windows, total)) not in ref
        except RoundingError:
            wrong += bool(ref)
    record("interval LPs have integral vertices; block-count LP matches enumeration",
           fractional == 0 and wrong == 0 and feasible > 0,
           f"{feasible} feasible LPs, {fractional} fractional, {wrong} block-count mismatches")


def test_best_fit(record):
    rng = random.Random(7)
    bad = 0
    for _ in range(1000):
        y, caps, loads, sizes = fuzz_system(rng, rng.randint(1, 30), rng.randint(1, 8))
        out = best_fit_round(y, caps, loads, sizes)
        pmax = max(sizes.values())
        got = {k: 0 for k in caps}
        load = {k: F(0) for k in caps}
        for j, k in out.items():
            got[k] += 1
            load[k] += sizes[j]
        bad += set(out) != set(y) or got != caps or any(load[k] > loads[k] + pmax for k in caps)
    y, caps, loads, sizes = fuzz_system(random.Random(8), 100_000, 1000)
    t0 = time.perf_counter()
    out = best_fit_round(y, caps, loads, sizes)
    dt = time.perf_counter() - t0
    record("Best-Fit on 10^3 fuzzed systems exact and within t_k + p_max; n = 10^5 in < 5 s",
           bad == 0 and len(out) == 100_000 and dt < 5, f"{bad} failures, smoke {dt:.2f} s")


def test_bench_is_deterministic(record, tmp_path):
    outs = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / name
        assert main(["bench", "--seed", "7", "--count", "4", "--max-jobs", "4", "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    rows = len(outs[0].splitlines()) - 1
    record("bench --seed twice gives byte-identical CSV", outs[0] == outs[1] and rows > 0, f"{rows} rows")
