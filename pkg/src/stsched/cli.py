"""Command-line entry point: ``stsched {solve,validate,transform-nice,bench}``.

Exit codes: 0 success, 1 infeasible or rejected by a validator, 2 malformed
input.
"""

from __future__ import annotations

import argparse
import csv
import json
import random
import sys
import time
from fractions import Fraction
from typing import Optional

from .baselines import OracleCaps, brute_force_opt, list_scheduling, lpt
from .containers import EnumCaps
from .io import FormatError, instance_from_json, instance_to_json, load_json, schedule_from_json, schedule_to_json
from .milp import SolverBudget
from .model import Eps, Instance, classify_jobs, makespan_guesses, round_instance
from .nice import stretch, to_nice
from .schedule import Schedule, check_modified_time_constraint, check_nice, check_time_constraint, makespan
from .scheme import SchemeCaps, eptas_run

CSV_HEADER = ["instance", "algo", "makespan", "opt", "ratio", "ms"]
DEFAULT_EPS = "1/4"


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _write(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _eps(args, fallback: Optional[Eps]) -> Eps:
    if args.epsilon is not None:
        try:
            return Eps.parse(args.epsilon)
        except ValueError as exc:
            raise CliError(2, f"--epsilon: {exc}") from None
    return fallback or Eps.parse(DEFAULT_EPS)


def _scheme_caps(args) -> SchemeCaps:
    return SchemeCaps(
        EnumCaps(args.caps_containers, args.caps_configurations),
        SolverBudget(args.caps_nodes, args.caps_seconds),
    )


def _oracle_caps(args) -> OracleCaps:
    return OracleCaps(max_jobs=args.caps_oracle_jobs, max_machines=args.caps_oracle_machines,
                      time_budget=args.caps_seconds)


def _checked(s: Schedule, inst: Instance) -> Schedule:
    """Every schedule passes the validator before it is written."""
    if not s.covers(inst):
        raise CliError(1, "schedule does not place every job exactly once")
    v = check_time_constraint(s, inst.B)
    if not v.ok:
        raise CliError(1, "time constraint violated: " + json.dumps(v.to_json()))
    return s


def _run(algo: str, inst: Instance, eps: Eps, args, dumps: bool = False) -> Schedule:
    if algo == "ls":
        return list_scheduling(inst)
    if algo == "lpt":
        return lpt(inst)
    if algo == "bruteforce":
        try:
            return brute_force_opt(inst, _oracle_caps(args))[0]
        except (ValueError, TimeoutError) as exc:
            raise CliError(1, f"oracle: {exc}") from None
    try:
        run = eptas_run(inst, eps, _scheme_caps(args))
    except RuntimeError as exc:
        raise CliError(1, f"eptas: {exc}") from None
    if dumps:
        if args.dump_pools and run.pool is not None:
            _write(json.dumps(run.pool.to_json(), indent=1) + "\n", args.dump_pools)
        if args.dump_milp and run.model is not None:
            _write(run.model.dump(), args.dump_milp)
        if args.dump_plan and run.plans:
            _write(json.dumps([p.to_json() for p in run.plans], indent=1) + "\n", args.dump_plan)
    return run.schedule


def _load_instance(path: str) -> tuple[Instance, Optional[Eps]]:
    return instance_from_json(load_json(path))


def cmd_solve(args) -> int:
    inst, file_eps = _load_instance(args.instance)
    eps = _eps(args, file_eps)
    s = _checked(_run(args.algo, inst, eps, args, dumps=True), inst)
    _write(json.dumps(schedule_to_json(s), indent=1) + "\n", args.out)
    print(f"algo={args.algo} jobs={inst.n} machines={inst.machines} B={inst.B} makespan={makespan(s)}",
          file=sys.stderr)
    return 0


def cmd_validate(args) -> int:
    inst, file_eps = _load_instance(args.instance)
    s = schedule_from_json(load_json(args.schedule), inst)
    v = check_time_constraint(s, inst.B)
    out = {"time_constraint": v.to_json(), "makespan": str(makespan(s))}
    if args.epsilon is not None:
        out["modified_time_constraint"] = check_modified_time_constraint(s, inst.B, _eps(args, file_eps)).to_json()
    print(json.dumps(out, indent=1))
    return 0 if v.ok else 1


def cmd_transform_nice(args) -> int:
    """Stretch the schedule onto rounded sizes, then make it nice."""
    inst, file_eps = _load_instance(args.instance)
    eps = _eps(args, file_eps)
    s = schedule_from_json(load_json(args.schedule), inst)
    v = check_time_constraint(s, inst.B)
    if not v.ok:
        raise CliError(1, "input violates the time constraint: " + json.dumps(v.to_json()))
    ri = round_instance(inst, eps)
    st = stretch(s, ri, eps)
    guess = next((g for g in makespan_guesses(ri, eps) if g >= makespan(st)), None)
    if guess is None:
        guess = max(makespan(st), ri.p_max)
    ci = classify_jobs(ri, eps, guess)
    nice = to_nice(st, ci, eps, inst.B)
    nv = check_nice(nice, ci, eps, inst.B)
    if not nv.ok:
        raise CliError(1, "result is not nice: " + json.dumps(nv.to_json()))
    _checked(nice, ri.instance)
    _write(json.dumps(schedule_to_json(nice), indent=1) + "\n", args.out)
    return 0


def random_instance(rng: random.Random, eps: Eps, n: int, m: int, B: int, sizes: str) -> Instance:
    """``sizes`` is ``powers`` (powers of ``1 + eps`` in [1/4, 2]) or
    ``uniform`` (multiples of 1/20 in (0, 2])."""
    if sizes == "powers":
        exps = range(-int(1 / (eps.value / 2)), int(1 / eps.value) + 1)
        palette = [eps.base**e for e in exps if Fraction(1, 4) <= eps.base**e <= 2]
        values = [rng.choice(palette) for _ in range(n)]
    else:
        values = [Fraction(rng.randint(1, 40), 20) for _ in range(n)]
    return Instance.from_sizes(values, m, B)


def bench_rows(args) -> list[list[str]]:
    eps = _eps(args, None)
    rng = random.Random(args.seed)
    rows = []
    for k in range(args.count):
        n = rng.randint(1, args.max_jobs)
        m = rng.randint(1, args.max_machines)
        B = rng.randint(2, args.max_b)
        inst = random_instance(rng, eps, n, m, B, args.sizes)
        name = f"i{k:03d}"
        opt = None
        if n <= args.caps_oracle_jobs and m <= args.caps_oracle_machines:
            try:
                opt = brute_force_opt(inst, _oracle_caps(args))[1]
            except TimeoutError:
                opt = None
        for algo in args.algos.split(","):
            if algo == "bruteforce" and opt is None:
                continue
            t0 = time.perf_counter()
            try:
                s = _checked(_run(algo, inst, eps, args), inst)
            except CliError as exc:
                print(f"{name} {algo}: {exc}", file=sys.stderr)
                rows.append([name, algo, "", str(opt or ""), "", ""])
                continue
            ms = f"{(time.perf_counter() - t0) * 1000:.1f}" if args.timing else ""
            c = makespan(s)
            ratio = f"{float(c / opt):.6f}" if opt else ""
            rows.append([name, algo, str(c), "" if opt is None else str(opt), ratio, ms])
        if args.save_instances:
            with open(f"{args.save_instances}/{name}.json", "w") as fh:
                json.dump(instance_to_json(inst, eps), fh, indent=1)
    return rows


def cmd_bench(args) -> int:
    if args.algos and not set(args.algos.split(",")) <= {"ls", "lpt", "bruteforce", "eptas"}:
        raise CliError(2, f"unknown algorithm in --algos {args.algos!r}")
    rows = bench_rows(args)
    out = sys.stdout if args.out in (None, "-") else open(args.out, "w", newline="")
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(CSV_HEADER)
        w.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stsched", description="Makespan scheduling with a unit-window job limit.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--epsilon", help="accuracy 1/k, e.g. 1/4 (default: the instance's, else 1/4)")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--caps-containers", type=int, default=EnumCaps.max_containers)
    common.add_argument("--caps-configurations", type=int, default=EnumCaps.max_configurations)
    common.add_argument("--caps-nodes", type=int, default=SolverBudget.max_nodes)
    common.add_argument("--caps-seconds", type=float, default=SolverBudget.seconds)
    common.add_argument("--caps-oracle-jobs", type=int, default=OracleCaps.max_jobs)
    common.add_argument("--caps-oracle-machines", type=int, default=OracleCaps.max_machines)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common], help="schedule an instance")
    s.add_argument("instance")
    s.add_argument("--algo", choices=["ls", "lpt", "bruteforce", "eptas"], default="eptas")
    s.add_argument("--dump-pools", metavar="FILE")
    s.add_argument("--dump-milp", metavar="FILE")
    s.add_argument("--dump-plan", metavar="FILE")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("validate", parents=[common], help="check a schedule")
    v.add_argument("instance")
    v.add_argument("schedule")
    v.set_defaults(func=cmd_validate)

    t = sub.add_parser("transform-nice", parents=[common], help="round and make a schedule nice")
    t.add_argument("instance")
    t.add_argument("schedule")
    t.set_defaults(func=cmd_transform_nice)

    b = sub.add_parser("bench", parents=[common], help="seeded benchmark, CSV output")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--count", type=int, default=10)
    b.add_argument("--max-jobs", type=int, default=6)
    b.add_argument("--max-machines", type=int, default=2)
    b.add_argument("--max-b", type=int, default=3)
    b.add_argument("--sizes", choices=["powers", "uniform"], default="powers")
    b.add_argument("--algos", default="ls,lpt,bruteforce,eptas")
    b.add_argument("--timing", action="store_true", help="fill the ms column (breaks byte-identical output)")
    b.add_argument("--save-instances", metavar="DIR")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
