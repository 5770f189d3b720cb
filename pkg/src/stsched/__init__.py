"""Makespan scheduling on identical machines where every unit-length window
of a machine meets at most ``B`` jobs: validators, baselines, an exact
oracle and an approximation scheme built on a configuration MILP."""

from .baselines import OracleCaps, brute_force_opt, earliest_start_times, list_scheduling, lpt
from .containers import EnumCaps, EnumerationCapExceeded, build_pool, extract_milp_solution
from .lp import LinearProgram, solve_lp
from .milp import SolverBudget, SolverBudgetExceeded, build_milp, solve_milp, verify_milp_solution
from .model import Eps, Instance, Job, classify_jobs, makespan_guesses, round_instance
from .nice import stretch, to_nice
from .rounding import RoundingError, best_fit_round, round_milp_to_schedule, solve_omega_lp
from .schedule import (
    Schedule,
    ScheduledJob,
    Verdict,
    check_modified_time_constraint,
    check_nice,
    check_time_constraint,
    makespan,
)
from .scheme import NotApplicable, SchemeCaps, eptas, eptas_run

__all__ = [name for name in dir() if not name.startswith("_")]
