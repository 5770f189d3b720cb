"""Instances, geometric size rounding, the makespan guess grid and job classes.

Every quantity is an exact :class:`fractions.Fraction`; powers of ``1 + eps``
are computed by exact comparison, never through floating point logs alone.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence


def as_fraction(value) -> Fraction:
    """Parse ``"p/q"``, ``"0.25"``, ints or Fractions into a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        # floats only enter through tests and user input; take the shortest repr
        return Fraction(repr(value))
    raise TypeError(f"cannot interpret {value!r} as a rational")


@dataclass(frozen=True)
class Eps:
    """Accuracy parameter restricted to ``1/k`` with integer ``k >= 4``."""

    value: Fraction

    def __post_init__(self) -> None:
        v = as_fraction(self.value)
        object.__setattr__(self, "value", v)
        if v <= 0 or v.numerator != 1 or v.denominator <= 3:
            raise ValueError(f"epsilon must be 1/k for an integer k > 3, got {v}")

    @classmethod
    def parse(cls, text) -> "Eps":
        return cls(as_fraction(text))

    @property
    def inv(self) -> int:
        """The integer ``1/eps``."""
        return self.value.denominator

    @property
    def sq(self) -> Fraction:
        return self.value * self.value

    @property
    def base(self) -> Fraction:
        """The rounding base ``1 + eps``."""
        return 1 + self.value

    def __str__(self) -> str:
        return f"1/{self.inv}"


def ceil_exponent(x: Fraction, base: Fraction) -> int:
    """Smallest integer ``e`` with ``base**e >= x`` (exact)."""
    x = as_fraction(x)
    if x <= 0:
        raise ValueError("x must be positive")
    e = math.ceil(math.log(float(x)) / math.log(float(base)))
    while base**e < x:
        e += 1
    while base ** (e - 1) >= x:
        e -= 1
    return e


def floor_exponent(x: Fraction, base: Fraction) -> int:
    """Largest integer ``e`` with ``base**e <= x`` (exact)."""
    x = as_fraction(x)
    if x <= 0:
        raise ValueError("x must be positive")
    e = math.floor(math.log(float(x)) / math.log(float(base)))
    while base**e > x:
        e -= 1
    while base ** (e + 1) <= x:
        e += 1
    return e


def round_up_power(x, eps: Eps) -> Fraction:
    """``(1+eps)**ceil(log_{1+eps} x)``."""
    return eps.base ** ceil_exponent(as_fraction(x), eps.base)


def round_down_power(x, eps: Eps) -> Fraction:
    """``(1+eps)**floor(log_{1+eps} x)``."""
    return eps.base ** floor_exponent(as_fraction(x), eps.base)


@dataclass(frozen=True)
class Job:
    id: str
    size: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "size", as_fraction(self.size))
        if self.size <= 0:
            raise ValueError(f"job {self.id!r} has non-positive size {self.size}")


@dataclass(frozen=True)
class Instance:
    jobs: tuple[Job, ...]
    machines: int
    burst_limit: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "jobs", tuple(self.jobs))
        if self.burst_limit < 2:
            raise ValueError("burst limit B must be at least 2")
        if self.machines < 1:
            raise ValueError("machine count must be positive")
        ids = [j.id for j in self.jobs]
        if len(set(ids)) != len(ids):
            raise ValueError("job ids must be unique")

    @classmethod
    def from_sizes(cls, sizes: Iterable, machines: int = 1, burst_limit: int = 2) -> "Instance":
        jobs = tuple(Job(f"j{i}", as_fraction(s)) for i, s in enumerate(sizes))
        return cls(jobs, machines, burst_limit)

    @property
    def n(self) -> int:
        return len(self.jobs)

    @property
    def B(self) -> int:
        return self.burst_limit

    def size_of(self) -> dict[str, Fraction]:
        return {j.id: j.size for j in self.jobs}

    @property
    def p_max(self) -> Fraction:
        return max((j.size for j in self.jobs), default=Fraction(0))


@dataclass(frozen=True)
class RoundedInstance:
    base: Instance
    rounded_sizes: Mapping[str, Fraction]

    @property
    def instance(self) -> Instance:
        """The rounded instance as a plain :class:`Instance`."""
        return Instance(
            tuple(Job(j.id, self.rounded_sizes[j.id]) for j in self.base.jobs),
            self.base.machines,
            self.base.burst_limit,
        )

    @property
    def p_max(self) -> Fraction:
        return max(self.rounded_sizes.values(), default=Fraction(0))


def round_instance(inst: Instance, eps: Eps) -> RoundedInstance:
    return RoundedInstance(inst, {j.id: round_up_power(j.size, eps) for j in inst.jobs})


class JobClass(enum.IntEnum):
    # order matters: nice schedules run classes in non-decreasing rank
    TINY = 0
    SMALL = 1
    MEDIUM = 2
    LARGE = 3

    @property
    def rank(self) -> int:
        return 0 if self in (JobClass.TINY, JobClass.SMALL) else int(self) - 1


@dataclass(frozen=True)
class ClassifiedInstance:
    rounded: RoundedInstance
    eps: Eps
    cmax_guess: Fraction
    theta: Fraction
    class_of: Mapping[str, JobClass]
    small_sizes: tuple[Fraction, ...]
    large_sizes: tuple[Fraction, ...]

    @property
    def sizes(self) -> Mapping[str, Fraction]:
        return self.rounded.rounded_sizes

    @property
    def machines(self) -> int:
        return self.rounded.base.machines

    @property
    def B(self) -> int:
        return self.rounded.base.burst_limit

    def jobs_of(self, cls: JobClass) -> list[str]:
        """Ids of the jobs in a class, in instance order."""
        return [j.id for j in self.rounded.base.jobs if self.class_of[j.id] is cls]

    def count_by_size(self, cls: JobClass) -> dict[Fraction, int]:
        out: dict[Fraction, int] = {}
        for jid in self.jobs_of(cls):
            p = self.sizes[jid]
            out[p] = out.get(p, 0) + 1
        return out


def classify_jobs(ri: RoundedInstance, eps: Eps, cmax_guess) -> ClassifiedInstance:
    cmax_guess = as_fraction(cmax_guess)
    if ri.rounded_sizes and ri.p_max > cmax_guess:
        raise ValueError(f"guess too small: p'_max={ri.p_max} > {cmax_guess}")
    e = eps.value
    theta = max(e * cmax_guess, Fraction(eps.inv))
    class_of: dict[str, JobClass] = {}
    for jid, p in ri.rounded_sizes.items():
        if p <= eps.sq:
            class_of[jid] = JobClass.TINY
        elif p <= eps.inv:
            class_of[jid] = JobClass.SMALL
        elif p <= theta:
            class_of[jid] = JobClass.MEDIUM
        else:
            class_of[jid] = JobClass.LARGE
    small = sorted({p for jid, p in ri.rounded_sizes.items() if class_of[jid] is JobClass.SMALL})
    large = sorted({p for jid, p in ri.rounded_sizes.items() if class_of[jid] is JobClass.LARGE})
    return ClassifiedInstance(ri, eps, cmax_guess, theta, class_of, tuple(small), tuple(large))


def small_size_bound(eps: Eps) -> float:
    """Upper bound on the number of distinct small sizes."""
    return math.log(eps.inv**3) / math.log(float(eps.base)) + 1


def large_size_bound(eps: Eps) -> float:
    return math.log(eps.inv) / math.log(float(eps.base)) + 1


@dataclass(frozen=True)
class GuessGrid:
    values: tuple[Fraction, ...]
    below_one_flag: bool = False

    def __iter__(self):
        return iter(self.values)

    def __len__(self) -> int:
        return len(self.values)


def makespan_guesses(ri: RoundedInstance, eps: Eps) -> GuessGrid:
    n = len(ri.rounded_sizes)
    if n == 0:
        raise ValueError("no jobs")
    p_max = ri.p_max
    lo = max(Fraction(1), p_max)
    hi = eps.base * n * (1 + p_max)
    e = ceil_exponent(lo, eps.base)
    values = []
    while eps.base**e <= hi:
        values.append(eps.base**e)
        e += 1
    return GuessGrid(tuple(values), below_one_flag=p_max < 1)
