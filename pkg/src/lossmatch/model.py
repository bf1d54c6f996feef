"""Core domain types: market instances, student types, rank-ordered lists.

Schools are identified by the integers 1..m.  A rank-ordered list (ROL) is a
full permutation of the school ids; an optional outside option is a designated
school with unlimited capacity whose match value is normalized to zero, so that
ranking a school behind it amounts to dropping that school.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import permutations
from typing import Mapping, Sequence

TOL = 1e-12


@dataclass(frozen=True)
class Rol:
    """A reported ranking of schools; position 0 is the most preferred report."""

    ranking: tuple[int, ...]

    def __post_init__(self):
        m = len(self.ranking)
        if sorted(self.ranking) != list(range(1, m + 1)):
            raise ValueError(f"ROL must be a permutation of 1..{m}: {self.ranking}")

    def __iter__(self):
        return iter(self.ranking)

    def __len__(self):
        return len(self.ranking)

    def __getitem__(self, i):
        return self.ranking[i]

    def position(self, school: int) -> int:
        """0-based position of ``school`` in the list."""
        return self.ranking.index(school)

    def compact(self) -> str:
        if len(self.ranking) <= 9:
            return "".join(str(s) for s in self.ranking)
        return "-".join(str(s) for s in self.ranking)

    @classmethod
    def parse(cls, text: str) -> "Rol":
        text = text.strip()
        if "-" in text:
            return cls(tuple(int(t) for t in text.split("-")))
        return cls(tuple(int(ch) for ch in text))

    def __str__(self):
        return self.compact()


def all_rols(m: int) -> list[Rol]:
    return [Rol(p) for p in permutations(range(1, m + 1))]


def canonicalize_rol(rol: Rol, outside: int | None) -> Rol:
    """Rewrite the (irrelevant) ranking behind the outside option in ascending order.

    Two ROLs induce the same outcome lottery iff their canonical forms coincide,
    because the outside option is always attainable and everything ranked after
    it can never be reached.
    """
    if outside is None:
        return rol
    if outside not in rol.ranking:
        raise ValueError(f"outside option {outside} not in ROL {rol}")
    k = rol.position(outside)
    suffix = tuple(sorted(rol.ranking[k + 1 :]))
    return Rol(rol.ranking[: k + 1] + suffix)


def canonical_rols(m: int, outside: int | None) -> list[Rol]:
    """All canonical ROLs, lexicographically ordered."""
    seen = {}
    for rol in all_rols(m):
        c = canonicalize_rol(rol, outside)
        seen[c.ranking] = c
    return [seen[r] for r in sorted(seen)]


def n_canonical(m: int) -> int:
    """Count of canonical ROLs when school m is an outside option."""
    return sum(math.factorial(m - 1) // math.factorial(i - 1) for i in range(1, m + 1))


def relabel_by_preference(values: Sequence) -> tuple[int, ...]:
    """Permutation sending each school to its preference rank (1 = best).

    Ties are rejected: with continuous types indifferences occur with
    probability zero and every characterization here assumes strict preferences.
    """
    if len(set(values)) != len(values):
        raise ValueError("indifference unsupported: values must be strictly distinct")
    order = sorted(range(len(values)), key=lambda i: values[i], reverse=True)
    ranks = [0] * len(values)
    for rank, idx in enumerate(order, start=1):
        ranks[idx] = rank
    return tuple(ranks)


def truthful_rol(values: Sequence) -> Rol:
    """The ROL listing schools in strictly decreasing match-value order."""
    ranks = relabel_by_preference(values)
    order = sorted(range(1, len(values) + 1), key=lambda s: ranks[s - 1])
    return Rol(tuple(order))


@dataclass(frozen=True)
class StudentType:
    """A student's private type: match values, priorities, and loss parameters.

    ``values[s-1]`` is the cardinal utility of school s.  Priorities are either
    a per-school vector ``priorities[s-1]`` (the payoff school s receives from
    this student) or, under common priorities, a single ``score``.  The
    loss-dominance parameter eta*(lam-1) is what drives reporting behavior.
    """

    values: tuple
    priorities: tuple | None = None
    score: object = None
    eta: object = 0
    lam: object = 1

    @property
    def loss_dominance(self):
        return self.eta * (self.lam - 1)

    @classmethod
    def from_loss_dominance(cls, values, lam_dom, priorities=None, score=None) -> "StudentType":
        # eta = lam_dom with lam = 2 reproduces any lam_dom >= 0 exactly
        return cls(tuple(values), priorities, score, eta=lam_dom, lam=2)

    def priority_at(self, school: int):
        if self.priorities is not None:
            return self.priorities[school - 1]
        if self.score is not None:
            return self.score
        raise ValueError("type has neither a priority vector nor a score")


@dataclass(frozen=True)
class Instance:
    """A school-choice market: m schools with capacities and a student set."""

    capacities: tuple[int, ...]
    students: tuple
    outside: int | None = None

    @property
    def m(self) -> int:
        return len(self.capacities)

    @property
    def n(self) -> int:
        return len(self.students)

    @property
    def schools(self) -> range:
        return range(1, self.m + 1)


# --- type distributions -----------------------------------------------------


class Uniform01:
    """The uniform score law on [0, 1]."""

    def cdf(self, x):
        if x < 0 or x > 1:
            raise ValueError(f"score {x} outside [0, 1]")
        return x

    def sample(self, rng, size=None):
        return rng.random(size)

    def to_json(self):
        return {"kind": "uniform01"}


class TabulatedCdf:
    """A score law given by a tabulated monotone CDF, linearly interpolated."""

    def __init__(self, xs: Sequence, ps: Sequence):
        xs, ps = list(xs), list(ps)
        if len(xs) != len(ps) or len(xs) < 2:
            raise ValueError("tabulated CDF needs matching x/p lists of length >= 2")
        if any(b < a for a, b in zip(ps, ps[1:])) or ps[0] != 0 or ps[-1] != 1:
            raise ValueError("tabulated CDF must be nondecreasing from 0 to 1")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("tabulated CDF grid must be strictly increasing")
        self.xs, self.ps = xs, ps

    def cdf(self, x):
        if x < self.xs[0] or x > self.xs[-1]:
            raise ValueError(f"score {x} outside CDF domain [{self.xs[0]}, {self.xs[-1]}]")
        for (x0, p0), (x1, p1) in zip(zip(self.xs, self.ps), zip(self.xs[1:], self.ps[1:])):
            if x <= x1:
                return p0 + (p1 - p0) * (x - x0) / (x1 - x0)
        return self.ps[-1]

    def sample(self, rng, size=None):
        import numpy as np

        u = rng.random(size)
        return np.interp(u, [float(p) for p in self.ps], [float(x) for x in self.xs])

    def to_json(self):
        return {"kind": "tabulated", "x": [str(v) for v in self.xs], "p": [str(v) for v in self.ps]}


UNIFORM01 = Uniform01()


@dataclass(frozen=True)
class JointSupport:
    """Finite joint distribution over full type profiles (arbitrary correlation)."""

    cases: tuple  # of (prob, mapping student -> StudentType)

    def total(self):
        return sum(p for p, _ in self.cases)


@dataclass(frozen=True)
class IndependentTypes:
    """Independent per-student samplers under common priorities.

    Each student draws (values, loss dominance) from a finite support and a
    score from the common continuous law; scores are iid across students.
    A student with a ``fixed_score`` entry has her score pinned (useful for
    focal-student experiments).
    """

    supports: Mapping  # student -> tuple of (prob, values, lam_dom)
    score_law: object = UNIFORM01
    fixed_scores: Mapping = field(default_factory=dict)

    def support_for(self, student):
        return self.supports[student]


TypeDistribution = JointSupport | IndependentTypes


def validate_instance(instance: Instance, types: TypeDistribution | None = None) -> list[str]:
    """Report-style validation: returns the list of violated invariants."""
    problems = []
    for s, q in zip(instance.schools, instance.capacities):
        if q < 1:
            problems.append(f"capacity >= 1 violated at school {s} (q={q})")
    if instance.outside is not None:
        if instance.outside not in instance.schools:
            problems.append(f"outside option {instance.outside} is not a school id")
        elif instance.capacities[instance.outside - 1] < instance.n:
            problems.append(
                f"outside option capacity {instance.capacities[instance.outside - 1]} "
                f"< {instance.n} students"
            )
    if len(set(instance.students)) != instance.n:
        problems.append("duplicate student identifiers")

    if isinstance(types, JointSupport):
        tot = types.total()
        if abs(tot - 1) > TOL:
            problems.append(f"joint support probabilities sum to {tot}, not 1")
        for prob, profile in types.cases:
            if prob < 0:
                problems.append("negative probability in joint support")
            for i, theta in profile.items():
                problems.extend(_validate_type(instance, i, theta))
    elif isinstance(types, IndependentTypes):
        for i in instance.students:
            if i not in types.supports:
                problems.append(f"no sampler for student {i}")
                continue
            tot = sum(p for p, _, _ in types.supports[i])
            if abs(tot - 1) > TOL:
                problems.append(f"sampler for student {i} sums to {tot}, not 1")
            for _, values, lam_dom in types.supports[i]:
                if len(values) != instance.m:
                    problems.append(f"student {i} values length {len(values)} != m={instance.m}")
                elif instance.outside is not None and values[instance.outside - 1] != 0:
                    problems.append(f"student {i} outside value must be 0")
                if lam_dom < 0:
                    problems.append(f"student {i} loss dominance {lam_dom} < 0")
    return problems


def _validate_type(instance: Instance, student, theta: StudentType) -> list[str]:
    problems = []
    if len(theta.values) != instance.m:
        problems.append(f"student {student} values length {len(theta.values)} != m={instance.m}")
        return problems
    if instance.outside is not None and theta.values[instance.outside - 1] != 0:
        problems.append(f"student {student} outside value must be 0")
    if theta.eta < 0:
        problems.append(f"student {student} eta {theta.eta} < 0")
    if abs(theta.loss_dominance - theta.eta * (theta.lam - 1)) > TOL:
        problems.append(f"student {student} loss dominance inconsistent")
    return problems
