"""Attainability distributions and the lotteries that ROLs induce from them.

A school is attainable when ranking it first gets the student admitted, which
in a strategy-proof mechanism is independent of the rest of her list.  The
distribution over binary attainability states therefore summarizes everything
the student needs to evaluate a report: the lottery induced by an ROL assigns
each state's mass to the highest-ranked attainable school in it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations, product
from typing import Callable, Mapping

from .mechanisms import attainable_schools
from .model import UNIFORM01, Instance, Rol, StudentType, truthful_rol
from .rngs import substream

TOL = 1e-12

State = tuple  # of 0/1 ints, one per school


@dataclass(frozen=True)
class AttainabilityDistribution:
    """Sparse probability mass over attainability states (A_1, ..., A_m)."""

    m: int
    mass: Mapping[State, object]
    outside: int | None = None

    def validate(self) -> list[str]:
        problems = []
        total = sum(self.mass.values())
        if abs(total - 1) > TOL:
            problems.append(f"state masses sum to {total}, not 1")
        for state, p in self.mass.items():
            if len(state) != self.m:
                problems.append(f"state {state} has wrong length")
            if p < 0:
                problems.append(f"negative mass at {state}")
            if self.outside is not None and p > 0 and state[self.outside - 1] != 1:
                problems.append(f"outside option unattainable in positive-mass state {state}")
        return problems

    def marginal(self, school: int):
        """p_s = P(A_s = 1)."""
        return sum(p for state, p in self.mass.items() if state[school - 1] == 1)

    def states(self):
        return {s: p for s, p in self.mass.items() if p > 0}

    def to_json(self) -> list:
        rows = []
        for state in sorted(self.mass, reverse=True):
            p = self.mass[state]
            rows.append({"state": "".join(str(b) for b in state), "prob": _num_str(p)})
        return rows


@dataclass(frozen=True)
class Lottery:
    """Match probabilities over schools; probs[s-1] is the chance of school s."""

    probs: tuple

    def __post_init__(self):
        if any(p < 0 for p in self.probs):
            raise ValueError("negative lottery probability")
        if abs(sum(self.probs) - 1) > TOL:
            raise ValueError(f"lottery sums to {sum(self.probs)}")

    def __getitem__(self, i):
        return self.probs[i]

    def __len__(self):
        return len(self.probs)


def _num_str(x) -> str:
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)
    return repr(float(x))


def induced_lottery(rol: Rol, dist: AttainabilityDistribution) -> Lottery:
    """f_{s_k} = P(A_{s_l} = 0 for all l < k, A_{s_k} = 1)."""
    f = [0] * dist.m
    for state, p in dist.mass.items():
        if p == 0:
            continue
        for s in rol:
            if state[s - 1] == 1:
                f[s - 1] += p
                break
        else:
            raise ValueError(
                f"state {state} has no attainable school; include an outside option"
            )
    return Lottery(tuple(f))


def has_full_support(dist: AttainabilityDistribution) -> bool:
    """Every attainability combination of the non-outside schools has positive mass."""
    real = [s for s in range(1, dist.m + 1) if s != dist.outside]
    seen = set()
    for state, p in dist.mass.items():
        if p > 0:
            seen.add(tuple(state[s - 1] for s in real))
    return len(seen) == 2 ** len(real)


def is_exclusive(dist: AttainabilityDistribution, school: int) -> bool:
    """Attainability at ``school`` implies non-attainability somewhere else."""
    for state, p in dist.mass.items():
        if p > 0 and state[school - 1] == 1:
            if all(state[j] == 1 for j in range(dist.m) if j != school - 1):
                return False
    return True


# --- exact computation ------------------------------------------------------


def _score_order_cases(others: list, u):
    """Orderings of the others' scores around a focal quantile u = G(omega).

    Yields (probability, below, above) where ``below``/``above`` are the other
    students in ascending score order on each side of the focal student.
    Probabilities are exact when u is a Fraction.
    """
    k = len(others)
    for mask in range(2**k):
        below_set = [others[j] for j in range(k) if mask >> j & 1]
        above_set = [others[j] for j in range(k) if not mask >> j & 1]
        base = (
            u ** len(below_set)
            * (1 - u) ** len(above_set)
            / (math.factorial(len(below_set)) * math.factorial(len(above_set)))
        )
        for below in permutations(below_set):
            for above in permutations(above_set):
                yield base, list(below), list(above)


def exact_attainability(
    instance: Instance,
    focal,
    focal_score,
    others_supports: Mapping,
    strategy: Callable,
    score_law=UNIFORM01,
    cap: int = 500_000,
) -> AttainabilityDistribution:
    """Exact attainability under common priorities with iid continuous scores.

    ``others_supports[j]`` is a finite support of (prob, values, lam_dom) for
    each other student; ``strategy(student, StudentType)`` maps a drawn type to
    its reported ROL and must not depend on the score (the type it receives has
    score None).  Integrates over score orderings in closed form, so rational
    inputs produce exact rational masses.
    """
    others = [i for i in instance.students if i != focal]
    u = score_law.cdf(focal_score)
    n_cases = sum(
        math.comb(len(others), k) * math.factorial(k) * math.factorial(len(others) - k)
        for k in range(len(others) + 1)
    ) * math.prod(len(others_supports[j]) for j in others)
    if n_cases > cap:
        raise ValueError(f"support too large: {n_cases} cases > cap {cap}")

    mass: dict[State, object] = {}
    for order_p, below, above in _score_order_cases(others, u):
        if order_p == 0:
            continue
        scores = {focal: focal_score}
        nb, na = len(below), len(above)
        for j, student in enumerate(below, start=1):
            scores[student] = focal_score * Fraction(j, nb + 1)
        for j, student in enumerate(above, start=1):
            scores[student] = focal_score + (1 - focal_score) * Fraction(j, na + 1)
        priorities = {
            s: {i: scores[i] for i in instance.students} for s in instance.schools
        }
        for combo in product(*(others_supports[j] for j in others)):
            p = order_p
            rols = {}
            for student, (tp, values, lam_dom) in zip(others, combo):
                p = p * tp
                theta = StudentType.from_loss_dominance(values, lam_dom, score=None)
                rols[student] = strategy(student, theta)
            if p == 0:
                continue
            att = attainable_schools(focal, rols, priorities, instance.capacities)
            state = tuple(1 if s in att else 0 for s in instance.schools)
            mass[state] = mass.get(state, 0) + p
    return AttainabilityDistribution(instance.m, mass, instance.outside)


def attainability_from_joint(
    instance: Instance,
    focal,
    cases,
    strategy: Callable,
) -> AttainabilityDistribution:
    """Exact attainability from a finite joint table of full type profiles.

    ``cases`` is an iterable of (prob, {student: StudentType}); every type must
    carry concrete priorities (vector or score).  ``strategy`` may return a
    single Rol or a sequence of (prob, Rol) for mixed reports.
    """
    others = [i for i in instance.students if i != focal]
    mass: dict[State, object] = {}
    for case_p, profile in cases:
        if case_p == 0:
            continue
        priorities = {
            s: {i: profile[i].priority_at(s) for i in instance.students}
            for s in instance.schools
        }
        reports = []
        for j in others:
            r = strategy(j, profile[j])
            reports.append(r if isinstance(r, (list, tuple)) else [(1, r)])
        for combo in product(*reports):
            p = case_p
            rols = {}
            for student, (rp, rol) in zip(others, combo):
                p = p * rp
                rols[student] = rol
            if p == 0:
                continue
            att = attainable_schools(focal, rols, priorities, instance.capacities)
            state = tuple(1 if s in att else 0 for s in instance.schools)
            mass[state] = mass.get(state, 0) + p
    return AttainabilityDistribution(instance.m, mass, instance.outside)


# --- Monte Carlo estimation -------------------------------------------------


@dataclass(frozen=True)
class McAttainability:
    dist: AttainabilityDistribution
    stderr: Mapping[State, float]
    replications: int


def mc_attainability(
    instance: Instance,
    focal,
    focal_score,
    others_supports: Mapping,
    strategy: Callable,
    replications: int,
    seed: int,
    score_law=UNIFORM01,
) -> McAttainability:
    """Monte Carlo estimate of the attainability distribution.

    Unlike the exact path, the strategy here may condition on the drawn score
    (the sampled types carry one).  Deterministic for a given seed.
    """
    others = [i for i in instance.students if i != focal]
    counts: dict[State, int] = {}
    rng = substream(seed, 0)
    supports = {}
    for j in others:
        probs = [float(p) for p, _, _ in others_supports[j]]
        total = sum(probs)
        supports[j] = ([p / total for p in probs], list(others_supports[j]))
    for _ in range(replications):
        scores = {focal: focal_score}
        draws = score_law.sample(rng, len(others))
        rols = {}
        for idx, j in enumerate(others):
            scores[j] = float(draws[idx])
            probs, entries = supports[j]
            pick = rng.choice(len(entries), p=probs)
            _, values, lam_dom = entries[pick]
            theta = StudentType.from_loss_dominance(values, lam_dom, score=scores[j])
            rols[j] = strategy(j, theta)
        priorities = {s: dict(scores) for s in instance.schools}
        att = attainable_schools(focal, rols, priorities, instance.capacities)
        state = tuple(1 if s in att else 0 for s in instance.schools)
        counts[state] = counts.get(state, 0) + 1
    if replications == 0:
        return McAttainability(AttainabilityDistribution(instance.m, {}, instance.outside), {}, 0)
    mass = {st: c / replications for st, c in counts.items()}
    stderr = {
        st: math.sqrt(p * (1 - p) / replications) for st, p in mass.items()
    }
    dist = AttainabilityDistribution(instance.m, mass, instance.outside)
    return McAttainability(dist, stderr, replications)


def truthful_strategy(student, theta: StudentType) -> Rol:
    return truthful_rol(theta.values)
