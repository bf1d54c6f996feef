"""Allocation mechanisms and their verifiers.

Static student-proposing deferred acceptance, top trading cycles, sequential
serial dictatorship, a deliberately manipulable immediate-acceptance rule, and
brute-force checkers for stability, student optimality, and strategy-proofness.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations, product
from typing import Callable, Mapping

from .model import Rol

Allocation = dict  # student -> school id, or None when unmatched


def _check_strict(priorities: Mapping[int, Mapping], students) -> None:
    for s, table in priorities.items():
        vals = [table[i] for i in students if i in table]
        if len(set(vals)) != len(vals):
            raise ValueError(f"duplicate priority values at school {s}")


def priorities_from_types(types: Mapping, m: int) -> dict:
    """Build the school -> student -> priority table from student types."""
    return {s: {i: th.priority_at(s) for i, th in types.items()} for s in range(1, m + 1)}


def da_student_proposing(rols: Mapping, priorities: Mapping, capacities) -> Allocation:
    """Student-proposing deferred acceptance.

    Each round every unassigned student proposes to the next school on her
    list; schools are processed in id order and tentatively hold their q_s
    highest-priority proposers.  The outcome is the student-optimal stable
    allocation with respect to the reported ROLs (and is independent of the
    processing order; the order is fixed for reproducibility).
    """
    students = list(rols)
    _check_strict(priorities, students)
    m = len(capacities)
    next_choice = {i: 0 for i in students}
    held: dict[int, list] = {s: [] for s in range(1, m + 1)}
    free = list(students)
    while free:
        proposals: dict[int, list] = {}
        still_free = []
        for i in free:
            if next_choice[i] >= len(rols[i]):
                continue  # exhausted her list: stays unmatched
            s = rols[i][next_choice[i]]
            next_choice[i] += 1
            proposals.setdefault(s, []).append(i)
        for s in sorted(proposals):
            pool = held[s] + proposals[s]
            pool.sort(key=lambda i: priorities[s][i], reverse=True)
            held[s] = pool[: capacities[s - 1]]
            still_free.extend(pool[capacities[s - 1] :])
        free = still_free
    alloc: Allocation = {i: None for i in students}
    for s, holders in held.items():
        for i in holders:
            alloc[i] = s
    return alloc


def ttc(rols: Mapping, priorities: Mapping, capacities) -> Allocation:
    """Top trading cycles with capacity counters."""
    students = list(rols)
    _check_strict(priorities, students)
    m = len(capacities)
    remaining = list(capacities)
    active_students = set(students)
    alloc: Allocation = {i: None for i in students}

    def top_school(i):
        for s in rols[i]:
            if remaining[s - 1] > 0:
                return s
        return None

    def top_student(s):
        best = None
        for i in active_students:
            if best is None or priorities[s][i] > priorities[s][best]:
                best = i
        return best

    while active_students:
        start = min(active_students, key=str)
        if top_school(start) is None:
            active_students.discard(start)
            continue
        # walk student -> top school -> its top student until a cycle closes
        path = [start]
        seen = {start: 0}
        cycle = None
        while cycle is None:
            s = top_school(path[-1])
            if s is None:
                active_students.discard(path[-1])
                break
            nxt = top_student(s)
            if nxt in seen:
                cycle = path[seen[nxt] :]
                break
            seen[nxt] = len(path)
            path.append(nxt)
        if cycle is None:
            continue
        for i in cycle:
            s = top_school(i)
            alloc[i] = s
            remaining[s - 1] -= 1
            active_students.discard(i)
    return alloc


def serial_dictatorship(scores: Mapping, choose: Callable, capacities) -> Allocation:
    """Students pick in descending score order; each pick is final.

    ``choose(student, remaining)`` returns the picked school from the set of
    schools with residual capacity (or None to stay unmatched).
    """
    if len(set(scores.values())) != len(scores):
        raise ValueError("tie in scores")
    remaining = list(capacities)
    alloc: Allocation = {}
    for i in sorted(scores, key=lambda i: scores[i], reverse=True):
        open_schools = {s for s in range(1, len(capacities) + 1) if remaining[s - 1] > 0}
        s = choose(i, open_schools) if open_schools else None
        if s is not None:
            if s not in open_schools:
                raise ValueError(f"chooser picked full school {s}")
            remaining[s - 1] -= 1
        alloc[i] = s
    return alloc


def truthful_chooser(types: Mapping):
    """A serial-dictatorship chooser that picks the highest-value open school."""

    def choose(i, open_schools):
        theta = types[i]
        best = max(open_schools, key=lambda s: theta.values[s - 1])
        return best if theta.values[best - 1] >= 0 else None

    return choose


def boston_immediate_acceptance(rols: Mapping, priorities: Mapping, capacities) -> Allocation:
    """Immediate acceptance ("Boston"): round-k proposals are final.

    Not strategy-proof; kept as a benchmark that the strategy-proofness
    checker must reject.
    """
    students = list(rols)
    _check_strict(priorities, students)
    remaining = list(capacities)
    alloc: Allocation = {i: None for i in students}
    unassigned = list(students)
    for k in range(max(len(rols[i]) for i in students)):
        proposals: dict[int, list] = {}
        for i in unassigned:
            if k < len(rols[i]):
                proposals.setdefault(rols[i][k], []).append(i)
        for s in sorted(proposals):
            pool = sorted(proposals[s], key=lambda i: priorities[s][i], reverse=True)
            accepted = pool[: remaining[s - 1]]
            remaining[s - 1] -= len(accepted)
            for i in accepted:
                alloc[i] = s
        unassigned = [i for i in unassigned if alloc[i] is None]
        if not unassigned:
            break
    return alloc


# --- verification -----------------------------------------------------------


def justified_envy_pairs(alloc: Allocation, types: Mapping, capacities) -> set:
    """All (student, school) pairs with justified envy under the true types.

    A vacant seat counts as a least-preferred admitted student: a student
    justifiably envies any school she prefers to her match that has either an
    empty seat or an admitted student with lower priority.
    """
    m = len(capacities)
    admitted: dict[int, list] = {s: [] for s in range(1, m + 1)}
    for i, s in alloc.items():
        if s is not None:
            admitted[s].append(i)
    pairs = set()
    for i, theta in types.items():
        mine = alloc.get(i)
        my_value = theta.values[mine - 1] if mine is not None else 0
        for s in range(1, m + 1):
            if s == mine or theta.values[s - 1] <= my_value:
                continue
            if len(admitted[s]) < capacities[s - 1]:
                pairs.add((i, s))
            elif any(types[j].priority_at(s) < theta.priority_at(s) for j in admitted[s]):
                pairs.add((i, s))
    return pairs


def is_stable(alloc: Allocation, types: Mapping, capacities) -> bool:
    if any(
        s is not None and types[i].values[s - 1] < 0 for i, s in alloc.items()
    ):  # individually irrational match
        return False
    return not justified_envy_pairs(alloc, types, capacities)


def feasible_allocations(students, capacities):
    m = len(capacities)
    for combo in product([None] + list(range(1, m + 1)), repeat=len(students)):
        counts = [0] * m
        ok = True
        for s in combo:
            if s is not None:
                counts[s - 1] += 1
                if counts[s - 1] > capacities[s - 1]:
                    ok = False
                    break
        if ok:
            yield dict(zip(students, combo))


def stable_allocations(types: Mapping, capacities, cap: int = 200_000) -> list:
    """Brute-force enumeration of all stable allocations (small instances only)."""
    students = list(types)
    total = (len(capacities) + 1) ** len(students)
    if total > cap:
        raise ValueError(f"enumeration cap exceeded: {total} > {cap}")
    return [a for a in feasible_allocations(students, capacities) if is_stable(a, types, capacities)]


def is_student_optimal_stable(alloc: Allocation, types: Mapping, capacities, cap: int = 200_000) -> bool:
    """True iff ``alloc`` is stable and weakly preferred by everyone to every stable allocation."""
    if not is_stable(alloc, types, capacities):
        return False

    def val(i, a):
        s = a.get(i)
        return types[i].values[s - 1] if s is not None else 0

    for other in stable_allocations(types, capacities, cap):
        if any(val(i, alloc) < val(i, other) for i in types):
            return False
    return True


@dataclass(frozen=True)
class SpCounterexample:
    profile: tuple
    student: object
    deviation: Rol
    truthful_school: int | None
    deviant_school: int | None


def strategy_proofness_check(
    mechanism: Callable,
    students,
    priorities: Mapping,
    capacities,
    cap: int = 2_000_000,
) -> SpCounterexample | None:
    """Exhaustively search ordinal profiles and deviations for a profitable lie.

    Only ordinal information matters: a deviation is profitable iff it yields a
    school ranked strictly higher on the student's true list (unmatched ranks
    last).  Returns the lexicographically first counterexample, or None.
    """
    m = len(capacities)
    rols = [Rol(p) for p in permutations(range(1, m + 1))]
    n = len(students)
    work = len(rols) ** n * n * len(rols)
    if work > cap:
        raise ValueError(f"enumeration cap exceeded: {work} > {cap}")

    def rank(rol: Rol, s):
        return rol.position(s) if s is not None else m

    for profile in product(rols, repeat=n):
        truth = dict(zip(students, profile))
        base = mechanism(truth, priorities, capacities)
        for idx, i in enumerate(students):
            for dev in rols:
                if dev is profile[idx]:
                    continue
                report = dict(truth)
                report[i] = dev
                out = mechanism(report, priorities, capacities)
                if rank(profile[idx], out[i]) < rank(profile[idx], base[i]):
                    return SpCounterexample(profile, i, dev, base[i], out[i])
    return None


def attainable_schools(focal, others_rols: Mapping, priorities: Mapping, capacities) -> frozenset:
    """Probe each school: rank it first, run DA, keep it if the match succeeds."""
    m = len(capacities)
    found = []
    for s in range(1, m + 1):
        probe = Rol((s,) + tuple(t for t in range(1, m + 1) if t != s))
        rols = dict(others_rols)
        rols[focal] = probe
        if da_student_proposing(rols, priorities, capacities)[focal] == s:
            found.append(s)
    return frozenset(found)
