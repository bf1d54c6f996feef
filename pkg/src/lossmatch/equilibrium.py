"""Equilibrium computation: elite-school cutoffs and finite-game fixed points.

The elite-school problem (one merged elite school of capacity q, a safe
district school, common iid priority scores) has an essentially unique
equilibrium in cutoff strategies, constructed level by level from the most
loss-averse type downward.  Generic finite-type games are handled by damped
iteration of a better-response map whose fixed points are exactly the
choice-acclimating Bayesian Nash equilibria; certificates report convergence
honestly because the map is only guaranteed to have fixed points, not to reach
them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import product
from typing import Callable, Mapping

import numpy as np

from .attainability import AttainabilityDistribution, attainability_from_joint, induced_lottery
from .cpe import cpe_value
from .mechanisms import da_student_proposing
from .model import UNIFORM01, Instance, Rol, canonical_rols
from .rngs import substream


def order_stat_prob(omega, n: int, q: int, law=UNIFORM01):
    """P(fewer than q of n-1 iid scores exceed omega).

    Binomial tail with exact integer coefficients; float inputs use
    compensated summation.
    """
    if q >= n:
        return 1
    g = law.cdf(omega)
    terms = [math.comb(n - 1, k) * (1 - g) ** k * g ** (n - 1 - k) for k in range(q)]
    if any(isinstance(t, Fraction) for t in terms):
        return sum(terms)
    return math.fsum(float(t) for t in terms)


def elite_apply_decision(f, lam_dom) -> bool:
    """Apply to the elite school iff f*v - lam_dom*f*(1-f)*v >= 0, i.e. f >= 1 - 1/lam_dom.

    Ties break toward applying, making the applying score region closed.
    """
    if lam_dom < 0:
        raise ValueError("loss dominance must be nonnegative")
    if lam_dom == 0:
        return True
    return f * lam_dom >= lam_dom - 1


class EliteChoice(Enum):
    LIST_ALL_ELITE = "ListAllElite"
    LIST_NONE = "ListNone"


def elite_adjacency_reduction(f_all, lam_dom, elite_values=None) -> EliteChoice:
    """Best response with value-symmetric elite schools: list all of them or none.

    The payoff f*v - lam_dom*f*(1-f)*v is convex in the combined attainability
    f, so intermediate subsets are dominated by one of the extremes.
    """
    if elite_values is not None and len(set(elite_values)) > 1:
        raise ValueError("asymmetric elite values: the all-or-none reduction needs a common v")
    return EliteChoice.LIST_ALL_ELITE if elite_apply_decision(f_all, lam_dom) else EliteChoice.LIST_NONE


@dataclass(frozen=True)
class EliteProblem:
    """n students compete for q merged elite seats; district utility normalized to 0."""

    n: int
    q: int
    v: float
    levels: tuple  # ascending loss-dominance values
    level_probs: tuple
    score_law: object = UNIFORM01

    def validate(self) -> list[str]:
        problems = []
        if self.q >= self.n:
            problems.append(f"q={self.q} >= n={self.n}: seats never bind")
        if list(self.levels) != sorted(self.levels):
            problems.append("loss-dominance levels must be ascending")
        if len(self.levels) != len(self.level_probs):
            problems.append("levels and probabilities differ in length")
        if abs(sum(self.level_probs) - 1) > 1e-12:
            problems.append("level probabilities do not sum to 1")
        if not any(l > 1 for l in self.levels):
            problems.append("at least one level must exceed 1 for cutoffs to bind")
        if self.v <= 0:
            problems.append("elite value must be positive")
        return problems


def _beat_probability(problem: EliteProblem, cutoffs: Mapping, omega):
    """Per-other probability of being beaten: a higher score that also applies."""
    g = problem.score_law
    total = 0
    for lam, pi in zip(problem.levels, problem.level_probs):
        threshold = max(omega, cutoffs[lam])
        total += pi * (1 - g.cdf(threshold))
    return total


def _binomial_tail(beta, n: int, q: int):
    if q >= n:
        return 1.0
    return math.fsum(
        math.comb(n - 1, k) * beta**k * (1 - beta) ** (n - 1 - k) for k in range(q)
    )


def elite_attainability(problem: EliteProblem, cutoffs: Mapping, omega):
    """f(omega): probability that fewer than q better-scored students apply."""
    return _binomial_tail(float(_beat_probability(problem, cutoffs, omega)), problem.n, problem.q)


def elite_cutoffs(problem: EliteProblem, tol: float = 1e-12, max_iter: int = 400) -> dict:
    """Equilibrium application cutoffs per loss-dominance level, top level first.

    The top level's cutoff solves the order-statistic equation directly; each
    lower level then faces an attainability function that accounts for which
    higher levels abstain below their own cutoffs, and is solved by bisection
    (monotone, so convergence is guaranteed within the iteration cap).
    Cutoffs are strictly increasing across levels that bind.
    """
    cutoffs: dict = {}
    upper = 1.0
    for lam in sorted(problem.levels, reverse=True):
        if lam <= 1 or problem.q >= problem.n:
            cutoffs[lam] = 0.0
            continue
        target = 1 - 1 / float(lam)

        def f_at(omega, lam=lam):
            # levels at or below the current one end up with weakly lower
            # cutoffs, so above omega all of them apply: a trial cutoff of 0
            # makes the beat probability exact at the root and monotone in omega
            trial = {other: cutoffs.get(other, 0.0) for other in problem.levels}
            trial[lam] = 0.0
            beta = float(_beat_probability(problem, trial, omega))
            return _binomial_tail(beta, problem.n, problem.q)

        lo, hi = 0.0, upper
        if f_at(lo) >= target:
            cutoffs[lam] = 0.0
            continue
        for _ in range(max_iter):
            mid = 0.5 * (lo + hi)
            if f_at(mid) >= target:
                hi = mid
            else:
                lo = mid
            if hi - lo <= tol:
                break
        cutoffs[lam] = 0.5 * (lo + hi)
        upper = cutoffs[lam]
    return cutoffs


@dataclass(frozen=True)
class EliteRegretReport:
    max_regret: float
    worst: tuple | None  # (level, omega, regret)


def verify_elite_profile(problem: EliteProblem, cutoffs: Mapping, grid: int = 400) -> EliteRegretReport:
    """Regret of the cutoff profile on a score grid, per level.

    At each (level, score) the prescribed action (apply iff at or above the
    cutoff) is compared against the better of applying and abstaining given the
    attainability the full profile induces.
    """
    worst = None
    max_regret = 0.0
    for lam in problem.levels:
        for k in range(grid + 1):
            omega = k / grid
            f = elite_attainability(problem, cutoffs, omega)
            u_apply = f * problem.v - float(lam) * f * (1 - f) * problem.v
            prescribed = u_apply if omega >= cutoffs[lam] else 0.0
            regret = max(u_apply, 0.0) - prescribed
            if regret > max_regret:
                max_regret, worst = regret, (lam, omega, regret)
    return EliteRegretReport(max_regret, worst)


def mc_elite_attainability(
    problem: EliteProblem,
    cutoffs: Mapping,
    omega: float,
    replications: int,
    seed: int = 0,
) -> tuple[float, float]:
    """Monte Carlo cross-check of f(omega): probe the elite school through DA.

    Others draw (level, score) types and play the cutoff strategies; the focal
    student ranks the elite school first.  Returns the empirical attainability
    and its standard error.
    """
    rng = substream(seed, 0)
    levels = list(problem.levels)
    probs = np.array([float(p) for p in problem.level_probs])
    probs = probs / probs.sum()
    wins = 0
    for _ in range(replications):
        lam_draw = [levels[int(k)] for k in rng.choice(len(levels), size=problem.n - 1, p=probs)]
        scores = problem.score_law.sample(rng, problem.n - 1)
        rols = {0: Rol((1, 2))}
        prio = {0: float(omega)}
        for j in range(problem.n - 1):
            apply = float(scores[j]) >= cutoffs[lam_draw[j]]
            rols[j + 1] = Rol((1, 2)) if apply else Rol((2, 1))
            prio[j + 1] = float(scores[j])
        priorities = {1: prio, 2: prio}
        alloc = da_student_proposing(rols, priorities, (problem.q, problem.n))
        if alloc[0] == 1:
            wins += 1
    f_hat = wins / replications
    return f_hat, math.sqrt(f_hat * (1 - f_hat) / replications)


def elite_realized_rols(problem: EliteProblem, cutoffs: Mapping, realized: Mapping) -> dict:
    """ROLs played under the cutoff profile for realized (level, score) types.

    School 1 is the elite school, school 2 the district.  Applying means
    ranking the elite school first.
    """
    rols = {}
    for student, (lam, omega) in realized.items():
        apply = omega >= cutoffs[lam]
        rols[student] = Rol((1, 2)) if apply else Rol((2, 1))
    return rols


def elite_instance(n: int, q: int = 1) -> Instance:
    """Two-school instance for realized elite play: school 1 elite, school 2 district."""
    return Instance(capacities=(q, n), students=tuple(range(1, n + 1)), outside=2)


# --- finite games ---------------------------------------------------------------


@dataclass
class FiniteGame:
    """A finite-type reporting game over a shared action set of canonical ROLs.

    ``prior`` is a finite joint table over type indices (arbitrary correlation);
    ``attainability(i, t, profile)`` returns the focal distribution for student
    index i of type index t against the others' mixed profile.
    """

    students: tuple
    type_labels: tuple  # per student: tuple of labels
    prior: tuple  # of (prob, tuple of type indices per student)
    actions: tuple  # of Rol
    values: Callable  # (student_idx, type_idx) -> cardinal value tuple
    lam_dom: Callable  # (student_idx, type_idx) -> loss dominance
    attainability: Callable

    def n_students(self) -> int:
        return len(self.students)

    def n_types(self, i: int) -> int:
        return len(self.type_labels[i])

    def n_actions(self) -> int:
        return len(self.actions)

    def utilities(self, i: int, t: int, profile) -> list:
        dist = self.attainability(i, t, profile)
        vals = self.values(i, t)
        ld = self.lam_dom(i, t)
        return [
            cpe_value(vals, ld, induced_lottery(rol, dist).probs) for rol in self.actions
        ]


def uniform_profile(game: FiniteGame) -> list:
    return [
        np.full((game.n_types(i), game.n_actions()), 1.0 / game.n_actions())
        for i in range(game.n_students())
    ]


def validate_profile(game: FiniteGame, profile) -> list[str]:
    """Report-style check of a mixed profile: per-type rows on the simplex."""
    problems = []
    if len(profile) != game.n_students():
        return [f"profile has {len(profile)} students, game has {game.n_students()}"]
    for i in range(game.n_students()):
        mat = np.asarray(profile[i])
        if mat.shape != (game.n_types(i), game.n_actions()):
            problems.append(f"student {game.students[i]}: shape {mat.shape} unexpected")
            continue
        for t in range(game.n_types(i)):
            row = mat[t]
            if (row < 0).any():
                problems.append(f"student {game.students[i]} type {game.type_labels[i][t]}: negative weight")
            if abs(float(row.sum()) - 1) > 1e-12:
                problems.append(
                    f"student {game.students[i]} type {game.type_labels[i][t]}: weights sum to {row.sum()}"
                )
    return problems


@dataclass
class CbneCertificate:
    profile: list
    max_regret: float
    regrets: dict  # (student, type_label) -> regret
    iterations: int
    converged: bool

    def to_json(self, game: FiniteGame) -> dict:
        prof = {}
        for i, student in enumerate(game.students):
            prof[str(student)] = {
                str(game.type_labels[i][t]): {
                    game.actions[a].compact(): float(self.profile[i][t, a])
                    for a in range(game.n_actions())
                    if self.profile[i][t, a] > 1e-12
                }
                for t in range(game.n_types(i))
            }
        return {
            "profile": prof,
            "max_regret": self.max_regret,
            "regrets": {f"{s}|{t}": r for (s, t), r in self.regrets.items()},
            "iterations": self.iterations,
            "converged": self.converged,
        }


def _all_utilities(game: FiniteGame, profile) -> list:
    return [
        [game.utilities(i, t, profile) for t in range(game.n_types(i))]
        for i in range(game.n_students())
    ]


def _regret_report(game: FiniteGame, profile, utils, support_eps: float = 1e-9):
    regrets = {}
    max_regret = 0.0
    for i in range(game.n_students()):
        for t in range(game.n_types(i)):
            u = utils[i][t]
            best = max(u)
            support = [a for a in range(game.n_actions()) if profile[i][t, a] > support_eps]
            worst_in_support = min(u[a] for a in support)
            regret = float(best - worst_in_support)
            regrets[(game.students[i], game.type_labels[i][t])] = regret
            max_regret = max(max_regret, regret)
    return max_regret, regrets


def cbne_fixed_point(
    game: FiniteGame,
    damping: float = 0.5,
    tol: float = 1e-9,
    max_iter: int = 500,
    support_eps: float = 1e-9,
    pure_fallback: bool = True,
    br_rounds: int = 40,
) -> CbneCertificate:
    """Damped iteration of the better-response map, with honest certificates.

    Each step moves probability toward reports whose utility exceeds the
    type's current average.  Exact fixed points of the undamped map are
    precisely the equilibria; since iteration need not converge, the returned
    certificate carries the best profile found and a converged flag (with an
    exhaustive pure-profile fallback for small games).
    """
    # fast path: pure best-response iteration converges quickly on games with
    # pure equilibria (e.g. cutoff games); fall through to the damped map if not
    br = _best_response_phase(game, tol, support_eps, br_rounds) if br_rounds else None
    if br is not None and br.converged:
        return br

    profile = uniform_profile(game)
    best_profile, best_regret, best_iter = None, math.inf, 0
    best_regrets: dict = {}
    if br is not None:
        best_profile, best_regret, best_regrets = br.profile, br.max_regret, br.regrets
    for iteration in range(1, max_iter + 1):
        utils = _all_utilities(game, profile)
        max_regret, regrets = _regret_report(game, profile, utils, support_eps)
        if max_regret < best_regret:
            best_profile = [p.copy() for p in profile]
            best_regret, best_iter = max_regret, iteration
            best_regrets = regrets
        if max_regret <= tol:
            return CbneCertificate(profile, max_regret, regrets, iteration, True)

        # polish: the pure profile of current best responses often is the
        # equilibrium once the iteration is near a pure fixed point
        if iteration % 5 == 0:
            pure = []
            for i in range(game.n_students()):
                mat = np.zeros((game.n_types(i), game.n_actions()))
                for t in range(game.n_types(i)):
                    mat[t, int(np.argmax(utils[i][t]))] = 1.0
                pure.append(mat)
            pure_utils = _all_utilities(game, pure)
            pure_regret, pure_regrets = _regret_report(game, pure, pure_utils, support_eps)
            if pure_regret <= tol:
                return CbneCertificate(pure, pure_regret, pure_regrets, iteration, True)
            if pure_regret < best_regret:
                best_profile, best_regret, best_iter = pure, pure_regret, iteration
                best_regrets = pure_regrets

        new_profile = []
        for i in range(game.n_students()):
            mat = profile[i].copy()
            for t in range(game.n_types(i)):
                u = np.asarray(utils[i][t], dtype=float)
                avg = float(mat[t] @ u)
                phi = np.maximum(0.0, u - avg)
                target = (mat[t] + phi) / (1.0 + phi.sum())
                mat[t] = (1 - damping) * mat[t] + damping * target
            new_profile.append(mat)
        profile = new_profile

    if pure_fallback:
        found = _pure_profile_search(game, tol, support_eps)
        if found is not None:
            return found
    if best_profile is None:
        profile = uniform_profile(game)
        utils = _all_utilities(game, profile)
        best_regret, best_regrets = _regret_report(game, profile, utils, support_eps)
        best_profile, best_iter = profile, 0
    return CbneCertificate(best_profile, best_regret, best_regrets, best_iter, best_regret <= tol)


def tmap(game: FiniteGame, profile, damping: float = 1.0) -> list:
    """One application of the better-response map (undamped when damping=1)."""
    utils = _all_utilities(game, profile)
    new_profile = []
    for i in range(game.n_students()):
        mat = profile[i].copy()
        for t in range(game.n_types(i)):
            u = np.asarray(utils[i][t], dtype=float)
            avg = float(mat[t] @ u)
            phi = np.maximum(0.0, u - avg)
            target = (mat[t] + phi) / (1.0 + phi.sum())
            mat[t] = (1 - damping) * mat[t] + damping * target
        new_profile.append(mat)
    return new_profile


def _best_response_phase(game: FiniteGame, tol: float, support_eps: float, rounds: int = 40):
    profile = uniform_profile(game)
    best = None
    for round_no in range(rounds):
        utils = _all_utilities(game, profile)
        max_regret, regrets = _regret_report(game, profile, utils, support_eps)
        if best is None or max_regret < best.max_regret:
            best = CbneCertificate(
                [p.copy() for p in profile], max_regret, regrets, round_no, max_regret <= tol
            )
        if max_regret <= tol:
            return best
        nxt = []
        for i in range(game.n_students()):
            mat = np.zeros((game.n_types(i), game.n_actions()))
            for t in range(game.n_types(i)):
                mat[t, int(np.argmax(utils[i][t]))] = 1.0
            nxt.append(mat)
        if all(np.array_equal(a, b) for a, b in zip(nxt, profile)):
            break  # BR fixed point that still misses tol: hand to the damped map
        profile = nxt
    return best


def _pure_profile_search(game: FiniteGame, tol: float, support_eps: float, cap: int = 50_000):
    """Exhaustive search over pure strategy profiles (singleton supports)."""
    slots = [(i, t) for i in range(game.n_students()) for t in range(game.n_types(i))]
    total = game.n_actions() ** len(slots)
    if total > cap:
        return None
    for combo in product(range(game.n_actions()), repeat=len(slots)):
        profile = [np.zeros((game.n_types(i), game.n_actions())) for i in range(game.n_students())]
        for (i, t), a in zip(slots, combo):
            profile[i][t, a] = 1.0
        utils = _all_utilities(game, profile)
        max_regret, regrets = _regret_report(game, profile, utils, support_eps)
        if max_regret <= tol:
            return CbneCertificate(profile, max_regret, regrets, 0, True)
    return None


def verify_cbne(game: FiniteGame, profile, tol: float = 1e-9, support_eps: float = 1e-9):
    """Per-type regret report plus the indifference spread within supports."""
    utils = _all_utilities(game, profile)
    max_regret, regrets = _regret_report(game, profile, utils, support_eps)
    spreads = {}
    for i in range(game.n_students()):
        for t in range(game.n_types(i)):
            support = [a for a in range(game.n_actions()) if profile[i][t, a] > support_eps]
            vals = [utils[i][t][a] for a in support]
            spreads[(game.students[i], game.type_labels[i][t])] = float(max(vals) - min(vals))
    return {
        "max_regret": max_regret,
        "regrets": regrets,
        "support_spread": spreads,
        "ok": max_regret <= tol,
    }


# --- game constructors -----------------------------------------------------------


def finite_joint_game(instance: Instance, joint_cases) -> FiniteGame:
    """Build a reporting game from a finite joint type table.

    ``joint_cases`` is a list of (prob, {student: StudentType}); conditional
    beliefs follow from Bayes on the table, so arbitrary correlation is fine.
    """
    students = tuple(instance.students)
    per_student: list[list] = [[] for _ in students]
    index: list[dict] = [{} for _ in students]
    for _, prof in joint_cases:
        for k, i in enumerate(students):
            theta = prof[i]
            if theta not in index[k]:
                index[k][theta] = len(per_student[k])
                per_student[k].append(theta)
    prior = tuple(
        (p, tuple(index[k][prof[i]] for k, i in enumerate(students))) for p, prof in joint_cases
    )
    actions = tuple(canonical_rols(instance.m, instance.outside))

    def attainability(i, t, profile):
        theta_i = per_student[i][t]
        conditional = [
            (p, combo) for p, combo in prior if combo[i] == t
        ]
        total = sum(p for p, _ in conditional)
        cases = []
        for p, combo in conditional:
            prof = {students[k]: per_student[k][combo[k]] for k in range(len(students))}
            cases.append((p / total, prof))

        def strategy(j, theta_j):
            k = students.index(j)
            t_j = index[k][theta_j]
            return [
                (profile[k][t_j, a], actions[a])
                for a in range(len(actions))
                if profile[k][t_j, a] > 0
            ]

        return attainability_from_joint(instance, students[i], cases, strategy)

    return FiniteGame(
        students=students,
        type_labels=tuple(tuple(f"t{j}" for j in range(len(per_student[k]))) for k in range(len(students))),
        prior=prior,
        actions=actions,
        values=lambda i, t: per_student[i][t].values,
        lam_dom=lambda i, t: per_student[i][t].loss_dominance,
        attainability=attainability,
    )


def elite_grid_game(problem: EliteProblem, grid: int = 20) -> FiniteGame:
    """Discretized elite game: types are uniform score cells, priorities continuous.

    Within a cell the underlying score is uniform, so two students sharing a
    cell are ranked by a fair coin; attainability integrates the within-cell
    quantile exactly (the binomial tail is polynomial in it).  Actions: rank
    the elite school first (apply) or the district first.
    """
    if len(problem.levels) != 1:
        raise ValueError("grid game supports a single loss-dominance level")
    lam = problem.levels[0]
    students = tuple(range(1, problem.n + 1))
    cells = tuple(range(1, grid + 1))
    prior_cases = tuple(
        (1.0 / grid ** problem.n, combo) for combo in product(range(grid), repeat=problem.n)
    )
    apply_rol = Rol((1, 2))
    district_rol = Rol((2, 1))
    actions = (apply_rol, district_rol)
    apply_idx = 0

    def attainability(i, t, profile):
        # others' per-cell apply probabilities
        higher = 0.0
        same = 0.0
        polys = []
        for k in range(problem.n):
            if k == i:
                continue
            sigma = profile[k]
            a_high = sum(sigma[c, apply_idx] for c in range(t + 1, grid)) / grid
            a_same = sigma[t, apply_idx] / grid
            polys.append((a_high, a_same))
        # P(fewer than q others beat me | my in-cell quantile u), poly in u:
        # each other beats me with probability a_high + a_same*(1-u)
        count_polys = [np.zeros(problem.n)]  # poly coefficients, index = degree
        count_polys[0][0] = 1.0
        for a_high, a_same in polys:
            beat = np.zeros(problem.n)
            beat[0] = a_high + a_same
            if problem.n > 1:
                beat[1] = -a_same
            miss = -beat
            miss[0] += 1.0
            new = [np.zeros(problem.n) for _ in range(len(count_polys) + 1)]
            for c, poly in enumerate(count_polys):
                new[c] += _poly_mul(poly, miss, problem.n)
                new[c + 1] += _poly_mul(poly, beat, problem.n)
            count_polys = new
        tail = np.zeros(problem.n)
        for c in range(min(problem.q, len(count_polys))):
            tail += count_polys[c]
        f = float(sum(tail[d] / (d + 1) for d in range(problem.n)))  # integral over u
        f = min(max(f, 0.0), 1.0)
        return AttainabilityDistribution(2, {(1, 1): f, (0, 1): 1.0 - f}, outside=2)

    return FiniteGame(
        students=students,
        type_labels=tuple(tuple(cells) for _ in students),
        prior=prior_cases,
        actions=actions,
        values=lambda i, t: (problem.v, 0),
        lam_dom=lambda i, t: lam,
        attainability=attainability,
    )


def _poly_mul(a: np.ndarray, b: np.ndarray, size: int) -> np.ndarray:
    out = np.zeros(size)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            if bj == 0 or i + j >= size:
                continue
            out[i + j] += ai * bj
    return out


def grid_cutoff_cell(certificate: CbneCertificate, grid: int, student: int = 0, tol: float = 1e-6):
    """First cell from which the strategy applies, if the profile is cutoff-shaped."""
    sigma = certificate.profile[student]
    applies = [sigma[t, 0] > 1 - 1e-6 for t in range(grid)]
    if not any(applies):
        return None
    first = applies.index(True)
    if all(applies[first:]) and not any(applies[:first]):
        return first + 1
    return None


# --- sequential mechanism example -------------------------------------------------


class SeqCpeVerdict(Enum):
    TRUTHFUL = "TruthfulIsSeqCPE"
    NOT = "Not"


def sequential_cpe_osp_example(eps, lam_dom, v_pref, v_other) -> SeqCpeVerdict:
    """Truth-telling at the pivotal node of the two-student sequential mechanism.

    The truthful report yields the preferred school with probability eps and
    the other school otherwise; deviating locks in the other school.  Truth is
    a sequential CPE exactly when the lottery's self-referential utility
    weakly beats the sure thing, i.e. when eps >= 1 - 1/lam_dom.
    """
    if not (0 < eps < 1):
        raise ValueError("eps must lie in (0, 1)")
    if v_pref <= v_other:
        raise ValueError("v_pref must exceed v_other")
    values = (v_pref, v_other)
    u_truth = cpe_value(values, lam_dom, (eps, 1 - eps))
    u_sure = cpe_value(values, lam_dom, (0, 1))
    return SeqCpeVerdict.TRUTHFUL if u_truth >= u_sure else SeqCpeVerdict.NOT
