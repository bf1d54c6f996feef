"""Experiment runners: the worked example, data classification, elite runs, simulation.

Everything here returns plain report objects; CSV/JSON emission lives in
``lossmatch.io`` so the numeric paths stay decoupled from formatting.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .attainability import (
    AttainabilityDistribution,
    attainability_from_joint,
    exact_attainability,
    induced_lottery,
    truthful_strategy,
)
from .cpe import (
    class_has_trm_member,
    cpe_value,
    is_trm_interval,
    optimal_rols,
)
from .equilibrium import EliteProblem, elite_cutoffs
from .mechanisms import da_student_proposing, is_stable, justified_envy_pairs
from .model import (
    UNIFORM01,
    IndependentTypes,
    Instance,
    Rol,
    StudentType,
    canonicalize_rol,
    truthful_rol,
)
from .rngs import substream
from .scenario import Scenario


# --- the worked three-student example ----------------------------------------


def example_instance() -> Instance:
    return Instance(capacities=(1, 1, 3), students=("X", "Y", "Z"), outside=3)


def example_others_supports(eps, v1, v2):
    support = ((1 - eps, (v1, v2, 0), 0), (eps, (v2, v1, 0), 0))
    return {"Y": support, "Z": support}


def example_attainability(omega, eps, v1=100, v2=30) -> AttainabilityDistribution:
    """Exact attainability of the focal student against two truthful rivals."""
    inst = example_instance()
    return exact_attainability(
        inst, "X", omega, example_others_supports(eps, v1, v2), truthful_strategy
    )


@dataclass
class ExampleReport:
    omega: object
    eps: object
    values: tuple
    attainability: AttainabilityDistribution
    lotteries: list  # (Rol, Lottery), in the presentation order of the worked example
    lam_rows: list  # (lam, Rol, utility)
    lam_argmax: list  # (lam, tuple of canonical argmax Rols)
    omega_rows: list  # (omega, Rol, utility)
    omega_argmax: list  # (omega, tuple of canonical argmax Rols)
    lam_for_omega: object


EXAMPLE_ROL_ORDER = ("123", "213", "231", "132", "321", "312")


def run_example(
    omega=Fraction(1, 4),
    eps=Fraction(1, 20),
    v1=100,
    v2=30,
    lam_grid: Sequence | None = None,
    omega_grid: Sequence | None = None,
    lam_for_omega=Fraction(3, 2),
) -> ExampleReport:
    if lam_grid is None:
        lam_grid = [Fraction(k, 20) for k in range(0, 101)]
    if omega_grid is None:
        omega_grid = [Fraction(k, 100) for k in range(0, 101)]
    values = (v1, v2, 0)
    inst = example_instance()
    dist = example_attainability(omega, eps, v1, v2)
    lotteries = [
        (Rol.parse(text), induced_lottery(Rol.parse(text), dist)) for text in EXAMPLE_ROL_ORDER
    ]

    lam_rows, lam_argmax = [], []
    for lam in lam_grid:
        for rol, lot in lotteries:
            lam_rows.append((lam, rol, cpe_value(values, lam, lot.probs)))
        best, _ = optimal_rols(values, lam, dist)
        lam_argmax.append((lam, tuple(best)))

    omega_rows, omega_argmax = [], []
    for w in omega_grid:
        dist_w = example_attainability(w, eps, v1, v2)
        for text in EXAMPLE_ROL_ORDER:
            rol = Rol.parse(text)
            u = cpe_value(values, lam_for_omega, induced_lottery(rol, dist_w).probs)
            omega_rows.append((w, rol, u))
        best, _ = optimal_rols(values, lam_for_omega, dist_w)
        omega_argmax.append((w, tuple(best)))
    return ExampleReport(
        omega, eps, values, dist, lotteries, lam_rows, lam_argmax, omega_rows, omega_argmax, lam_for_omega
    )


# --- ROL classification --------------------------------------------------------


@dataclass
class ClassifyReport:
    rows: list  # (priority_score, rol_text, count, is_truthful, is_trm)
    per_score: dict  # score -> (total, trm_count, truthful_count)
    total: int
    trm_total: int
    truthful_total: int

    def trm_share(self, score=None) -> float:
        if score is None:
            return self.trm_total / self.total if self.total else 0.0
        total, trm, _ = self.per_score[score]
        return trm / total if total else 0.0


def run_classify(rows, truthful_order: Sequence[int] | None = None) -> ClassifyReport:
    """Annotate (priority_score, rol, count) rows with truthfulness and TRM flags.

    The truthful order defaults to ascending identifiers, the convention of the
    lab data this reproduces (ROL "1234" is the dominant report).
    """
    out_rows = []
    per_score: dict = {}
    total = trm_total = truthful_total = 0
    m_seen = None
    for score, rol_text, count in rows:
        rol = Rol.parse(str(rol_text))
        if m_seen is None:
            m_seen = len(rol)
        elif len(rol) != m_seen:
            raise ValueError(f"inconsistent ROL length in row {rol_text!r}")
        if count < 0:
            raise ValueError(f"negative count in row {rol_text!r}")
        order = tuple(truthful_order) if truthful_order else tuple(range(1, m_seen + 1))
        truthful = rol.ranking == order
        trm = is_trm_interval(rol, order)
        out_rows.append((score, rol.compact(), count, truthful, trm))
        t, tr, tt = per_score.get(score, (0, 0, 0))
        per_score[score] = (t + count, tr + (count if trm else 0), tt + (count if truthful else 0))
        total += count
        trm_total += count if trm else 0
        truthful_total += count if truthful else 0
    return ClassifyReport(out_rows, per_score, total, trm_total, truthful_total)


# --- elite runs -----------------------------------------------------------------


@dataclass
class EliteReport:
    problem: EliteProblem
    cutoffs: dict
    replications: int
    envy_rate: float
    elite_filled_rate: float
    displaced_rate: float


def run_elite(problem: EliteProblem, replications: int = 0, seed: int = 0) -> EliteReport:
    """Solve the cutoff equilibrium and simulate its induced play under DA.

    The simulation draws (level, score) types, plays the cutoff strategies,
    and tracks how often the outcome shows justified envy, how often elite
    seats fill, and how often the elite class differs from the top-q scores
    that serial dictatorship would admit.
    """
    cutoffs = elite_cutoffs(problem)
    if replications == 0:
        return EliteReport(problem, cutoffs, 0, 0.0, 0.0, 0.0)
    rng = substream(seed, 0)
    levels = list(problem.levels)
    probs = np.array([float(p) for p in problem.level_probs])
    probs = probs / probs.sum()
    capacities = (problem.q, problem.n)
    envy = filled = displaced = 0
    for _ in range(replications):
        lam_draw = [levels[int(k)] for k in rng.choice(len(levels), size=problem.n, p=probs)]
        scores = problem.score_law.sample(rng, problem.n)
        students = list(range(1, problem.n + 1))
        types = {
            i: StudentType.from_loss_dominance((problem.v, 0), lam_draw[i - 1], score=float(scores[i - 1]))
            for i in students
        }
        rols = {
            i: Rol((1, 2)) if float(scores[i - 1]) >= cutoffs[lam_draw[i - 1]] else Rol((2, 1))
            for i in students
        }
        priorities = {s: {i: float(scores[i - 1]) for i in students} for s in (1, 2)}
        alloc = da_student_proposing(rols, priorities, capacities)
        if justified_envy_pairs(alloc, types, capacities):
            envy += 1
        elite_set = {i for i, s in alloc.items() if s == 1}
        if len(elite_set) == problem.q:
            filled += 1
        top_q = set(sorted(students, key=lambda i: -scores[i - 1])[: problem.q])
        if elite_set != top_q:
            displaced += 1
    return EliteReport(
        problem,
        cutoffs,
        replications,
        envy / replications,
        filled / replications,
        displaced / replications,
    )


# --- scenario simulation ---------------------------------------------------------


@dataclass
class SimulationResult:
    replications: int
    stats: dict
    per_student: dict
    sample_allocation: dict | None = None  # student -> school, first replication

    def to_json(self) -> dict:
        return {
            "replications": self.replications,
            "stats": self.stats,
            "per_student": self.per_student,
            "sample_allocation": self.sample_allocation,
        }


def _strategy_tables(scenario: Scenario, score_cells: int = 20):
    """Precompute each student's report per (type, score cell) for the cpe mode.

    Best responses are taken against truthful rivals; scores are quantized to
    quantile cells of the common law, evaluated at cell midpoints.
    """
    inst = scenario.instance
    tables: dict = {}
    if isinstance(scenario.types, IndependentTypes):
        law = scenario.types.score_law
        for i in inst.students:
            others = {j: scenario.types.supports[j] for j in inst.students if j != i}
            fixed = scenario.types.fixed_scores.get(i)
            cells = [fixed] if fixed is not None else [
                _law_quantile(law, (k + 0.5) / score_cells) for k in range(score_cells)
            ]
            for t_idx, (_, values, lam_dom) in enumerate(scenario.types.supports[i]):
                for c_idx, omega in enumerate(cells):
                    dist = exact_attainability(inst, i, omega, others, truthful_strategy)
                    best, _ = optimal_rols(values, lam_dom, dist)
                    tables[(i, t_idx, None if fixed is not None else c_idx)] = best[0]
    else:
        cases = list(scenario.types.cases)
        for i in inst.students:
            thetas = {}
            for p, prof in cases:
                thetas.setdefault(prof[i], 0)
                thetas[prof[i]] += p
            for theta in thetas:
                conditional = [(p, prof) for p, prof in cases if prof[i] == theta]
                tot = sum(p for p, _ in conditional)
                conditional = [(p / tot, prof) for p, prof in conditional]
                dist = attainability_from_joint(inst, i, conditional, truthful_strategy)
                best, _ = optimal_rols(theta.values, theta.loss_dominance, dist)
                tables[(i, theta)] = best[0]
    return tables


def _law_quantile(law, u):
    if law is UNIFORM01 or isinstance(law, type(UNIFORM01)):
        return u
    xs = [float(x) for x in law.xs]
    ps = [float(p) for p in law.ps]
    return float(np.interp(u, ps, xs))


def run_simulation(scenario: Scenario, seed: int | None = None, threads: int = 1) -> SimulationResult:
    """Sample types, apply the configured strategies, run DA, and aggregate statistics."""
    inst = scenario.instance
    master = scenario.seed if seed is None else seed
    reps = scenario.replications
    mode = scenario.strategy_mode
    tables = _strategy_tables(scenario) if mode == "cpe" else {}
    score_cells = 20

    per_rep = [None] * reps
    if threads > 1 and reps > 1:
        from concurrent.futures import ThreadPoolExecutor

        def work(rep):
            return rep, _one_replication(scenario, master, rep, mode, tables, score_cells)

        with ThreadPoolExecutor(max_workers=threads) as pool:
            for rep, result in pool.map(work, range(reps)):
                per_rep[rep] = result
    else:
        for rep in range(reps):
            per_rep[rep] = _one_replication(scenario, master, rep, mode, tables, score_cells)
    if reps == 0:
        return SimulationResult(0, {}, {})

    stats = {
        "stability_rate": sum(r["stable"] for r in per_rep) / reps,
        "envy_rate": sum(r["envy"] for r in per_rep) / reps,
        "truthful_rate": sum(r["truthful"] for r in per_rep) / (reps * inst.n),
        "trm_rate": sum(r["trm"] for r in per_rep) / (reps * inst.n),
        "avg_utility": sum(r["utility"] for r in per_rep) / (reps * inst.n),
    }
    per_student: dict = {}
    for i in inst.students:
        matches = {}
        for r in per_rep:
            s = r["alloc"][i]
            key = str(s) if s is not None else "unmatched"
            matches[key] = matches.get(key, 0) + 1
        per_student[str(i)] = {
            "match_frequency": {k: c / reps for k, c in sorted(matches.items())}
        }
    sample = {str(i): per_rep[0]["alloc"][i] for i in inst.students}
    return SimulationResult(reps, stats, per_student, sample)


def _one_replication(scenario: Scenario, master: int, rep: int, mode: str, tables, score_cells: int):
    inst = scenario.instance
    rng = substream(master, rep)
    types: dict = {}
    reports: dict = {}
    if isinstance(scenario.types, IndependentTypes):
        law = scenario.types.score_law
        for i in inst.students:
            support = scenario.types.supports[i]
            probs = np.array([float(p) for p, _, _ in support])
            probs = probs / probs.sum()
            t_idx = int(rng.choice(len(support), p=probs))
            _, values, lam_dom = support[t_idx]
            fixed = scenario.types.fixed_scores.get(i)
            omega = float(fixed) if fixed is not None else float(law.sample(rng))
            types[i] = StudentType.from_loss_dominance(values, lam_dom, score=omega)
            if mode == "truthful":
                reports[i] = truthful_rol(values)
            else:
                if scenario.types.fixed_scores.get(i) is not None:
                    cell = None
                else:
                    u = float(law.cdf(omega))
                    cell = min(int(u * score_cells), score_cells - 1)
                reports[i] = tables[(i, t_idx, cell)]
    else:
        cases = scenario.types.cases
        probs = np.array([float(p) for p, _ in cases])
        probs = probs / probs.sum()
        case = cases[int(rng.choice(len(cases), p=probs))]
        for i in inst.students:
            types[i] = case[1][i]
            if mode == "truthful":
                reports[i] = truthful_rol(types[i].values)
            else:
                reports[i] = tables[(i, types[i])]

    priorities = {s: {i: types[i].priority_at(s) for i in inst.students} for s in inst.schools}
    alloc = da_student_proposing(reports, priorities, inst.capacities)

    truthful = trm = 0
    utility = 0.0
    for i in inst.students:
        order = truthful_rol(types[i].values)
        reported = reports[i]
        if inst.outside is not None:
            same = canonicalize_rol(reported, inst.outside) == canonicalize_rol(order, inst.outside)
            trm_flag = class_has_trm_member(reported, inst.outside, order.ranking)
        else:
            same = reported == order
            trm_flag = is_trm_interval(reported, order.ranking)
        truthful += 1 if same else 0
        trm += 1 if trm_flag else 0
        s = alloc[i]
        utility += float(types[i].values[s - 1]) if s is not None else 0.0
    envy = bool(justified_envy_pairs(alloc, types, inst.capacities))
    return {
        "alloc": alloc,
        "stable": is_stable(alloc, types, inst.capacities),
        "envy": envy,
        "truthful": truthful,
        "trm": trm,
        "utility": utility,
    }
