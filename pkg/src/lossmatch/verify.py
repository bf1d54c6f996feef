"""Seed-pinned property suites behind the ``verify`` command and the test gate.

Each suite returns (ok, lines); lines are human-readable progress/failure notes.
Random instances use exact rational masses and values so argmax comparisons
never hinge on floating-point ties.
"""

from __future__ import annotations

from fractions import Fraction

from .attainability import AttainabilityDistribution
from .cpe import (
    TruthVerdict,
    class_has_trm_member,
    cpe_utility,
    is_top_rank_monotone,
    is_trm_interval,
    optimal_rols,
    swap_gain,
    swap_predicate,
    trm_enumerate,
    truthful_bound_check,
    utility_wrt_reference,
)
from .equilibrium import EliteProblem, elite_cutoffs, verify_elite_profile
from .model import StudentType, all_rols, truthful_rol
from .attainability import Lottery
from .rngs import substream


def random_full_support(rng, m: int, outside: bool = True) -> AttainabilityDistribution:
    """Random exact-rational distribution with full support over the real schools."""
    real = m
    total_m = m + 1 if outside else m
    weights = [int(w) for w in rng.integers(1, 60, size=2**real)]
    denom = sum(weights)
    mass = {}
    for idx in range(2**real):
        state = tuple((idx >> b) & 1 for b in range(real))
        if outside:
            state = state + (1,)
        mass[state] = Fraction(weights[idx], denom)
    return AttainabilityDistribution(total_m, mass, total_m if outside else None)


def random_values(rng, m: int, outside: bool = True) -> tuple:
    """Strictly decreasing positive rational values; outside school worth 0."""
    raw = sorted({int(x) for x in rng.integers(1, 1000, size=3 * m)}, reverse=True)[:m]
    while len(raw) < m:
        raw.append(raw[-1] - 1)
    vals = tuple(Fraction(x) for x in raw)
    return vals + (Fraction(0),) if outside else vals


def verify_prop1(n_instances: int = 500, seed: int = 20240 , sizes=(3, 4, 5)):
    """Every exhaustive optimum under full support is top-rank monotone.

    Instances carry an always-attainable outside option (the safe school), so
    optima are compared as canonical classes: a class counts as top-rank
    monotone when some outcome-equivalent member is.
    """
    rng = substream(seed, 0)
    lines = []
    for k in range(n_instances):
        m = sizes[k % len(sizes)]
        dist = random_full_support(rng, m, outside=True)
        values = random_values(rng, m, outside=True)
        lam = 1 + Fraction(int(rng.integers(1, 81)), 20)
        best, _ = optimal_rols(values, lam, dist)
        order = truthful_rol(values).ranking
        for rol in best:
            if not class_has_trm_member(rol, dist.outside, order):
                lines.append(f"FAIL instance {k}: optimum {rol} not TRM (m={m}, lam={lam})")
                return False, lines
    lines.append(f"prop1: {n_instances} full-support instances, all optima top-rank monotone")
    return True, lines


def verify_prop1b(budget: int = 10_000, seed: int = 9000):
    """Randomized search: each of the 8 TRM reports (m=4) is somewhere uniquely optimal.

    The appendix's splitting construction guarantees such instances exist;
    budget-bounded random restarts over graded marginals stand in for it, and
    any classes still missing at the budget are reported.
    """
    from .model import canonicalize_rol

    targets = {canonicalize_rol(r, 4).ranking for r in trm_enumerate(4)}
    rng = substream(seed, 0)
    found: dict = {}
    attempt = 0
    while len(found) < len(targets) and attempt < budget:
        attempt += 1
        p = rng.random(3) * 0.95 + 0.02
        raw = {}
        total = 0.0
        for idx in range(2**3):
            state = tuple((idx >> b) & 1 for b in range(3))
            w = 1.0
            for b in range(3):
                w *= p[b] if state[b] else (1 - p[b])
            w *= float(rng.random() * 0.5 + 0.75)  # break independence across schools
            w = max(w, 1e-4)
            raw[state + (1,)] = w
            total += w
        mass = {s: Fraction(w / total).limit_denominator(10**6) for s, w in raw.items()}
        first = next(iter(mass))
        mass[first] += 1 - sum(mass.values())
        dist = AttainabilityDistribution(4, mass, 4)
        vraw = sorted({int(v) for v in rng.integers(1, 200, size=6)}, reverse=True)[:3]
        if len(vraw) < 3:
            continue
        values = tuple(Fraction(v) for v in vraw) + (Fraction(0),)
        lam = Fraction(int(rng.integers(21, 200)), 20)
        best, _ = optimal_rols(values, lam, dist)
        if len(best) == 1 and best[0].ranking in targets and best[0].ranking not in found:
            found[best[0].ranking] = (values, lam, attempt)
    missing = sorted(targets - set(found))
    lines = [
        f"prop1b: {len(found)}/8 TRM classes uniquely optimal within {attempt} attempts"
    ]
    if missing:
        lines.append(f"FAIL missing classes: {missing}")
        return False, lines
    return True, lines


def verify_prop1_full():
    ok_a, lines_a = verify_prop1()
    ok_b, lines_b = verify_prop1b()
    return ok_a and ok_b, lines_a + lines_b


def verify_prop2(n_instances: int = 500, seed: int = 20241, sizes=(3, 4, 5)):
    """Attainability bounds versus the exhaustive argmax on non-exclusive instances."""
    rng = substream(seed, 0)
    lines = []
    checked = {TruthVerdict.TRUTH_STRICT: 0, TruthVerdict.MISREPORT_STRICT: 0, TruthVerdict.INDETERMINATE: 0}
    for k in range(n_instances):
        m = sizes[k % len(sizes)]
        dist = random_full_support(rng, m, outside=True)
        values = random_values(rng, m, outside=True)
        lam = 1 + Fraction(int(rng.integers(1, 81)), 20)
        p1 = dist.marginal(1)
        verdict = truthful_bound_check(p1, lam)
        checked[verdict] += 1
        best, _ = optimal_rols(values, lam, dist)
        truth = truthful_rol(values)
        if verdict is TruthVerdict.TRUTH_STRICT:
            if len(best) != 1 or best[0] != truth:
                lines.append(f"FAIL instance {k}: TruthStrict but argmax {best}")
                return False, lines
        elif verdict is TruthVerdict.MISREPORT_STRICT:
            if truth in best:
                lines.append(f"FAIL instance {k}: MisreportStrict but truth optimal")
                return False, lines
    lines.append(
        "prop2: {} instances (truth-strict {}, misreport-strict {}, indeterminate {})".format(
            n_instances,
            checked[TruthVerdict.TRUTH_STRICT],
            checked[TruthVerdict.MISREPORT_STRICT],
            checked[TruthVerdict.INDETERMINATE],
        )
    )
    return True, lines


def verify_trm(max_m: int = 7, count_max_m: int = 8):
    """Classifier agreement on all permutations and the 2^(m-1) cardinality."""
    lines = []
    for m in range(2, count_max_m + 1):
        got = len(trm_enumerate(m))
        if got != 2 ** (m - 1):
            lines.append(f"FAIL count m={m}: {got} != {2 ** (m - 1)}")
            return False, lines
    for m in range(1, max_m + 1):
        enumerated = {r.ranking for r in trm_enumerate(m)}
        for rol in all_rols(m):
            a = is_top_rank_monotone(rol).is_trm
            b = is_trm_interval(rol)
            if a != b or a != (rol.ranking in enumerated):
                lines.append(f"FAIL m={m}: classifiers disagree on {rol}")
                return False, lines
    lines.append(f"trm: counts exact for m<=8, classifiers agree on all m! permutations for m<={max_m}")
    return True, lines


def verify_flip(n_instances: int = 50, seed: int = 20242, max_m: int = 4):
    """Sign of the adjacent-swap gain matches the flip inequality everywhere."""
    rng = substream(seed, 0)
    lines = []
    for k in range(n_instances):
        m = 3 if k % 2 == 0 else max_m
        dist = random_full_support(rng, m - 1, outside=True)
        values = random_values(rng, m - 1, outside=True)
        lam = Fraction(int(rng.integers(0, 81)), 20)
        for rol in all_rols(m):
            for pos in range(1, m):
                gain = swap_gain(values, lam, rol, pos, dist)
                predicted = swap_predicate(values, lam, rol, pos, dist)
                actual = 0 if gain == 0 else (1 if gain > 0 else -1)
                if actual != predicted:
                    lines.append(
                        f"FAIL instance {k} rol {rol} pos {pos}: gain {gain} vs predicted {predicted}"
                    )
                    return False, lines
    lines.append(f"flip: swap-gain sign matches the inequality on {n_instances} instances, m<={max_m}")
    return True, lines


def verify_equivalence(n_pairs: int = 1000, seed: int = 20243, rel_tol: float = 1e-9):
    """Self-referential utility equals the reduced pairwise form."""
    rng = substream(seed, 0)
    lines = []
    for k in range(n_pairs):
        m = int(rng.integers(2, 7))
        values = tuple(float(v) for v in rng.normal(0, 100, size=m))
        if len(set(values)) != m:
            continue
        raw = rng.random(m) + 1e-9
        probs = tuple(float(p) for p in raw / raw.sum())
        eta = float(rng.random() * 3)
        lam_i = 1 + float(rng.random() * 3)
        theta = StudentType(values, eta=eta, lam=lam_i)
        lot = Lottery(probs)
        direct = utility_wrt_reference(theta, lot, lot)
        reduced = cpe_utility(theta, lot)
        scale = max(1.0, abs(direct))
        if abs(direct - reduced) > rel_tol * scale:
            lines.append(f"FAIL pair {k}: {direct} vs {reduced}")
            return False, lines
    lines.append(f"equivalence: reduced form matches the double sum on {n_pairs} random pairs")
    return True, lines


def verify_equilibrium(tol: float = 1e-9, seed: int = 20244, n_problems: int = 20):
    """Cutoff self-consistency, the analytic two-student value, and monotonicity."""
    lines = []
    base = EliteProblem(n=2, q=1, v=1.0, levels=(2,), level_probs=(1,))
    cuts = elite_cutoffs(base)
    if abs(cuts[2] - 0.5) > 1e-9:
        lines.append(f"FAIL analytic cutoff: {cuts[2]} != 0.5")
        return False, lines
    report = verify_elite_profile(base, cuts)
    if report.max_regret > tol:
        lines.append(f"FAIL self-consistency regret {report.max_regret}")
        return False, lines
    rng = substream(seed, 0)
    for k in range(n_problems):
        n = int(rng.integers(2, 7))
        q = int(rng.integers(1, n))
        n_levels = int(rng.integers(2, 4))
        levels = sorted(float(l) for l in 1.05 + rng.random(n_levels) * 4)
        while min(b - a for a, b in zip(levels, levels[1:])) < 0.05:
            levels = sorted(float(l) for l in 1.05 + rng.random(n_levels) * 4)
        raw = rng.random(n_levels) + 0.1
        probs = tuple(float(p) for p in raw / raw.sum())
        problem = EliteProblem(n=n, q=q, v=1.0, levels=tuple(levels), level_probs=probs)
        cuts = elite_cutoffs(problem)
        ordered = [cuts[l] for l in problem.levels]
        if any(b <= a for a, b in zip(ordered, ordered[1:])):
            lines.append(f"FAIL monotonicity on problem {k}: {ordered}")
            return False, lines
        report = verify_elite_profile(problem, cuts)
        if report.max_regret > tol:
            lines.append(f"FAIL regret {report.max_regret} on problem {k}")
            return False, lines
    lines.append(f"equilibrium: analytic cutoff, monotonicity and regret<=tol on {n_problems} problems")
    return True, lines


SUITES = {
    "prop1": verify_prop1_full,
    "prop2": verify_prop2,
    "trm": verify_trm,
    "flip": verify_flip,
    "equivalence": verify_equivalence,
    "equilibrium": verify_equilibrium,
}


def run_suite(name: str):
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return SUITES[name]()
