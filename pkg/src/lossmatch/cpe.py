"""Reference-dependent utility and the choice-acclimating optimal report.

Utility from a lottery F evaluated against itself reduces to classical
expected utility minus a gain-loss penalty proportional to the loss dominance
parameter: every pair of possible outcomes costs the product of their
probabilities times their utility distance.  The search routines exploit that
only this reduced form matters when ranking reports.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

from .attainability import AttainabilityDistribution, Lottery, induced_lottery
from .model import Rol, StudentType, canonical_rols, relabel_by_preference


def utility_wrt_reference(theta: StudentType, lottery: Lottery, reference: Lottery):
    """Expected utility of ``lottery`` when ``reference`` forms the comparison point.

    The per-outcome term adds gains weighted by eta and losses weighted by
    eta * lam on top of the match value.
    """
    v, eta, lam = theta.values, theta.eta, theta.lam
    total = 0
    for s, fs in enumerate(lottery.probs):
        if fs == 0:
            continue
        inner = 0
        for r, gr in enumerate(reference.probs):
            if gr == 0:
                continue
            diff = v[s] - v[r]
            inner += gr * (v[s] + (eta if diff >= 0 else eta * lam) * diff)
        total += fs * inner
    return total


def cpe_value(values: Sequence, lam_dom, probs: Sequence):
    """U = sum_s f_s v_s - lam_dom * sum over pairs of f_s f_r |v_s - v_r|."""
    classical = sum(f * v for f, v in zip(probs, values))
    penalty = 0
    m = len(values)
    for a in range(m):
        if probs[a] == 0:
            continue
        for b in range(a + 1, m):
            if probs[b] == 0:
                continue
            penalty += probs[a] * probs[b] * abs(values[a] - values[b])
    return classical - lam_dom * penalty


def cpe_utility(theta: StudentType, lottery: Lottery):
    """Utility of a lottery that also serves as its own reference point."""
    return cpe_value(theta.values, theta.loss_dominance, lottery.probs)


# --- optimal reports ----------------------------------------------------------


def optimal_rols(
    values: Sequence,
    lam_dom,
    dist: AttainabilityDistribution,
    cap: int = 7,
) -> tuple[list[Rol], object]:
    """Argmax set of canonical ROLs by exhaustive enumeration, with the max value.

    Ties are kept and returned in lexicographic order; a strict optimum is a
    singleton set.  Exact when values and masses are rationals: a float pass
    prunes candidates far from the top, the survivors are re-ranked exactly.
    """
    if dist.m > cap:
        raise ValueError(f"m={dist.m} exceeds exhaustive cap {cap}")
    candidates = canonical_rols(dist.m, dist.outside)

    float_dist = AttainabilityDistribution(
        dist.m, {s: float(p) for s, p in dist.mass.items()}, dist.outside
    )
    float_vals = [float(v) for v in values]
    approx = [
        cpe_value(float_vals, float(lam_dom), _lottery_probs_unchecked(rol, float_dist))
        for rol in candidates
    ]
    top = max(approx)
    margin = 1e-6 * max(1.0, abs(top))

    best_value = None
    best: list[Rol] = []
    for rol, a in zip(candidates, approx):
        if a < top - margin:
            continue
        u = cpe_value(values, lam_dom, induced_lottery(rol, dist).probs)
        if best_value is None or u > best_value:
            best_value, best = u, [rol]
        elif u == best_value:
            best.append(rol)
    return best, best_value


def _lottery_probs_unchecked(rol: Rol, dist: AttainabilityDistribution) -> list:
    f = [0.0] * dist.m
    for state, p in dist.mass.items():
        for s in rol:
            if state[s - 1] == 1:
                f[s - 1] += p
                break
    return f


def optimal_rol_trm(
    values: Sequence,
    lam_dom,
    dist: AttainabilityDistribution,
) -> tuple[list[Rol], object]:
    """Argmax over the top-rank monotone family only (2^(m-1) candidates)."""
    ranks = relabel_by_preference(values)
    by_rank = sorted(range(1, dist.m + 1), key=lambda s: ranks[s - 1])
    best_value = None
    best: list[Rol] = []
    for rank_seq in trm_rank_sequences(dist.m):
        rol = Rol(tuple(by_rank[r - 1] for r in rank_seq))
        u = cpe_value(values, lam_dom, induced_lottery(rol, dist).probs)
        if best_value is None or u > best_value:
            best_value, best = u, [rol]
        elif u == best_value and rol not in best:
            best.append(rol)
    best.sort(key=lambda r: r.ranking)
    return best, best_value


# --- top-rank monotonicity ----------------------------------------------------


@dataclass(frozen=True)
class TrmClassification:
    rol: Rol
    truthful_order: tuple[int, ...]
    is_trm: bool
    witness: tuple[int, int] | None = None


def is_top_rank_monotone(rol: Rol, truthful_order: Sequence[int] | None = None) -> TrmClassification:
    """Classify a report against the definition of top-rank monotonicity.

    Schools preferred over the top-ranked one must appear in reversed true
    order; the remaining schools must appear in preserved true order.  The
    witness is the first adjacent pair violating its side's order.
    """
    order = tuple(truthful_order) if truthful_order is not None else tuple(range(1, len(rol) + 1))
    rank = {s: k for k, s in enumerate(order, start=1)}
    seq = [rank[s] for s in rol]
    top = seq[0]
    preferred = [(r, s) for r, s in zip(seq, rol) if r < top]
    others = [(r, s) for r, s in zip(seq, rol) if r > top]
    for (ra, sa), (rb, sb) in zip(preferred, preferred[1:]):
        if ra < rb:  # preferred block must be rank-decreasing along the list
            return TrmClassification(rol, order, False, (sa, sb))
    for (ra, sa), (rb, sb) in zip(others, others[1:]):
        if ra > rb:  # non-preferred block must be rank-increasing
            return TrmClassification(rol, order, False, (sa, sb))
    return TrmClassification(rol, order, True, None)


def is_trm_interval(rol: Rol, truthful_order: Sequence[int] | None = None) -> bool:
    """Interval-prefix test: every prefix must be contiguous in the true order.

    Independently derived O(m) formulation; agrees with the definitional
    classifier on all permutations (guarded by tests).
    """
    order = tuple(truthful_order) if truthful_order is not None else tuple(range(1, len(rol) + 1))
    rank = {s: k for k, s in enumerate(order, start=1)}
    seq = [rank[s] for s in rol]
    lo = hi = seq[0]
    for r in seq[1:]:
        if r == lo - 1:
            lo = r
        elif r == hi + 1:
            hi = r
        else:
            return False
    return True


def trm_rank_sequences(m: int) -> list[tuple[int, ...]]:
    """All rank sequences growing a contiguous interval; exactly 2^(m-1) of them."""
    results = []

    def grow(seq, lo, hi):
        if len(seq) == m:
            results.append(tuple(seq))
            return
        if lo > 1:
            grow(seq + [lo - 1], lo - 1, hi)
        if hi < m:
            grow(seq + [hi + 1], lo, hi + 1)

    for start in range(1, m + 1):
        grow([start], start, start)
    return sorted(results)


def trm_enumerate(m: int) -> list[Rol]:
    """All top-rank monotone ROLs of 1..m (truthful order ascending)."""
    return [Rol(seq) for seq in trm_rank_sequences(m)]


def class_has_trm_member(rol: Rol, outside: int, truthful_order: Sequence[int] | None = None) -> bool:
    """Whether some outcome-equivalent reordering behind the outside option is TRM.

    Schools ranked after the outside option never matter for the lottery, so a
    report is rationalizable iff its equivalence class contains a top-rank
    monotone member; that member, if any, sorts the dropped schools in
    decreasing preference.
    """
    order = tuple(truthful_order) if truthful_order is not None else tuple(range(1, len(rol) + 1))
    rank = {s: k for k, s in enumerate(order, start=1)}
    k = rol.position(outside)
    suffix = sorted(rol.ranking[k + 1 :], key=lambda s: rank[s], reverse=True)
    candidate = Rol(rol.ranking[: k + 1] + tuple(suffix))
    return is_trm_interval(candidate, order)


# --- local comparisons and bounds ----------------------------------------------


def swap_gain(
    values: Sequence,
    lam_dom,
    rol: Rol,
    position: int,
    dist: AttainabilityDistribution,
):
    """Utility of ranking the better school first minus the reverse, at an adjacent slot.

    ``position`` is 1-based; the two schools at (position, position+1) are
    compared with the better-valued one ranked first.
    """
    a, b = rol[position - 1], rol[position]
    hi, lo = (a, b) if values[a - 1] > values[b - 1] else (b, a)
    prefix = rol.ranking[: position - 1]
    tail = rol.ranking[position + 1 :]
    hi_first = Rol(prefix + (hi, lo) + tail)
    lo_first = Rol(prefix + (lo, hi) + tail)
    u_hi = cpe_value(values, lam_dom, induced_lottery(hi_first, dist).probs)
    u_lo = cpe_value(values, lam_dom, induced_lottery(lo_first, dist).probs)
    return u_hi - u_lo


def swap_predicate(
    values: Sequence,
    lam_dom,
    rol: Rol,
    position: int,
    dist: AttainabilityDistribution,
) -> int:
    """Predicted sign of ``swap_gain`` from the flip inequality.

    Returns +1, 0, or -1.  The shifted mass eps is the probability that both
    swapped schools are attainable while everything ranked before them is not;
    the inequality compares eps/lam_dom against a weighted tail expression of
    the better-first lottery.
    """
    a, b = rol[position - 1], rol[position]
    hi, lo = (a, b) if values[a - 1] > values[b - 1] else (b, a)
    prefix = rol.ranking[: position - 1]
    tail = rol.ranking[position + 1 :]
    hi_first = Rol(prefix + (hi, lo) + tail)

    eps = 0
    for state, p in dist.mass.items():
        if (
            p > 0
            and state[hi - 1] == 1
            and state[lo - 1] == 1
            and all(state[s - 1] == 0 for s in prefix)
        ):
            eps += p
    if eps == 0:
        return 0
    if lam_dom == 0:
        return 1  # classical dominance: shifting mass up is strictly better

    ranks = relabel_by_preference(values)
    f = induced_lottery(hi_first, dist).probs
    f_by_rank = [0] * (len(values) + 1)
    for s in range(1, len(values) + 1):
        f_by_rank[ranks[s - 1]] = f[s - 1]
    v_by_rank = [None] * (len(values) + 1)
    for s in range(1, len(values) + 1):
        v_by_rank[ranks[s - 1]] = values[s - 1]
    x, y = ranks[hi - 1], ranks[lo - 1]
    vx, vy = v_by_rank[x], v_by_rank[y]
    rhs = (
        -sum(f_by_rank[1 : x + 1])
        + eps
        + sum(f_by_rank[s] * (vx + vy - 2 * v_by_rank[s]) / (vx - vy) for s in range(x + 1, y))
        + sum(f_by_rank[y:])
    )
    lhs = Fraction(1) / lam_dom if isinstance(lam_dom, (int, Fraction)) else 1.0 / lam_dom
    if lhs > rhs:
        return 1
    if lhs < rhs:
        return -1
    return 0


class TruthVerdict(Enum):
    TRUTH_STRICT = "TruthStrict"
    MISREPORT_STRICT = "MisreportStrict"
    INDETERMINATE = "Indeterminate"


def truthful_bound_check(p1, lam_dom) -> TruthVerdict:
    """Classify truthfulness from the top school's attainability probability alone.

    Valid when the most preferred school is not exclusive (caller attests).
    Truth is strictly optimal above 1 - 1/lam_dom and strictly suboptimal below
    half that bound; in between the answer depends on the rest of the
    distribution and the cardinal utilities.
    """
    if lam_dom < 1:
        raise ValueError("bounds degenerate for loss dominance < 1: truth is optimal")
    bound = 1 - Fraction(1, 1) / lam_dom if isinstance(lam_dom, (int, Fraction)) else 1 - 1.0 / lam_dom
    if p1 > bound:
        return TruthVerdict.TRUTH_STRICT
    if 2 * p1 < bound:
        return TruthVerdict.MISREPORT_STRICT
    return TruthVerdict.INDETERMINATE


def drop_consistency_check(rol: Rol, truthful_order: Sequence[int], outside: int) -> bool:
    """False iff the report drops a desirable school while listing a preferred one.

    Dropping means ranking behind the outside option; desirable means preferred
    to it.  Such reports are never strictly optimal.
    """
    order = tuple(truthful_order)
    rank = {s: k for k, s in enumerate(order, start=1)}
    cut = rol.position(outside)
    listed = rol.ranking[:cut]
    dropped = [s for s in rol.ranking[cut + 1 :] if rank[s] < rank[outside]]
    for k in dropped:
        if any(rank[l] < rank[k] for l in listed):
            return False
    return True
