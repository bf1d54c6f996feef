from fractions import Fraction
from itertools import permutations

import pytest

from lossmatch.attainability import (
    AttainabilityDistribution,
    attainability_from_joint,
    exact_attainability,
    has_full_support,
    induced_lottery,
    is_exclusive,
    mc_attainability,
    truthful_strategy,
)
from lossmatch.experiments import example_attainability, example_instance, example_others_supports
from lossmatch.model import Instance, Rol, StudentType
from lossmatch.verify import random_full_support
from lossmatch.rngs import substream

OMEGA = Fraction(1, 4)
EPS = Fraction(1, 20)

TABLE1 = {
    (1, 1, 1): Fraction(10, 160),
    (0, 1, 1): Fraction(57, 160),
    (1, 0, 1): Fraction(3, 160),
    (0, 0, 1): Fraction(90, 160),
}

TABLE2 = {
    "123": (Fraction(13, 160), Fraction(57, 160), Fraction(90, 160)),
    "213": (Fraction(3, 160), Fraction(67, 160), Fraction(90, 160)),
    "231": (Fraction(0), Fraction(67, 160), Fraction(93, 160)),
    "132": (Fraction(13, 160), Fraction(0), Fraction(147, 160)),
    "321": (Fraction(0), Fraction(0), Fraction(1)),
    "312": (Fraction(0), Fraction(0), Fraction(1)),
}


@pytest.fixture(scope="module")
def table1_dist():
    return example_attainability(OMEGA, EPS)


def test_example_attainability_exact(table1_dist):
    assert dict(table1_dist.mass) == TABLE1
    assert table1_dist.validate() == []


def test_attainability_closed_forms():
    # the worked example's cells in closed form, at a second parameter point
    w, e = Fraction(2, 5), Fraction(1, 7)
    d = example_attainability(w, e)
    assert d.mass[(1, 1, 1)] == w**2
    assert d.mass[(0, 1, 1)] == 2 * w * (1 - w) * (1 - e)
    assert d.mass[(1, 0, 1)] == 2 * w * (1 - w) * e
    assert d.mass[(0, 0, 1)] == (1 - w) ** 2


def test_highest_priority_all_attainable():
    d = example_attainability(Fraction(1), EPS)
    assert d.states() == {(1, 1, 1): Fraction(1)}


def test_abundant_capacity_all_attainable():
    inst = Instance(capacities=(3, 3, 3), students=(1, 2, 3), outside=3)
    supports = {j: ((1, (9, 5, 0), 0),) for j in (2, 3)}
    d = exact_attainability(inst, 1, Fraction(1, 3), supports, truthful_strategy)
    assert d.states() == {(1, 1, 1): Fraction(1)}


def test_exact_attainability_cap():
    inst = example_instance()
    with pytest.raises(ValueError, match="support too large"):
        exact_attainability(
            inst, "X", OMEGA, example_others_supports(EPS, 100, 30), truthful_strategy, cap=3
        )


@pytest.mark.parametrize("rol,expected", sorted(TABLE2.items()))
def test_induced_lotteries_match_table(table1_dist, rol, expected):
    assert induced_lottery(Rol.parse(rol), table1_dist).probs == expected


def test_outside_first_is_degenerate(table1_dist):
    lot = induced_lottery(Rol((3, 1, 2)), table1_dist)
    assert lot.probs == (0, 0, 1)


def test_lottery_requires_attainable_school():
    d = AttainabilityDistribution(2, {(0, 0): 1.0}, None)
    with pytest.raises(ValueError, match="no attainable school"):
        induced_lottery(Rol((1, 2)), d)


def test_full_support_cases(table1_dist):
    assert has_full_support(table1_dist)
    partial = AttainabilityDistribution(
        3, {(1, 1, 1): 0.5, (0, 1, 1): 0.25, (0, 0, 1): 0.25}, 3
    )
    assert not has_full_support(partial)
    single = AttainabilityDistribution(1, {(1,): 0.3, (0,): 0.7}, None)
    assert has_full_support(single)


def test_exclusive_cases(table1_dist):
    assert not is_exclusive(table1_dist, 1)
    both = AttainabilityDistribution(2, {(1, 0): 0.5, (0, 1): 0.5}, None)
    assert is_exclusive(both, 1) and is_exclusive(both, 2)
    neither = AttainabilityDistribution(2, {(1, 1): 1.0}, None)
    assert not is_exclusive(neither, 1) and not is_exclusive(neither, 2)


def test_joint_support_agrees_with_score_enumeration(table1_dist):
    # independent two-point score grid: build the joint table by hand and match
    inst = example_instance()
    cases = []
    for wy in (Fraction(1, 8), Fraction(7, 8)):
        for wz in (Fraction(3, 8), Fraction(5, 8)):
            for vy, py in (((100, 30, 0), 1 - EPS), ((30, 100, 0), EPS)):
                for vz, pz in (((100, 30, 0), 1 - EPS), ((30, 100, 0), EPS)):
                    profile = {
                        "X": StudentType.from_loss_dominance((100, 30, 0), 0, score=Fraction(1, 4)),
                        "Y": StudentType.from_loss_dominance(vy, 0, score=wy),
                        "Z": StudentType.from_loss_dominance(vz, 0, score=wz),
                    }
                    cases.append((Fraction(1, 4) * py * pz, profile))
    d = attainability_from_joint(inst, "X", cases, truthful_strategy)
    # Z's grid sits entirely above X, Y is below X half the time: X is never
    # highest, lowest iff Y lands high, and middle otherwise (then the higher
    # rival's preference decides which school stays open)
    assert sum(d.mass.values()) == 1
    assert d.mass.get((1, 1, 1), 0) == 0
    assert d.mass[(0, 0, 1)] == Fraction(1, 2)
    assert d.mass[(0, 1, 1)] == Fraction(1, 2) * (1 - EPS)
    assert d.mass[(1, 0, 1)] == Fraction(1, 2) * EPS


def test_mc_matches_exact_within_3_sigma(table1_dist):
    inst = example_instance()
    mc = mc_attainability(
        inst, "X", 0.25, example_others_supports(0.05, 100, 30), truthful_strategy,
        replications=30_000, seed=7,
    )
    for state, p in TABLE1.items():
        err = abs(mc.dist.mass.get(state, 0.0) - float(p))
        bound = 3 * max(mc.stderr.get(state, 0.0), 1e-4)
        assert err <= bound, (state, err, bound)
    # total-variation acceptance bound
    tv = 0.5 * sum(
        abs(mc.dist.mass.get(s, 0.0) - float(TABLE1.get(s, 0)))
        for s in set(mc.dist.mass) | set(TABLE1)
    )
    assert tv <= 5 * (len(TABLE1) / mc.replications) ** 0.5


@pytest.mark.slow
def test_mc_million_replications(table1_dist):
    inst = example_instance()
    mc = mc_attainability(
        inst, "X", 0.25, example_others_supports(0.05, 100, 30), truthful_strategy,
        replications=1_000_000, seed=11,
    )
    for state, p in TABLE1.items():
        assert abs(mc.dist.mass.get(state, 0.0) - float(p)) <= 3 * max(mc.stderr[state], 1e-5)


def test_mc_degenerate_and_deterministic():
    inst = example_instance()
    one = mc_attainability(
        inst, "X", 0.25, example_others_supports(0.05, 100, 30), truthful_strategy,
        replications=1, seed=3,
    )
    assert sum(one.dist.mass.values()) == 1.0 and len(one.dist.states()) == 1
    again = mc_attainability(
        inst, "X", 0.25, example_others_supports(0.05, 100, 30), truthful_strategy,
        replications=500, seed=3,
    )
    again2 = mc_attainability(
        inst, "X", 0.25, example_others_supports(0.05, 100, 30), truthful_strategy,
        replications=500, seed=3,
    )
    assert again.dist.mass == again2.dist.mass


def test_zero_replications():
    inst = example_instance()
    mc = mc_attainability(
        inst, "X", 0.25, example_others_supports(0.05, 100, 30), truthful_strategy,
        replications=0, seed=3,
    )
    assert mc.dist.mass == {} and mc.replications == 0


# --- properties ----------------------------------------------------------------


def test_lottery_sums_and_suffix_invariance(table1_dist):
    for perm in permutations((1, 2, 3)):
        rol = Rol(perm)
        lot = induced_lottery(rol, table1_dist)
        assert sum(lot.probs) == 1
    # permuting the sub-ranking behind the outside option never changes the lottery
    rng = substream(42, 0)
    for m in (3, 4):
        dist = random_full_support(rng, m - 1, outside=True)
        for perm in permutations(range(1, m + 1)):
            rol = Rol(perm)
            cut = rol.position(m)
            base = induced_lottery(rol, dist).probs
            for suffix in permutations(rol.ranking[cut + 1 :]):
                other = Rol(rol.ranking[: cut + 1] + suffix)
                assert induced_lottery(other, dist).probs == base


def test_marginal_consistency(table1_dist):
    # total first-rank mass at s over ROLs placing s first equals p_s
    for s in (1, 2, 3):
        rols = [Rol(p) for p in permutations((1, 2, 3)) if p[0] == s]
        masses = {induced_lottery(r, table1_dist).probs[s - 1] for r in rols}
        assert masses == {table1_dist.marginal(s)}


def test_swap_mass_property():
    rng = substream(43, 0)
    for _ in range(20):
        m = 4
        dist = random_full_support(rng, m - 1, outside=True)
        for perm in permutations(range(1, m + 1)):
            rol = Rol(perm)
            for k in range(m - 1):
                swapped = list(perm)
                swapped[k], swapped[k + 1] = swapped[k + 1], swapped[k]
                other = Rol(tuple(swapped))
                f1 = induced_lottery(rol, dist).probs
                f2 = induced_lottery(other, dist).probs
                x, y = perm[k], perm[k + 1]
                eps = sum(
                    p
                    for state, p in dist.mass.items()
                    if state[x - 1] == 1 and state[y - 1] == 1
                    and all(state[s - 1] == 0 for s in perm[:k])
                )
                diffs = {s: f1[s - 1] - f2[s - 1] for s in range(1, m + 1)}
                assert diffs[x] == eps and diffs[y] == -eps
                assert all(d == 0 for s, d in diffs.items() if s not in (x, y))


def test_attainability_json_serialization(table1_dist):
    rows = table1_dist.to_json()
    assert {"state", "prob"} == set(rows[0])
    as_map = {r["state"]: r["prob"] for r in rows}
    assert as_map["111"] == "1/16"
    assert as_map["011"] == "57/160"
    float_dist = AttainabilityDistribution(2, {(1, 1): 0.25, (0, 1): 0.75}, 2)
    as_map = {r["state"]: r["prob"] for r in float_dist.to_json()}
    assert as_map["11"] == "0.25"
