import math
from fractions import Fraction

import numpy as np
import pytest

from lossmatch.equilibrium import (
    EliteChoice,
    EliteProblem,
    SeqCpeVerdict,
    cbne_fixed_point,
    elite_adjacency_reduction,
    elite_apply_decision,
    elite_attainability,
    elite_cutoffs,
    elite_grid_game,
    elite_realized_rols,
    finite_joint_game,
    grid_cutoff_cell,
    mc_elite_attainability,
    order_stat_prob,
    sequential_cpe_osp_example,
    tmap,
    verify_cbne,
    verify_elite_profile,
)
from lossmatch.mechanisms import da_student_proposing, justified_envy_pairs, serial_dictatorship, truthful_chooser
from lossmatch.model import Instance, Rol, StudentType, TabulatedCdf
from lossmatch.verify import verify_equilibrium


def test_order_stat_examples():
    assert order_stat_prob(0.5, 2, 1) == 0.5
    assert order_stat_prob(0.5, 3, 1) == 0.25
    assert order_stat_prob(0.3, 2, 5) == 1
    assert order_stat_prob(Fraction(1, 2), 3, 1) == Fraction(1, 4)


def test_order_stat_with_tabulated_law():
    law = TabulatedCdf([0, 1], [0, 1])
    assert order_stat_prob(0.5, 2, 1, law) == 0.5
    with pytest.raises(ValueError):
        order_stat_prob(2, 2, 1, law)


def test_elite_apply_decision():
    assert elite_apply_decision(1.0, 10)
    assert not elite_apply_decision(0.4, 2)
    assert elite_apply_decision(0.5, 2)  # ties break toward applying
    for f in (0.01, 0.5, 1.0):
        assert elite_apply_decision(f, 1)
        assert elite_apply_decision(f, 0)
    with pytest.raises(ValueError):
        elite_apply_decision(0.5, -1)


def test_elite_adjacency_reduction():
    assert elite_adjacency_reduction(0.9, 2) is EliteChoice.LIST_ALL_ELITE
    assert elite_adjacency_reduction(0.1, 2) is EliteChoice.LIST_NONE
    assert elite_adjacency_reduction(0.3, 0) is EliteChoice.LIST_ALL_ELITE


def test_elite_problem_validation():
    good = EliteProblem(n=3, q=1, v=1.0, levels=(0, 2.0), level_probs=(0.25, 0.75))
    assert good.validate() == []
    bad = EliteProblem(n=2, q=3, v=1.0, levels=(0.5,), level_probs=(1,))
    report = bad.validate()
    assert any("seats never bind" in p for p in report)
    assert any("exceed 1" in p for p in report)


def test_cutoff_two_students_analytic():
    problem = EliteProblem(n=2, q=1, v=1.0, levels=(2,), level_probs=(1,))
    cuts = elite_cutoffs(problem)
    assert abs(cuts[2] - 0.5) <= 1e-9


def test_cutoff_low_lambda_is_zero():
    problem = EliteProblem(n=4, q=2, v=1.0, levels=(0, 1.0), level_probs=(0.5, 0.5))
    cuts = elite_cutoffs(problem)
    assert cuts[0] == 0.0 and cuts[1.0] == 0.0


def test_cutoff_capacity_never_binds():
    problem = EliteProblem(n=2, q=2, v=1.0, levels=(3,), level_probs=(1,))
    assert elite_cutoffs(problem)[3] == 0.0


def test_cutoffs_increasing_in_lambda():
    problem = EliteProblem(n=4, q=1, v=1.0, levels=(1.5, 2.5, 4.0), level_probs=(0.3, 0.4, 0.3))
    cuts = elite_cutoffs(problem)
    assert cuts[1.5] < cuts[2.5] < cuts[4.0]


def test_cutoff_three_students_analytic():
    # single level: P_{2:1}(w) = w^2 = 1 - 1/lam
    problem = EliteProblem(n=3, q=1, v=1.0, levels=(2,), level_probs=(1,))
    cuts = elite_cutoffs(problem)
    assert abs(cuts[2] - math.sqrt(0.5)) <= 1e-9


def test_elite_profile_self_consistency():
    problem = EliteProblem(n=3, q=1, v=1.0, levels=(0, 1.8, 3.0), level_probs=(0.2, 0.5, 0.3))
    cuts = elite_cutoffs(problem)
    report = verify_elite_profile(problem, cuts)
    assert report.max_regret <= 1e-9
    # the attainability at each binding cutoff hits its indifference target
    for lam in (1.8, 3.0):
        f = elite_attainability(problem, cuts, cuts[lam])
        assert abs(f - (1 - 1 / lam)) <= 1e-9


def test_elite_mc_cross_check():
    problem = EliteProblem(n=3, q=1, v=1.0, levels=(0, 2.0), level_probs=(0.3, 0.7))
    cuts = elite_cutoffs(problem)
    target = 1 - 1 / 2.0
    f_hat, se = mc_elite_attainability(problem, cuts, cuts[2.0], replications=20_000, seed=5)
    assert abs(f_hat - target) <= 5 * max(se, 1e-4)


def test_elite_mc_cross_check_multi_level():
    # the intermediate-level recursion is the subtle piece: check every level
    problem = EliteProblem(
        n=4, q=2, v=1.0, levels=(0, 1.6, 2.4, 4.0), level_probs=(0.2, 0.3, 0.3, 0.2)
    )
    cuts = elite_cutoffs(problem)
    for lam in (1.6, 2.4, 4.0):
        f_hat, se = mc_elite_attainability(problem, cuts, cuts[lam], replications=20_000, seed=21)
        assert abs(f_hat - (1 - 1 / lam)) <= 5 * max(se, 1e-4)


@pytest.mark.slow
def test_elite_mc_cross_check_100k():
    problem = EliteProblem(n=3, q=1, v=1.0, levels=(0, 2.0), level_probs=(0.3, 0.7))
    cuts = elite_cutoffs(problem)
    for lam in (2.0,):
        f_hat, se = mc_elite_attainability(problem, cuts, cuts[lam], replications=100_000, seed=5)
        assert abs(f_hat - (1 - 1 / lam)) <= 5 * max(se, 1e-4)


def test_equilibrium_suite():
    ok, lines = verify_equilibrium(n_problems=6)
    assert ok, lines


# --- finite games ------------------------------------------------------------------


def single_student_game():
    inst = Instance(capacities=(1, 1, 3), students=("A",), outside=3)
    theta = StudentType.from_loss_dominance((100, 30, 0), Fraction(3, 2), score=0.5)
    return finite_joint_game(inst, [(1.0, {"A": theta})])


def test_single_student_converges_immediately():
    game = single_student_game()
    cert = cbne_fixed_point(game)
    assert cert.converged and cert.max_regret == 0
    assert cert.iterations <= 1
    # alone, everything is attainable: the pure CPE is the truthful report
    sigma = cert.profile[0]
    best_action = int(np.argmax(sigma[0]))
    assert game.actions[best_action].compact() == "123"


def test_verify_cbne_on_abundant_capacity_truthful():
    inst = Instance(capacities=(2, 2, 2), students=("A", "B"), outside=None)
    thetas = {
        "A": StudentType.from_loss_dominance((9, 4, 1), 2, score=0.7),
        "B": StudentType.from_loss_dominance((9, 4, 1), 2, score=0.3),
    }
    game = finite_joint_game(inst, [(1.0, thetas)])
    truthful = []
    for i in range(2):
        mat = np.zeros((1, len(game.actions)))
        mat[0, game.actions.index(Rol((1, 2, 3)))] = 1.0
        truthful.append(mat)
    report = verify_cbne(game, truthful)
    assert report["ok"] and report["max_regret"] == 0


def test_tmap_fixed_point_at_zero_regret():
    game = single_student_game()
    cert = cbne_fixed_point(game)
    stepped = tmap(game, cert.profile)
    for a, b in zip(stepped, cert.profile):
        assert np.allclose(a, b, atol=1e-12)


def test_correlated_two_student_game_converges():
    # perfectly correlated scores, both moderately loss averse: truth is a CBNE
    inst = Instance(capacities=(1, 2), students=(1, 2), outside=2)
    th_hi = StudentType.from_loss_dominance((1, 0), Fraction(1, 2), score=0.9)
    th_lo = StudentType.from_loss_dominance((1, 0), Fraction(1, 2), score=0.2)
    cases = [
        (0.5, {1: th_hi, 2: th_lo}),
        (0.5, {1: th_lo, 2: th_hi}),
    ]
    game = finite_joint_game(inst, cases)
    cert = cbne_fixed_point(game)
    assert cert.converged
    check = verify_cbne(game, cert.profile)
    assert check["max_regret"] <= 1e-9


# --- the discretized elite game ---------------------------------------------------


@pytest.fixture(scope="module")
def grid_certificate():
    problem = EliteProblem(n=3, q=1, v=1.0, levels=(2,), level_probs=(1,))
    game = elite_grid_game(problem, grid=20)
    cert = cbne_fixed_point(game, tol=1e-9, max_iter=300)
    return problem, game, cert


def test_grid_game_converges_to_cutoff(grid_certificate):
    problem, game, cert = grid_certificate
    assert cert.converged and cert.max_regret <= 1e-6
    check = verify_cbne(game, cert.profile)
    assert check["max_regret"] <= 1e-6
    analytic = math.sqrt(0.5)
    for student in range(3):
        cell = grid_cutoff_cell(cert, 20, student)
        assert cell is not None, "strategy is not cutoff shaped"
        boundary = (cell - 1) / 20
        assert abs(boundary - analytic) <= 1 / 20
    # T-map fixed point at the converged profile
    stepped = tmap(game, cert.profile)
    for a, b in zip(stepped, cert.profile):
        assert np.allclose(a, b, atol=1e-9)


def test_two_student_grid_below_threshold_plays_district():
    problem = EliteProblem(n=2, q=1, v=1.0, levels=(2,), level_probs=(1,))
    game = elite_grid_game(problem, grid=10)
    cert = cbne_fixed_point(game, tol=1e-9)
    assert cert.converged
    district = game.actions.index(Rol((2, 1)))
    for student in range(2):
        for cell in range(5):  # cells entirely below the 0.5 cutoff
            assert cert.profile[student][cell, district] >= 1 - 1e-9


def test_truthful_profile_has_regret_below_cutoff():
    problem = EliteProblem(n=2, q=1, v=1.0, levels=(2,), level_probs=(1,))
    game = elite_grid_game(problem, grid=10)
    apply_idx = game.actions.index(Rol((1, 2)))
    truthful = []
    for i in range(2):
        mat = np.zeros((10, 2))
        mat[:, apply_idx] = 1.0
        truthful.append(mat)
    report = verify_cbne(game, truthful)
    # below-threshold types lose from applying when everyone applies
    for cell in range(1, 5):
        assert report["regrets"][(1, cell + 1)] > 0
        assert report["regrets"][(2, cell + 1)] > 0


def test_realized_instability_demonstration():
    problem = EliteProblem(n=2, q=1, v=1.0, levels=(2,), level_probs=(1,))
    cuts = elite_cutoffs(problem)
    realized = {1: (2, 0.3), 2: (2, 0.4)}  # both below the 0.5 cutoff
    rols = elite_realized_rols(problem, cuts, realized)
    assert rols == {1: Rol((2, 1)), 2: Rol((2, 1))}
    capacities = (1, 2)
    priorities = {1: {1: 0.3, 2: 0.4}, 2: {1: 0.3, 2: 0.4}}
    alloc = da_student_proposing(rols, priorities, capacities)
    types = {
        i: StudentType.from_loss_dominance((1, 0), 2, score=s)
        for i, (_, s) in realized.items()
    }
    assert justified_envy_pairs(alloc, types, capacities) == {(1, 1), (2, 1)}
    sd = serial_dictatorship({1: 0.3, 2: 0.4}, truthful_chooser(types), capacities)
    assert sd == {2: 1, 1: 2}
    assert justified_envy_pairs(sd, types, capacities) == set()


# --- sequential mechanism ----------------------------------------------------------


def test_osp_example_cases():
    assert sequential_cpe_osp_example(0.3, 2, 10, 4) is SeqCpeVerdict.NOT
    assert sequential_cpe_osp_example(0.6, 2, 10, 4) is SeqCpeVerdict.TRUTHFUL
    for eps in (0.1, 0.5, 0.9):
        assert sequential_cpe_osp_example(eps, 1, 10, 4) is SeqCpeVerdict.TRUTHFUL
        assert sequential_cpe_osp_example(eps, Fraction(1, 2), 10, 4) is SeqCpeVerdict.TRUTHFUL
    assert sequential_cpe_osp_example(0.99, 50, 10, 4) is SeqCpeVerdict.TRUTHFUL
    assert sequential_cpe_osp_example(Fraction(1, 2), Fraction(2), 10, 4) is SeqCpeVerdict.TRUTHFUL


def test_osp_example_validation():
    with pytest.raises(ValueError):
        sequential_cpe_osp_example(0, 2, 10, 4)
    with pytest.raises(ValueError):
        sequential_cpe_osp_example(0.5, 2, 4, 10)


def test_elite_adjacency_rejects_asymmetric_values():
    with pytest.raises(ValueError, match="asymmetric"):
        elite_adjacency_reduction(0.9, 2, elite_values=(5, 7))
    assert elite_adjacency_reduction(0.9, 2, elite_values=(5, 5)) is EliteChoice.LIST_ALL_ELITE


def test_budget_exhaustion_reports_nonconvergence():
    problem = EliteProblem(n=3, q=1, v=1.0, levels=(2,), level_probs=(1,))
    game = elite_grid_game(problem, grid=20)
    cert = cbne_fixed_point(game, tol=1e-12, max_iter=1, br_rounds=0, pure_fallback=False, damping=0.1)
    assert not cert.converged
    assert cert.max_regret > 1e-12
    assert cert.profile is not None and len(cert.profile) == 3


def test_certificate_serialization():
    game = single_student_game()
    cert = cbne_fixed_point(game)
    payload = cert.to_json(game)
    assert payload["converged"] is True
    assert payload["iterations"] == cert.iterations
    assert set(payload["profile"]) == {"A"}
    weights = payload["profile"]["A"]["t0"]
    assert abs(sum(weights.values()) - 1) < 1e-9


def test_profile_validation():
    from lossmatch.equilibrium import validate_profile, uniform_profile

    game = single_student_game()
    assert validate_profile(game, uniform_profile(game)) == []
    bad = uniform_profile(game)
    bad[0][0, 0] = 0.9
    assert any("sum to" in p for p in validate_profile(game, bad))
    bad[0][0, 0] = -0.1
    assert any("negative" in p for p in validate_profile(game, bad))


def test_cutoff_with_tabulated_uniform_law():
    law = TabulatedCdf([0, 1], [0, 1])
    problem = EliteProblem(n=2, q=1, v=1.0, levels=(2,), level_probs=(1,), score_law=law)
    cuts = elite_cutoffs(problem)
    assert abs(cuts[2] - 0.5) <= 1e-9
