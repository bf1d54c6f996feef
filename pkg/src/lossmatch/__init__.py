"""School-choice matching under expectation-based loss aversion."""

from .attainability import (
    AttainabilityDistribution,
    Lottery,
    attainability_from_joint,
    exact_attainability,
    has_full_support,
    induced_lottery,
    is_exclusive,
    mc_attainability,
    truthful_strategy,
)
from .cpe import (
    TrmClassification,
    TruthVerdict,
    class_has_trm_member,
    cpe_utility,
    cpe_value,
    drop_consistency_check,
    is_top_rank_monotone,
    is_trm_interval,
    optimal_rol_trm,
    optimal_rols,
    swap_gain,
    swap_predicate,
    trm_enumerate,
    truthful_bound_check,
    utility_wrt_reference,
)
from .equilibrium import (
    CbneCertificate,
    EliteProblem,
    FiniteGame,
    SeqCpeVerdict,
    cbne_fixed_point,
    elite_apply_decision,
    elite_cutoffs,
    elite_grid_game,
    finite_joint_game,
    order_stat_prob,
    sequential_cpe_osp_example,
    validate_profile,
    verify_cbne,
    verify_elite_profile,
)
from .mechanisms import (
    boston_immediate_acceptance,
    da_student_proposing,
    is_student_optimal_stable,
    justified_envy_pairs,
    serial_dictatorship,
    strategy_proofness_check,
    ttc,
)
from .model import (
    Instance,
    Rol,
    StudentType,
    canonical_rols,
    canonicalize_rol,
    relabel_by_preference,
    truthful_rol,
    validate_instance,
)

__version__ = "0.1.0"
