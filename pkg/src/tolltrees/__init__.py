"""Random increasing trees, additive functionals and their limit constants."""

from .constants import (
    TheoremConstants,
    exact_mean,
    fringe_constants,
    gport_constants,
    mu_enumeration,
    mu_size_series,
    phi,
    phi_inner_product,
    sigma2_enumeration,
    size_only_profile,
    varphi,
    varphi_inner_product,
)
from .montecarlo import (
    NormalityReport,
    SampleStats,
    estimate_toll_decay,
    expected_toll_profile_mc,
    normality_report,
    simulate,
)
from .oracle import (
    ExactDistribution,
    ExpectedTollProfile,
    exact_distribution,
    exact_moments,
    exact_toll_profile,
    verify_mean_formula,
    verify_model_probability,
    verify_uniformity,
)
from .tolls import (
    TollSpec,
    branch_symmetry,
    builtin_toll,
    custom_toll,
    evaluate_additive,
    log_subtree_toll,
    orbit_count,
    orbit_toll,
    parse_toll,
    relabel_invariance_audit,
    subtree_count_root,
)
from .trees import (
    LABELED,
    SHAPE,
    DAryIncreasingTree,
    ModelParams,
    PlaneIncreasingTree,
    canonical_form,
    count_dary,
    enumerate_dary,
    enumerate_plane,
    enumerate_recursive,
    fringe_subtrees,
    gport_total_weight,
    grow_dary,
    grow_gport,
    grow_recursive,
    parse_tree,
    tree_probability,
    weight_port,
)

__version__ = "0.1.0"
