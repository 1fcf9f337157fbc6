"""replab: desk-scale probability lab for random graph k-colorings.

Exact brute-force oracles (enumeration, counting, uniform sampling) back
every stochastic component: replica models, Galton-Watson broadcast trees,
overlap statistics, local-neighborhood laws, and the analytic moment
functions.
"""

__version__ = "0.1.0"

from .codes import LocalCode, encode_rooted
from .colorings import (
    ColorProfile,
    GibbsAverage,
    UniformColoringSampler,
    count_by_profile,
    count_colorings,
    count_pairs_by_overlap,
    enumerate_colorings,
    forbidden_count,
    forbidden_count_pair,
    gibbs_average,
    is_k_colorable,
    is_proper,
    prob_proper_exact,
    sample_uniform_coloring,
)
from .errors import (
    CapacityError,
    DomainError,
    ParameterError,
    ReplabError,
    RetryExhaustedError,
)
from .experiments import ExperimentConfig, list_experiments, run
from .graphs import (
    Graph,
    RootedBall,
    ball,
    connected_components,
    cycle_census,
    graph_from_json,
    graph_to_json,
    pairwise_ball_disjoint,
    sample_gnm,
    sample_gnp,
)
from .local import (
    LocalDistribution,
    TvResult,
    canonical_code,
    dicolored_ball_classes,
    empirical_local_distribution,
    local_distribution_to_json,
    product_statistic,
    q_statistic,
    reconstruction_corr_fixed_tree,
    reconstruction_corr_graph,
    reconstruction_corr_tree,
    replica_local_covariance,
    tv_local_vs_uniform,
)
from .moments import (
    d_cond_asymptotic,
    entropy,
    f_gradient_check,
    f_overlap,
    first_moment_estimate,
    phi,
    separation_scan,
)
from .overlaps import (
    OverlapMatrix,
    StabilityClass,
    classify_stability,
    cluster_size,
    overlap,
    overlap_concentration_experiment,
    overlap_distance,
    profile_concentration_experiment,
)
from .replicas import (
    DicoloredGraph,
    ExplorationResult,
    dicolored_to_json,
    explore_coupling,
    lemma_p_binomial,
    planted_density,
    sample_binomial_planted,
    sample_planted_replica,
    sample_random_replica,
)
from .reports import ExperimentReport, StatRow
from .trees import (
    RootedColoredTree,
    broadcast_coloring,
    broadcast_colors,
    gw_shape_probability,
    q_target,
    sample_gw_tree,
    tree_ball_distribution,
)
