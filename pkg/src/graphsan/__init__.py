"""Differentially private sanitization of attributed graphs.

The package releases a permanently sanitized copy of a graph whose edges and
node features are partly private: features pass through budget-weighted
randomized response over discretized bins, private edges are regrown from a
hierarchical random-graph model fitted with an exponential-mechanism MCMC and
released through noisy connection probabilities.  An audit module verifies
the privacy bounds and measures what an edge-inference attacker can recover.
"""

from .graph import FeatureMatrix, PrivacyGraph, RngStream, normalize_features, validate_graph
from .scoring import (
    BudgetAllocation,
    ScoreSet,
    allocate_budgets,
    build_scores,
    floor_scores,
    importance_scores,
    sensitivity_scores,
    unify_scores,
)
from .feature_rr import discretize, ldp_max_ratio, randomize_features, rr_distribution
from .hrg import (
    Dendrogram,
    chi,
    compute_stats,
    enumerate_dendrograms,
    from_nested,
    log_likelihood,
    num_dendrograms,
    random_dendrogram,
    to_newick,
)
from .mcmc import McmcConfig, McmcResult, delta_e, effective_delta_e, run_mcmc
from .noisy_prob import NoisyProbConfig, calculate_noisy_prob, laplace_inverse_cdf
from .sampler import SanitizedGraph, merge, sample_private_graph
from .pipeline import PipelineConfig, PipelineResult, PipelineStageError, release_edges, \
    release_features, run_pipeline

__version__ = "0.1.0"

__all__ = [
    "BudgetAllocation",
    "Dendrogram",
    "FeatureMatrix",
    "McmcConfig",
    "McmcResult",
    "NoisyProbConfig",
    "PipelineConfig",
    "PipelineResult",
    "PipelineStageError",
    "PrivacyGraph",
    "RngStream",
    "SanitizedGraph",
    "ScoreSet",
    "allocate_budgets",
    "build_scores",
    "calculate_noisy_prob",
    "chi",
    "compute_stats",
    "delta_e",
    "discretize",
    "effective_delta_e",
    "enumerate_dendrograms",
    "floor_scores",
    "from_nested",
    "importance_scores",
    "laplace_inverse_cdf",
    "ldp_max_ratio",
    "log_likelihood",
    "merge",
    "normalize_features",
    "num_dendrograms",
    "random_dendrogram",
    "randomize_features",
    "release_edges",
    "release_features",
    "rr_distribution",
    "run_mcmc",
    "run_pipeline",
    "sample_private_graph",
    "sensitivity_scores",
    "to_newick",
    "unify_scores",
    "validate_graph",
    "__version__",
]
