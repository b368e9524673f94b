"""End-to-end sanitization: scoring -> feature RR -> edge release -> merge.

Every source of randomness is derived from one root seed through fixed
stream-split indices (features 0, MCMC 1, probability release 2, pair
sampling 3), so a full run is reproducible byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TextIO

import numpy as np

from .graph import FeatureMatrix, PrivacyGraph, RngStream, normalize_features, validate_graph
from .feature_rr import randomize_features
from .mcmc import McmcConfig, McmcResult, run_mcmc
from .noisy_prob import STREAM_NOISY, NoisyProbConfig, calculate_noisy_prob
from .sampler import STREAM_SAMPLER, SanitizedGraph, merge, sample_private_graph
from .scoring import (
    BudgetAllocation,
    ScoreSet,
    allocate_budgets,
    build_scores,
    floor_scores,
)

#: RngStream split index reserved for feature randomization.
STREAM_FEATURES = 0

TOOL_VERSION = "graphsan 0.1.0"


class PipelineStageError(RuntimeError):
    """A pipeline stage failed; carries the stage name for exit-code mapping."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class PipelineConfig:
    """All pipeline knobs; mirrors the CLI flags one to one."""

    eps_f: float = 1.0
    eps_e1: float = 0.5
    eps_e2: float = 0.5
    k: int = 10
    gamma: float = 0.5
    seed: int = 0
    chains: int = 1
    mcmc_steps: int = 10_000
    tau1: float = 1.0
    tau_e: float = 1.0
    sanitize_features: bool = True
    sanitize_edges: bool = True

    def __post_init__(self) -> None:
        if self.chains < 1:
            raise ValueError("need at least one chain")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must be in [0, 1], got {self.gamma}")


def release_features(
    raw_features: FeatureMatrix | np.ndarray,
    z: np.ndarray,
    z_masked: np.ndarray,
    attributions: np.ndarray,
    *,
    eps_f: float,
    k: int,
    gamma: float,
    seed: int,
) -> tuple[FeatureMatrix, ScoreSet, BudgetAllocation]:
    """Feature half of the pipeline: normalize, score, allocate, randomize."""
    normalized = normalize_features(raw_features)
    scores = build_scores(z, z_masked, attributions, gamma)
    budgets = allocate_budgets(floor_scores(scores.theta), eps_f, k)
    stream = RngStream(seed).child(STREAM_FEATURES)
    return randomize_features(normalized, budgets, stream), scores, budgets


def release_edges(
    g: PrivacyGraph,
    *,
    eps_e1: float,
    eps_e2: float,
    seed: int,
    chains: int = 1,
    max_steps: int = 10_000,
    pub_substeps: int = 1,
    pri_substeps: int = 1,
    convergence_window: int = 2_000,
    tau1: float = 1.0,
    tau_e: float = 1.0,
    trace: TextIO | None = None,
) -> tuple[SanitizedGraph, McmcResult | None]:
    """Edge half of the pipeline: fit dendrogram, noise probabilities, resample.

    Runs ``chains`` independent chains and releases from the one with the best
    final combined score (the trace, if given, records chain 0).  A graph with
    no private edges shortcuts to a public-only release.
    """
    meta = {
        "eps_e1": eps_e1,
        "eps_e2": eps_e2,
        "eps_e_total": eps_e1 + eps_e2,
        "seed": seed,
    }
    if not g.pri_edges:
        meta.update({"private_edges_sampled": 0, "mcmc": None})
        return merge(g, frozenset(), meta), None

    config = McmcConfig(
        eps_e1=eps_e1,
        seed=seed,
        max_steps=max_steps,
        pub_substeps=pub_substeps,
        pri_substeps=pri_substeps,
        convergence_window=convergence_window,
    )
    best: McmcResult | None = None
    best_score = -np.inf
    for chain in range(chains):
        result = run_mcmc(g, config, chain_index=chain, trace=trace if chain == 0 else None)
        score = result.lpub + (eps_e1 / result.delta_e) * result.lpri
        if score > best_score:
            best, best_score = result, score
    assert best is not None
    d = best.dendrogram
    calculate_noisy_prob(
        d,
        g,
        NoisyProbConfig(eps_e2=eps_e2, tau1=tau1, tau_e=tau_e),
        rng=RngStream(seed).child(STREAM_NOISY).generator(),
    )
    sampled = sample_private_graph(d, g.pri_nodes, RngStream(seed).child(STREAM_SAMPLER))
    meta.update(
        {
            "private_edges_sampled": len(sampled),
            "mcmc": {
                "chains": chains,
                "steps_run": best.steps_run,
                "converged": best.converged,
                "delta_e": best.delta_e,
                "lpub": best.lpub,
                "lpri": best.lpri,
            },
        }
    )
    return merge(g, sampled, meta), best


@dataclass(frozen=True)
class PipelineResult:
    graph: SanitizedGraph
    features: FeatureMatrix | None
    scores: ScoreSet | None
    budgets: BudgetAllocation | None
    mcmc: McmcResult | None
    metadata: dict


def run_pipeline(
    config: PipelineConfig,
    graph: PrivacyGraph,
    features: FeatureMatrix | None = None,
    score_rows: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None,
    trace: TextIO | None = None,
) -> PipelineResult:
    """Run the configured stages over validated inputs.

    ``score_rows`` is the (z, z_masked, attributions) triple backing the
    feature scoring.  Raises ValueError for input/validation problems and
    PipelineStageError when a stage fails on valid-looking inputs.
    """
    problems = validate_graph(graph)
    if problems:
        raise ValueError("invalid graph: " + "; ".join(problems))
    if config.sanitize_features:
        if features is None or score_rows is None:
            raise ValueError("feature sanitization needs a feature matrix and a scores file")
        if features.n_nodes != graph.n:
            raise ValueError(
                f"feature matrix has {features.n_nodes} rows but graph has {graph.n} nodes"
            )
        if any(r.size != features.n_features for r in score_rows):
            raise ValueError("score rows must match the feature dimension")

    metadata: dict = {
        "tool_version": TOOL_VERSION,
        "seed": config.seed,
        "modes": {
            "features": config.sanitize_features,
            "edges": config.sanitize_edges,
        },
        "graph": {
            "n": graph.n,
            "pub_edges": len(graph.pub_edges),
            "pri_edges": len(graph.pri_edges),
        },
    }

    # Edges-only mode passes any supplied features through untouched.
    features_out: FeatureMatrix | None = None if config.sanitize_features else features
    scores: ScoreSet | None = None
    budgets: BudgetAllocation | None = None
    if config.sanitize_features:
        try:
            z, z_masked, attributions = score_rows
            features_out, scores, budgets = release_features(
                features,
                z,
                z_masked,
                attributions,
                eps_f=config.eps_f,
                k=config.k,
                gamma=config.gamma,
                seed=config.seed,
            )
        except Exception as exc:  # scoring/randomization failure on valid inputs
            raise PipelineStageError("features", exc) from exc
        metadata["features"] = {
            "eps_f": config.eps_f,
            "k": config.k,
            "gamma": config.gamma,
            "eps_per_feature": [float(x) for x in budgets.eps],
            "sigma_per_feature": [float(x) for x in budgets.sigma],
        }

    mcmc_result: McmcResult | None = None
    if config.sanitize_edges:
        try:
            sanitized, mcmc_result = release_edges(
                graph,
                eps_e1=config.eps_e1,
                eps_e2=config.eps_e2,
                seed=config.seed,
                chains=config.chains,
                max_steps=config.mcmc_steps,
                tau1=config.tau1,
                tau_e=config.tau_e,
                trace=trace,
            )
        except PipelineStageError:
            raise
        except Exception as exc:
            raise PipelineStageError("edges", exc) from exc
        metadata["edges"] = sanitized.metadata
    else:
        sanitized = SanitizedGraph(graph=graph, metadata={"untouched": True})
        metadata["edges"] = {"untouched": True}

    return PipelineResult(
        graph=sanitized,
        features=features_out,
        scores=scores,
        budgets=budgets,
        mcmc=mcmc_result,
        metadata=metadata,
    )
