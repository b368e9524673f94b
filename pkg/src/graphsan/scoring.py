"""Per-feature privacy scoring and budget allocation.

Each feature gets a sensitivity score (how much masking it moves a reference
embedding), an importance score (normalized attribution magnitude), and a
unified score blending the two.  The unified scores split the feature-level
privacy budget; sensitive-but-unimportant features receive less budget and
therefore more randomization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Features whose unified score would vanish get at least this mass (divided
#: by the dimension) before budgets are cut, so no budget is ever zero.
THETA_FLOOR = 1e-6


def sensitivity_scores(z: np.ndarray, z_masked: np.ndarray) -> np.ndarray:
    """Per-feature sensitivity: |z_i - z_masked_i| normalized to sum 1.

    ``z`` is a reference embedding and ``z_masked`` the embedding with the
    sensitive inputs masked out; features whose masking moves the embedding
    more are considered more sensitive.  Rejects identical vectors (the
    scores would be 0/0).
    """
    z = np.asarray(z, dtype=np.float64)
    z_masked = np.asarray(z_masked, dtype=np.float64)
    if z.shape != z_masked.shape or z.ndim != 1:
        raise ValueError("z and z_masked must be 1-D vectors of equal length")
    diff = np.abs(z - z_masked)
    total = diff.sum()
    if total == 0:
        raise ValueError("z and z_masked are identical; sensitivity undefined")
    return diff / total


def importance_scores(attributions: np.ndarray) -> np.ndarray:
    """Per-feature importance: |attribution| normalized to sum 1.

    Sign is irrelevant; only magnitude counts.  Rejects an all-zero vector.
    """
    a = np.abs(np.asarray(attributions, dtype=np.float64))
    if a.ndim != 1:
        raise ValueError("attributions must be a 1-D vector")
    total = a.sum()
    if total == 0:
        raise ValueError("all attributions are zero; importance undefined")
    return a / total


def unify_scores(alpha: np.ndarray, beta: np.ndarray, gamma: float) -> np.ndarray:
    """Blend importance and sensitivity into a single score vector summing to 1.

    The raw blend is ``gamma * alpha + (1 - gamma) * (beta_min + beta_max - beta)``:
    the sensitivity term is reflected so that MORE sensitive features score
    LOWER (they should end up with less budget, hence noisier output).  The
    blend is then renormalized.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    beta = np.asarray(beta, dtype=np.float64)
    if alpha.shape != beta.shape or alpha.ndim != 1:
        raise ValueError("alpha and beta must be 1-D vectors of equal length")
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must be in [0, 1], got {gamma}")
    raw = gamma * alpha + (1.0 - gamma) * (beta.min() + (beta.max() - beta))
    total = raw.sum()
    if total <= 0:
        raise ValueError("unified scores sum to zero; check inputs")
    return raw / total


def floor_scores(theta: np.ndarray, floor: float | None = None) -> np.ndarray:
    """Clamp scores below the floor (default ``THETA_FLOOR / d``) and renormalize.

    Applied before budget allocation so that a zero score never demands an
    infinite noise scale.
    """
    theta = np.asarray(theta, dtype=np.float64)
    if floor is None:
        floor = THETA_FLOOR / theta.size
    floored = np.maximum(theta, floor)
    return floored / floored.sum()


@dataclass(frozen=True)
class ScoreSet:
    """Importance, sensitivity and unified scores for one feature set."""

    alpha: np.ndarray
    beta: np.ndarray
    theta: np.ndarray
    gamma: float

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "theta"):
            v = np.asarray(getattr(self, name), dtype=np.float64)
            v.setflags(write=False)
            object.__setattr__(self, name, v)
        if abs(float(self.theta.sum()) - 1.0) > 1e-9:
            raise ValueError("theta must sum to 1")


def build_scores(
    z: np.ndarray, z_masked: np.ndarray, attributions: np.ndarray, gamma: float
) -> ScoreSet:
    """Convenience composition: sensitivity + importance + unification."""
    beta = sensitivity_scores(z, z_masked)
    alpha = importance_scores(attributions)
    theta = unify_scores(alpha, beta, gamma)
    return ScoreSet(alpha=alpha, beta=beta, theta=theta, gamma=gamma)


@dataclass(frozen=True)
class BudgetAllocation:
    """Per-feature budgets ``eps_i`` and randomized-response scales ``sigma_i``."""

    eps_f: float
    k: int
    eps: np.ndarray
    sigma: np.ndarray

    def __post_init__(self) -> None:
        for name in ("eps", "sigma"):
            v = np.asarray(getattr(self, name), dtype=np.float64)
            v.setflags(write=False)
            object.__setattr__(self, name, v)


def allocate_budgets(theta: np.ndarray, eps_f: float, k: int) -> BudgetAllocation:
    """Split the feature budget proportionally to the unified scores.

    ``eps_i = eps_f * theta_i`` and ``sigma_i = (k - 1) / (k * eps_i)``, the
    smallest noise scale for which the k-bin randomized response below is
    eps_i-LDP.  Scores must be strictly positive (apply :func:`floor_scores`
    first); budgets sum exactly to ``eps_f`` up to float rounding.
    """
    theta = np.asarray(theta, dtype=np.float64)
    if theta.ndim != 1 or theta.size == 0:
        raise ValueError("theta must be a non-empty 1-D vector")
    if (theta <= 0).any():
        bad = int(np.flatnonzero(theta <= 0)[0])
        raise ValueError(f"theta[{bad}] <= 0; floor the scores before allocating")
    if abs(float(theta.sum()) - 1.0) > 1e-9:
        raise ValueError("theta must sum to 1")
    if not eps_f > 0:
        raise ValueError(f"eps_f must be positive, got {eps_f}")
    if not (isinstance(k, (int, np.integer)) and k >= 2):
        raise ValueError(f"bin count k must be an integer >= 2, got {k}")
    eps = eps_f * theta
    sigma = (k - 1) / (k * eps)
    return BudgetAllocation(eps_f=float(eps_f), k=int(k), eps=eps, sigma=sigma)
