"""Randomized response over discretized feature values.

Every normalized feature value is snapped to one of ``k`` bins and then
re-drawn from a distance-decaying distribution over the bin centers: bin ``u``
is reported instead of the true bin ``t`` with probability proportional to
``exp(-|u - t| / (k * sigma))``.  With ``sigma = (k-1)/(k*eps)`` the report is
eps-LDP for that feature, and the worst-case likelihood ratio is attained at
the extreme bins.
"""

from __future__ import annotations

from dataclasses import dataclass

import math

import numpy as np

from .graph import FeatureMatrix, RngStream
from .scoring import BudgetAllocation


def discretize(value: float, k: int) -> int:
    """Map a value in [0, 1] to its bin index ``t`` in ``1..k``.

    Bin ``t`` covers ``((t-1)/k, t/k]``; the value 0 belongs to bin 1.
    """
    if not (isinstance(k, (int, np.integer)) and k >= 2):
        raise ValueError(f"bin count k must be an integer >= 2, got {k}")
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"value {value} outside [0, 1]; normalize features first")
    return min(max(math.ceil(value * k), 1), int(k))


@dataclass(frozen=True)
class RRDistribution:
    """Response distribution over the k bins given true bin ``t``.

    ``probs[u-1]`` is the probability of reporting bin ``u``; ``c_t`` is the
    normalizer (the sum of the unnormalized exponential weights).
    """

    k: int
    t: int
    sigma: float
    probs: np.ndarray
    c_t: float

    def __post_init__(self) -> None:
        p = np.asarray(self.probs, dtype=np.float64)
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def sample(self, uniform: float) -> int:
        """Inverse-CDF draw: map one uniform in [0, 1) to a reported bin."""
        cdf = np.cumsum(self.probs)
        return int(min(np.searchsorted(cdf, uniform, side="right"), self.k - 1)) + 1


def rr_distribution(t: int, k: int, sigma: float) -> RRDistribution:
    """Build the response distribution for true bin ``t``.

    Weights are computed in log space and max-shifted before exponentiation,
    so tiny ``sigma`` degrades to a point mass instead of overflowing.
    """
    if not (isinstance(k, (int, np.integer)) and k >= 2):
        raise ValueError(f"bin count k must be an integer >= 2, got {k}")
    if not 1 <= t <= k:
        raise ValueError(f"true bin {t} outside 1..{k}")
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    u = np.arange(1, k + 1, dtype=np.float64)
    logw = -np.abs(u - t) / (k * sigma)
    shift = logw.max()
    w = np.exp(logw - shift)
    total = w.sum()
    return RRDistribution(
        k=int(k), t=int(t), sigma=float(sigma), probs=w / total, c_t=float(np.exp(shift) * total)
    )


def randomize_features(
    features: FeatureMatrix, budgets: BudgetAllocation, stream: RngStream
) -> FeatureMatrix:
    """Apply per-feature randomized response to every cell of the matrix.

    Input values must already be normalized to [0, 1].  Each cell ``(v, i)``
    draws from its own child stream ``stream.child(v, i)``, so results are
    reproducible and independent of traversal order.  Reported values are the
    bin upper edges ``u / k``.
    """
    values = features.values
    if values.shape[1] != budgets.eps.size:
        raise ValueError(
            f"feature count {values.shape[1]} does not match budget count {budgets.eps.size}"
        )
    k = budgets.k
    # Distributions depend only on (feature, true bin); cache the CDFs.
    cdf_cache: dict[tuple[int, int], np.ndarray] = {}
    out = np.empty_like(values)
    for i in range(values.shape[1]):
        sigma_i = float(budgets.sigma[i])
        for v in range(values.shape[0]):
            t = discretize(float(values[v, i]), k)
            cdf = cdf_cache.get((i, t))
            if cdf is None:
                cdf = np.cumsum(rr_distribution(t, k, sigma_i).probs)
                cdf_cache[(i, t)] = cdf
            draw = stream.child(v, i).generator().random()
            u = int(min(np.searchsorted(cdf, draw, side="right"), k - 1)) + 1
            out[v, i] = u / k
    return FeatureMatrix(out)


def ldp_max_ratio_detail(k: int, sigma: float) -> tuple[float, tuple[int, int, int]]:
    """Worst-case likelihood ratio and its witness, by exhaustive enumeration.

    Returns ``(max ratio, (u, t, t'))`` maximizing
    ``P(report u | true t) / P(report u | true t')`` over all k^3 triples.
    Ratios with a zero numerator and denominator (possible only when tiny
    sigma underflows to a point mass) are ignored; a zero denominator alone
    is a genuine unbounded ratio and reported as inf.
    """
    dists = np.vstack([rr_distribution(t, k, sigma).probs for t in range(1, k + 1)])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = dists[:, None, :] / dists[None, :, :]  # [t, t', u]
    ratios[np.isnan(ratios)] = -np.inf
    flat = int(np.argmax(ratios))
    t_idx, tp_idx, u_idx = np.unravel_index(flat, ratios.shape)
    return float(ratios[t_idx, tp_idx, u_idx]), (int(u_idx) + 1, int(t_idx) + 1, int(tp_idx) + 1)


def ldp_max_ratio(k: int, sigma: float) -> float:
    """Worst-case likelihood ratio of the k-bin mechanism at noise scale sigma."""
    return ldp_max_ratio_detail(k, sigma)[0]
