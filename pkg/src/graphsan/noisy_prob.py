"""Laplace-noised connection probabilities over a fitted dendrogram.

Walks the dendrogram top-down assigning each internal node a DP estimate
``ptilde`` of its private connection probability.  When a subtree is so small
that per-node noise would drown the signal (both noise-to-mass ratios exceed
their thresholds), the walk collapses it: one noised count of the subtree's
induced private edges yields a single probability shared by every internal
node below.  Laplace draws use scale ``1/eps_e2`` throughout, and perturbed
counts are floored at zero before division; probabilities are capped at 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .graph import PrivacyGraph, RngStream
from .hrg import Dendrogram

#: RngStream split index reserved for the probability-release phase.
STREAM_NOISY = 2

NoiseSource = Callable[[float], float]


def laplace_inverse_cdf(u: float, scale: float) -> float:
    """Quantile function of the zero-mean Laplace distribution.

    ``F(x) = 1 - exp(-x/scale)/2`` for ``x >= 0``, mirrored below zero;
    ``u = 1/2`` maps to 0.
    """
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale}")
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"uniform draw {u} outside [0, 1]")
    if u < 0.5:
        return scale * math.log(2.0 * u) if u > 0.0 else -math.inf
    return -scale * math.log(2.0 * (1.0 - u)) if u < 1.0 else math.inf


def sample_laplace(scale: float, rng: np.random.Generator) -> float:
    """One zero-mean Laplace draw via inverse-CDF on a single uniform."""
    return laplace_inverse_cdf(float(rng.random()), scale)


def zero_noise(scale: float) -> float:
    """Noise hook that always returns 0; turns the release into the ML values."""
    return 0.0


def scripted_noise(values: Iterable[float]) -> NoiseSource:
    """Noise hook replaying a fixed sequence (for hand-traced tests)."""
    it = iter(values)

    def draw(scale: float) -> float:
        return float(next(it))

    return draw


@dataclass(frozen=True)
class NoisyProbConfig:
    """Budget and collapse thresholds for the probability release.

    Collapse at node ``r`` triggers when BOTH ``1/(eps_e2 * Lbar*Rbar) >= tau1``
    and ``1/(eps_e2 * s*(s-1)) >= tau_e`` hold, with ``s`` the private leaves
    under ``r``.  The defaults (1.0) collapse only subtrees whose expected
    noise exceeds the available probability mass.
    """

    eps_e2: float
    tau1: float = 1.0
    tau_e: float = 1.0

    def __post_init__(self) -> None:
        if not self.eps_e2 > 0:
            raise ValueError(f"eps_e2 must be positive, got {self.eps_e2}")


def _internal_subtree(d: Dendrogram, node: int) -> list[int]:
    out = []
    stack = [node]
    while stack:
        x = stack.pop()
        if x >= d.n:
            out.append(x)
            stack.extend(d.children(x))
    return out


def calculate_noisy_prob(
    d: Dendrogram,
    g: PrivacyGraph,
    config: NoisyProbConfig,
    rng: np.random.Generator | None = None,
    noise: NoiseSource | None = None,
    start: int | None = None,
) -> Dendrogram:
    """Fill ``d.stats.ptilde`` for the recursion region rooted at ``start``.

    Requires current stats.  Nodes with no private leaves on one side get
    ``ptilde = 0`` without spending a draw, and sides with no private leaves
    are not entered (their nodes keep NaN; no private pair resolves there).
    Visit order is pre-order (node, then left, then right), which fixes the
    draw sequence for reproducibility.  ``noise`` overrides the Laplace
    source (test hook); otherwise ``rng`` supplies the uniforms.
    """
    if d.stats is None:
        raise ValueError("stats not computed; call compute_stats first")
    if noise is None:
        if rng is None:
            raise ValueError("need an rng or an explicit noise source")
        noise = lambda scale: sample_laplace(scale, rng)
    s = d.stats
    n = d.n
    eps = config.eps_e2
    scale = 1.0 / eps
    pri_adj = g.adjacency("pri")
    root = d.root if start is None else start
    if root < n:
        raise ValueError(f"start node {root} is a leaf")

    stack = [root]
    while stack:
        node = stack.pop()
        i = node - n
        lbar, rbar = s.Lbar[i], s.Rbar[i]
        if lbar * rbar == 0:
            s.ptilde[i] = 0.0
            for kid in reversed(d.children(node)):
                if kid >= n and s.npri_below[kid] > 0:
                    stack.append(kid)
            continue
        size = lbar + rbar
        lam_b = 1.0 / (eps * lbar * rbar)
        lam_c = 1.0 / (eps * size * (size - 1))
        if lam_b >= config.tau1 and lam_c >= config.tau_e:
            # Collapse: one draw on the induced private edge count serves the
            # whole subtree.
            members = set(d.subtree_leaves(node))
            induced = 0
            for x in members:
                for y in pri_adj[x]:
                    if y > x and y in members:
                        induced += 1
            denom = size * (size - 1) / 2.0
            p = min(1.0, max(0.0, induced + noise(scale)) / denom)
            for x in _internal_subtree(d, node):
                s.ptilde[x - n] = p
            continue
        noisy = max(0.0, s.ebar[i] + noise(scale))
        s.ptilde[i] = min(1.0, noisy / (lbar * rbar))
        l, r = d.children(node)
        # Pre-order with left before right: push right first.
        if r >= n:
            stack.append(r)
        if l >= n:
            stack.append(l)
    return d
