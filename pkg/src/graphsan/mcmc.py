"""Two-phase dendrogram MCMC over the class-split likelihoods.

Each outer step first takes public substeps (plain Metropolis on the public
log-likelihood; public edges are visible, so these moves are budget-free) and
then private substeps, whose acceptance exponent is scaled by
``eps_e1 / delta_e`` as in the exponential mechanism.  ``delta_e`` bounds how
much one private edge can move the private log-likelihood.

Proposals are the standard local rotations: with a uniformly chosen non-root
internal node ``r`` (subtrees ``a, b``) and its sibling subtree ``c``, the
configuration ``((a,b),c)`` moves to ``((a,c),b)`` or ``((c,b),a)``.  Only
``r`` and its parent change their split, so likelihood deltas and stats
updates stay local to the two nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from .graph import PrivacyGraph, RngStream
from .hrg import Dendrogram, chi, compute_stats, from_nested, log_likelihood, random_dendrogram

#: RngStream split index reserved for the MCMC phase.
STREAM_MCMC = 1


def delta_e(n_private: int) -> float:
    """Sensitivity of the private log-likelihood to one private edge.

    ``log(N_max) + log(1 + 1/(N_max - 1))`` with ``N_max`` the largest
    balanced-split pair count ``floor(n_private^2 / 4)``.  Undefined below 3
    private nodes (the formula needs ``N_max >= 2``).
    """
    if n_private < 3:
        raise ValueError(f"delta_e formula needs at least 3 private nodes, got {n_private}")
    n_max = n_private * n_private // 4
    return math.log(n_max) + math.log(1.0 + 1.0 / (n_max - 1))


def effective_delta_e(n_private: int) -> float:
    """delta_e with the 2-node special case pinned to ln 2.

    At exactly two private nodes the formula is singular (``N_max = 1``) but
    the likelihood difference of one toggled edge is exactly ln 2.
    """
    if n_private == 2:
        return math.log(2.0)
    return delta_e(n_private)


def acceptance_probability(delta: float) -> float:
    """Metropolis rule ``min(1, exp(delta))`` on a log-likelihood delta."""
    return min(1.0, math.exp(min(delta, 0.0)))


@dataclass(frozen=True)
class StepInfo:
    """Outcome of one proposal: also carries both deltas for trace/likelihood."""

    accepted: bool
    delta_pub: float
    delta_pri: float
    node: int
    alt: int


def _term(N: int, e: int) -> float:
    return N * chi(e / N) if N else 0.0


class _Stepper:
    """Proposal engine owning the scratch buffers for one (dendrogram, graph) pair."""

    def __init__(self, d: Dendrogram, g: PrivacyGraph):
        if d.stats is None:
            compute_stats(d, g)
        self.d = d
        self.adj_pub = g.adjacency("pub")
        self.adj_pri = g.adjacency("pri")
        self.loc = [3] * d.n  # 0/1/2 = subtree a/b/c, 3 = outside the region

    def step(self, rng: np.random.Generator, kind: str, scale: float) -> StepInfo:
        d = self.d
        s = d.stats
        n = d.n
        # Uniform non-root internal node, one of its two rotations, one uniform.
        r = n + int(rng.integers(n - 2))
        if r >= d.root:
            r += 1
        alt = int(rng.integers(2))
        u = float(rng.random())

        p = d.parent[r]
        a, b = d.children(r)
        pl, pr = d.children(p)
        c = pr if pl == r else pl

        leaves = (d.subtree_leaves(a), d.subtree_leaves(b), d.subtree_leaves(c))
        loc = self.loc
        for grp, ls in enumerate(leaves):
            for x in ls:
                loc[x] = grp
        cross_pub = [0, 0, 0]  # ab, ac, bc
        cross_pri = [0, 0, 0]
        for ls in leaves:
            for x in ls:
                gx = loc[x]
                for y in self.adj_pub[x]:
                    gy = loc[y]
                    if y > x and gy != 3 and gy != gx:
                        cross_pub[gx + gy - 1] += 1
                for y in self.adj_pri[x]:
                    gy = loc[y]
                    if y > x and gy != 3 and gy != gx:
                        cross_pri[gx + gy - 1] += 1
        for ls in leaves:
            for x in ls:
                loc[x] = 3

        npub, npri = s.npub_below, s.npri_below
        na, nb, nc = npub[a], npub[b], npub[c]
        ma, mb, mc = npri[a], npri[b], npri[c]
        ab, ac, bc = cross_pub
        ab_, ac_, bc_ = cross_pri

        cur_pub = _term(na * nb, ab) + _term((na + nb) * nc, ac + bc)
        cur_pri = _term(ma * mb, ab_) + _term((ma + mb) * mc, ac_ + bc_)
        if alt == 0:  # ((a,c),b)
            new_pub = _term(na * nc, ac) + _term((na + nc) * nb, ab + bc)
            new_pri = _term(ma * mc, ac_) + _term((ma + mc) * mb, ab_ + bc_)
            r_kids, other, er, er_ = (a, c), b, ac, ac_
        else:  # ((c,b),a)
            new_pub = _term(nc * nb, bc) + _term((nc + nb) * na, ab + ac)
            new_pri = _term(mc * mb, bc_) + _term((mc + mb) * ma, ab_ + ac_)
            r_kids, other, er, er_ = (c, b), a, bc, bc_

        delta_pub = new_pub - cur_pub
        delta_pri = new_pri - cur_pri
        delta = delta_pub if kind == "pub" else scale * delta_pri
        accepted = delta >= 0.0 or u == 0.0 or math.log(u) <= delta
        if not accepted:
            return StepInfo(False, delta_pub, delta_pri, r, alt)

        # Rewire r and p, then refresh the two nodes' stats from their children.
        i, j = r - n, p - n
        d.left[i], d.right[i] = r_kids
        d.parent[r_kids[0]] = d.parent[r_kids[1]] = r
        if pl == r:
            d.left[j], d.right[j] = r, other
        else:
            d.left[j], d.right[j] = other, r
        d.parent[other] = p
        s.e[i], s.ebar[i] = er, er_
        s.e[j], s.ebar[j] = (ab + ac + bc) - er, (ab_ + ac_ + bc_) - er_
        for node in (r, p):
            idx = node - n
            l, rr = d.children(node)
            npub[node] = npub[l] + npub[rr]
            npri[node] = npri[l] + npri[rr]
            s.L[idx], s.R[idx] = npub[l], npub[rr]
            s.Lbar[idx], s.Rbar[idx] = npri[l], npri[rr]
        return StepInfo(True, delta_pub, delta_pri, r, alt)


def public_step(d: Dendrogram, g: PrivacyGraph, rng: np.random.Generator) -> StepInfo:
    """One public Metropolis step, mutating ``d`` (stats kept current).

    Acceptance probability is ``min(1, exp(delta_pub))``.
    """
    return _Stepper(d, g).step(rng, "pub", 1.0)


def private_step(
    d: Dendrogram,
    g: PrivacyGraph,
    eps_e1: float,
    rng: np.random.Generator,
    delta: float | None = None,
) -> StepInfo:
    """One private exponential-mechanism step, mutating ``d``.

    Acceptance probability is ``min(1, exp((eps_e1 / delta_e) * delta_pri))``;
    ``delta`` overrides the sensitivity when precomputed.
    """
    if not eps_e1 > 0:
        raise ValueError(f"eps_e1 must be positive, got {eps_e1}")
    if delta is None:
        delta = effective_delta_e(len(g.pri_nodes))
    return _Stepper(d, g).step(rng, "pri", eps_e1 / delta)


@dataclass(frozen=True)
class McmcConfig:
    """Knobs for one chain.

    ``max_steps`` counts outer steps; each runs ``pub_substeps`` public then
    ``pri_substeps`` private proposals.  The chain stops early once the best
    combined score ``L_pub + (eps_e1 / delta_e) * L_pri`` has not improved by
    more than ``convergence_tol`` within ``convergence_window`` outer steps.
    """

    eps_e1: float
    seed: int = 0
    max_steps: int = 10_000
    pub_substeps: int = 1
    pri_substeps: int = 1
    convergence_window: int = 2_000
    convergence_tol: float = 1e-6

    def __post_init__(self) -> None:
        if not self.eps_e1 > 0:
            raise ValueError(f"eps_e1 must be positive, got {self.eps_e1}")
        if self.max_steps < 0 or self.pub_substeps < 0 or self.pri_substeps < 0:
            raise ValueError("step counts must be non-negative")
        if self.convergence_window < 1:
            raise ValueError("convergence_window must be >= 1")


@dataclass(frozen=True)
class McmcResult:
    dendrogram: Dendrogram
    best_dendrogram: Dendrogram
    lpub: float
    lpri: float
    best_score: float
    steps_run: int
    converged: bool
    delta_e: float | None
    pub_accepts: int
    pri_accepts: int


def run_mcmc(
    g: PrivacyGraph,
    config: McmcConfig,
    chain_index: int = 0,
    trace: TextIO | None = None,
) -> McmcResult:
    """Run one chain from a random initial dendrogram.

    Sides with no edges are skipped (a graph with no private edges reduces to
    plain public MCMC and vice versa); at least one side must have two
    incident nodes.  Randomness comes from
    ``RngStream(config.seed).child(STREAM_MCMC, chain_index)``.  The returned
    final likelihoods are recomputed from scratch so accumulated per-step
    deltas cannot drift.  ``trace`` (optional, line-delimited) receives
    ``outer step, L_pub, L_pri, public accepts, private accepts`` per step.
    """
    active_pub = len(g.pub_edges) > 0
    active_pri = len(g.pri_edges) > 0
    if len(g.pub_nodes) < 2 and len(g.pri_nodes) < 2:
        raise ValueError("graph has no class with at least 2 incident nodes; nothing to fit")
    dval = effective_delta_e(len(g.pri_nodes)) if active_pri else None
    scale = config.eps_e1 / dval if active_pri else 0.0

    if g.n == 2:
        d = compute_stats(from_nested((0, 1)), g)
        lpub, lpri = log_likelihood(d, "pub"), log_likelihood(d, "pri")
        score = lpub + scale * lpri
        return McmcResult(d, d.copy(), lpub, lpri, score, 0, True, dval, 0, 0)

    rng = RngStream(config.seed).child(STREAM_MCMC, chain_index).generator()
    d = compute_stats(random_dendrogram(g.n, rng), g)
    stepper = _Stepper(d, g)
    lpub = log_likelihood(d, "pub")
    lpri = log_likelihood(d, "pri")
    best = lpub + scale * lpri
    best_d = d.copy()
    best_step = 0
    pub_acc_total = pri_acc_total = 0
    steps = 0
    converged = False
    for outer in range(1, config.max_steps + 1):
        steps = outer
        pub_acc = pri_acc = 0
        if active_pub:
            for _ in range(config.pub_substeps):
                info = stepper.step(rng, "pub", 1.0)
                if info.accepted:
                    lpub += info.delta_pub
                    lpri += info.delta_pri
                    pub_acc += 1
        if active_pri:
            for _ in range(config.pri_substeps):
                info = stepper.step(rng, "pri", scale)
                if info.accepted:
                    lpub += info.delta_pub
                    lpri += info.delta_pri
                    pri_acc += 1
        pub_acc_total += pub_acc
        pri_acc_total += pri_acc
        score = lpub + scale * lpri
        if score > best + config.convergence_tol:
            best = score
            best_step = outer
            best_d = d.copy()
        if trace is not None:
            trace.write(f"{outer}\t{lpub:.10g}\t{lpri:.10g}\t{pub_acc}\t{pri_acc}\n")
        if outer - best_step >= config.convergence_window:
            converged = True
            break
    lpub = log_likelihood(d, "pub")
    lpri = log_likelihood(d, "pri")
    return McmcResult(
        dendrogram=d,
        best_dendrogram=best_d,
        lpub=lpub,
        lpri=lpri,
        best_score=best,
        steps_run=steps,
        converged=converged,
        delta_e=dval,
        pub_accepts=pub_acc_total,
        pri_accepts=pri_acc_total,
    )
