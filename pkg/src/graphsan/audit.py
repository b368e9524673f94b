"""Desk-scale auditor: brute-force privacy checks, utility metrics, attacks.

Everything here verifies the release mechanisms from the outside: the LDP
check re-derives worst-case likelihood ratios by enumeration, the sensitivity
check re-derives the private-likelihood bound over every small graph pair and
dendrogram, and the edge-inference attack measures how much private structure
a released graph still leaks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .feature_rr import ldp_max_ratio_detail
from .graph import Edge, FeatureMatrix, PrivacyGraph, RngStream
from .hrg import Dendrogram, compute_stats, enumerate_dendrograms, log_likelihood
from .mcmc import delta_e
from .scoring import BudgetAllocation

#: RngStream split index reserved for audit experiments.
STREAM_AUDIT = 4


# -- feature LDP conformance -------------------------------------------------


@dataclass(frozen=True)
class LdpFeatureCheck:
    feature: int
    eps: float
    sigma: float
    max_ratio: float
    bound: float
    witness: tuple[int, int, int]
    passed: bool


@dataclass(frozen=True)
class LdpAuditReport:
    k: int
    tol: float
    checks: tuple[LdpFeatureCheck, ...]
    passed: bool

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            line = f"ldp_max_ratio_feature_{c.feature}\t{c.max_ratio:.12g}\t{status}"
            if not c.passed:
                u, t, tp = c.witness
                line += f"\tworst triple u={u} t={t} t'={tp} bound={c.bound:.12g}"
            out.append(line)
        out.append(f"ldp_all_features\t{'PASS' if self.passed else 'FAIL'}")
        return out


def audit_feature_ldp(k: int, budgets: BudgetAllocation, tol: float = 1e-9) -> LdpAuditReport:
    """Check every feature's worst-case ratio against exp(eps_i) by enumeration."""
    if k != budgets.k:
        raise ValueError(f"bin count {k} does not match allocation's {budgets.k}")
    checks = []
    for i in range(budgets.eps.size):
        ratio, witness = ldp_max_ratio_detail(k, float(budgets.sigma[i]))
        bound = math.exp(float(budgets.eps[i]))
        checks.append(
            LdpFeatureCheck(
                feature=i,
                eps=float(budgets.eps[i]),
                sigma=float(budgets.sigma[i]),
                max_ratio=ratio,
                bound=bound,
                witness=witness,
                passed=ratio <= bound + tol,
            )
        )
    return LdpAuditReport(
        k=int(k), tol=tol, checks=tuple(checks), passed=all(c.passed for c in checks)
    )


# -- brute-force likelihood oracles -------------------------------------------


def brute_force_best_dendrogram(g: PrivacyGraph, which: str = "pub") -> tuple[Dendrogram, float]:
    """Exact likelihood optimum by enumerating all (2n-3)!! shapes (n <= 8).

    ``which`` is 'pub', 'pri' or 'combined' (the plain sum of both).
    """
    if which not in ("pub", "pri", "combined"):
        raise ValueError(f"which must be 'pub', 'pri' or 'combined', got {which!r}")
    best_d = None
    best = -math.inf
    for d in enumerate_dendrograms(g.n):
        compute_stats(d, g)
        if which == "combined":
            ll = log_likelihood(d, "pub") + log_likelihood(d, "pri")
        else:
            ll = log_likelihood(d, which)
        if ll > best:
            best, best_d = ll, d
    assert best_d is not None
    return best_d, best


def _xlogx(a: np.ndarray) -> np.ndarray:
    return np.where(a > 0, a * np.log(np.where(a > 0, a, 1.0)), 0.0)


def brute_force_delta_e(n_private: int) -> float:
    """Exact private-likelihood sensitivity over all graph pairs and shapes.

    Treats all ``n_private`` nodes as the (fixed) private node set, enumerates
    every private edge set on them, every dendrogram, and every one-edge
    addition, and returns the largest absolute change of the private
    log-likelihood.  Keeping the node set fixed between neighbors matches the
    setting :func:`graphsan.mcmc.delta_e` is meant to bound, so a gap against
    that constant indicts the formula rather than a shifting denominator.
    Limited to 3..5 nodes to stay desk-scale.
    """
    v = int(n_private)
    if not 3 <= v <= 5:
        raise ValueError(f"brute force supported for 3..5 private nodes, got {v}")
    pairs = [(i, j) for i in range(v) for j in range(i + 1, v)]
    C = len(pairs)
    n_graphs = 1 << C
    masks = np.arange(n_graphs, dtype=np.int64)
    present = ((masks[:, None] >> np.arange(C)) & 1).astype(bool)  # (graphs, edges)

    dendros = list(enumerate_dendrograms(v))
    ll = np.zeros((n_graphs, len(dendros)))
    for j, d in enumerate(dendros):
        for node in d.internal_nodes():
            l, r = d.children(node)
            left = set(d.subtree_leaves(l))
            right = set(d.subtree_leaves(r))
            cross = [
                e
                for e, (a, b) in enumerate(pairs)
                if (a in left and b in right) or (a in right and b in left)
            ]
            N = float(len(left) * len(right))
            ebar = present[:, cross].sum(axis=1)
            p = ebar / N
            ll[:, j] += N * (_xlogx(p) + _xlogx(1.0 - p))

    worst = 0.0
    for e in range(C):
        bit = 1 << e
        without = masks[(masks & bit) == 0]
        diff = np.abs(ll[without] - ll[without | bit]).max()
        worst = max(worst, float(diff))
    return worst


# -- utility metrics -----------------------------------------------------------


@dataclass(frozen=True)
class UtilityReport:
    precision: float
    recall: float
    f1: float
    degree_tv: float
    edge_ratio: float

    def lines(self) -> list[str]:
        return [
            f"private_edge_precision\t{self.precision:.6f}",
            f"private_edge_recall\t{self.recall:.6f}",
            f"private_edge_f1\t{self.f1:.6f}",
            f"degree_distribution_tv\t{self.degree_tv:.6f}",
            f"edge_count_ratio\t{self.edge_ratio:.6f}",
        ]


def _degree_distribution(g: PrivacyGraph, max_deg: int) -> np.ndarray:
    deg = np.zeros(g.n, dtype=np.int64)
    for u, v in g.all_edges:
        deg[u] += 1
        deg[v] += 1
    hist = np.bincount(deg, minlength=max_deg + 1).astype(np.float64)
    return hist / hist.sum()


def utility_metrics(original: PrivacyGraph, released: PrivacyGraph) -> UtilityReport:
    """Compare a released graph against the original it was derived from."""
    if original.n != released.n:
        raise ValueError("graphs must have the same node count")
    if not original.all_edges:
        raise ValueError("original graph has no edges; ratios undefined")
    tp = len(original.pri_edges & released.pri_edges)
    precision = tp / len(released.pri_edges) if released.pri_edges else 0.0
    recall = tp / len(original.pri_edges) if original.pri_edges else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    max_deg = original.n
    p = _degree_distribution(original, max_deg)
    q = _degree_distribution(released, max_deg)
    return UtilityReport(
        precision=precision,
        recall=recall,
        f1=f1,
        degree_tv=0.5 * float(np.abs(p - q).sum()),
        edge_ratio=len(released.all_edges) / len(original.all_edges),
    )


# -- edge-inference attack -------------------------------------------------------


def roc_auc(scores: np.ndarray, labels: np.ndarray) -> float:
    """Rank-based ROC-AUC with averaged tie ranks.

    Equals the probability that a random positive outscores a random negative,
    counting ties as one half.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError("scores and labels must be 1-D and aligned")
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("labels are degenerate (need both classes)")
    _, inv = np.unique(scores, return_inverse=True)
    counts = np.bincount(inv)
    ends = np.cumsum(counts)
    avg_rank = (ends - counts + 1 + ends) / 2.0
    ranks = avg_rank[inv]
    return float((ranks[labels == 1].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


@dataclass(frozen=True)
class AttackReport:
    auc: float
    scores: np.ndarray
    cn_weight: float


def edge_inference_attack(
    released: PrivacyGraph,
    pairs: list[Edge],
    labels: np.ndarray,
    features: FeatureMatrix | None = None,
    cn_weight: float = 0.5,
) -> AttackReport:
    """Baseline link-inference attack against a released graph.

    Scores each candidate pair by a convex combination of its common-neighbor
    count over the released edges (max-normalized) and, when released features
    are supplied, the cosine similarity of the endpoint feature rows.  Labels
    mark which candidates are true private edges of the original graph.
    """
    if not 0.0 <= cn_weight <= 1.0:
        raise ValueError(f"cn_weight must be in [0, 1], got {cn_weight}")
    neigh = [set() for _ in range(released.n)]
    for u, v in released.all_edges:
        neigh[u].add(v)
        neigh[v].add(u)
    cn = np.array([len(neigh[u] & neigh[v]) for u, v in pairs], dtype=np.float64)
    if cn.size and cn.max() > 0:
        cn /= cn.max()
    if features is None:
        scores = cn
    else:
        fv = features.values
        sims = np.empty(len(pairs))
        for idx, (u, v) in enumerate(pairs):
            nu = float(np.linalg.norm(fv[u]))
            nv = float(np.linalg.norm(fv[v]))
            sims[idx] = float(fv[u] @ fv[v]) / (nu * nv) if nu > 0 and nv > 0 else 0.0
        scores = cn_weight * cn + (1.0 - cn_weight) * sims
    return AttackReport(auc=roc_auc(scores, np.asarray(labels)), scores=scores, cn_weight=cn_weight)


def candidate_pairs(
    original: PrivacyGraph, stream: RngStream, negatives_per_positive: int = 1
) -> tuple[list[Edge], np.ndarray]:
    """Attack candidates: all private edges plus sampled private-pair non-edges.

    Negatives are drawn (without replacement) from pairs of private nodes with
    no edge of either class in the original, so the attack measures edge
    inference among plausibly-linked nodes rather than community membership.
    """
    positives = sorted(original.pri_edges)
    if not positives:
        raise ValueError("original graph has no private edges; nothing to attack")
    nodes = sorted(original.pri_nodes)
    existing = original.all_edges
    pool = [
        (u, v)
        for i, u in enumerate(nodes)
        for v in nodes[i + 1 :]
        if (u, v) not in existing
    ]
    if not pool:
        raise ValueError("no candidate non-edges among private nodes")
    want = min(len(pool), negatives_per_positive * len(positives))
    gen = stream.generator()
    idx = gen.choice(len(pool), size=want, replace=False)
    negatives = [pool[i] for i in sorted(int(i) for i in idx)]
    pairs = positives + negatives
    labels = np.array([1] * len(positives) + [0] * len(negatives), dtype=np.int64)
    return pairs, labels


# -- synthetic graphs ------------------------------------------------------------


def intra_rate_for_fraction(
    n: int, n_groups: int, group_size: int, p_inter: float, rho: float
) -> float:
    """Intra-group edge rate giving an expected private-edge fraction of rho."""
    if not 0 < rho < 1:
        raise ValueError(f"rho must be in (0, 1), got {rho}")
    intra_pairs = n_groups * group_size * (group_size - 1) // 2
    total_pairs = n * (n - 1) // 2
    m_pri = rho * p_inter * total_pairs / (1.0 - rho * (1.0 - p_inter))
    p_intra = m_pri / intra_pairs
    if p_intra > 1.0:
        raise ValueError(
            f"target fraction {rho} unreachable: required intra rate {p_intra:.3f} > 1"
        )
    return p_intra


def planted_partition_graph(
    n: int,
    n_groups: int,
    group_size: int,
    p_intra: float,
    p_inter: float,
    stream: RngStream,
) -> PrivacyGraph:
    """Two-class planted-partition graph for audit experiments.

    The first ``n_groups * group_size`` nodes form consecutive groups; each
    intra-group pair gets a PRIVATE edge with probability ``p_intra``.  Every
    remaining pair (including intra-group pairs that drew no private edge)
    gets a PUBLIC edge with probability ``p_inter``.  The private classes thus
    carry the planted structure while the public class is background noise,
    which is exactly the situation the edge release is supposed to protect.
    """
    if n_groups * group_size > n:
        raise ValueError("groups do not fit into the node set")
    group = np.full(n, -1, dtype=np.int64)
    for gi in range(n_groups):
        group[gi * group_size : (gi + 1) * group_size] = gi
    iu, iv = np.triu_indices(n, k=1)
    same = (group[iu] >= 0) & (group[iu] == group[iv])
    gen = stream.generator()
    draw_pri = gen.random(iu.size)
    draw_pub = gen.random(iu.size)
    pri_mask = same & (draw_pri < p_intra)
    pub_mask = (~pri_mask) & (draw_pub < p_inter)
    pri = frozenset((int(u), int(v)) for u, v in zip(iu[pri_mask], iv[pri_mask]))
    pub = frozenset((int(u), int(v)) for u, v in zip(iu[pub_mask], iv[pub_mask]))
    return PrivacyGraph(n, pub_edges=pub, pri_edges=pri)


def uniform_private_resample(g: PrivacyGraph, stream: RngStream) -> PrivacyGraph:
    """Null model: replace private edges by an iid uniform draw of equal density.

    Keeps the public edges; every private-node pair becomes a private edge
    independently with the original private density.  An attack on this
    release should be blind (AUC about one half).
    """
    nodes = sorted(g.pri_nodes)
    total = len(nodes) * (len(nodes) - 1) // 2
    if total == 0:
        raise ValueError("graph has no private pairs to resample")
    p = len(g.pri_edges) / total
    gen = stream.generator()
    pri = set()
    for i, u in enumerate(nodes):
        for v in nodes[i + 1 :]:
            if gen.random() < p:
                pri.add((u, v))
    return PrivacyGraph(g.n, pub_edges=g.pub_edges, pri_edges=frozenset(pri) - g.pub_edges)


# -- defense trend experiment ------------------------------------------------------


@dataclass(frozen=True)
class TrendReport:
    """Attack AUC versus edge budget, averaged over seeds."""

    eps_values: tuple[float, ...]
    auc_original: float
    auc_by_eps: dict[float, float]
    per_seed_original: tuple[float, ...]
    per_seed_by_eps: dict[float, tuple[float, ...]]
    params: dict = field(default_factory=dict)

    def lines(self) -> list[str]:
        out = [f"attack_auc_original\t{self.auc_original:.6f}"]
        for eps in self.eps_values:
            out.append(f"attack_auc_eps_{eps:g}\t{self.auc_by_eps[eps]:.6f}")
        return out


def defense_trend(
    eps_values: tuple[float, ...] = (10.0, 1.0, 0.1),
    n_seeds: int = 20,
    seed: int = 0,
    n: int = 100,
    n_groups: int = 2,
    group_size: int = 14,
    p_inter: float = 0.12,
    rho: float = 0.2,
    mcmc_steps: int = 20_000,
    pri_substeps: int = 4,
) -> TrendReport:
    """Attack the original and eps-sanitized releases across seeds.

    For each seed, builds a planted-partition graph, fixes one candidate set,
    and measures the attack AUC on the original graph and on edge releases at
    each total budget (split evenly between the two edge stages).

    pri_substeps defaults above 1 because the background edges make the
    public likelihood landscape nearly flat here: extra private substeps let
    the chain equilibrate the block structure that actually carries budget
    without changing either acceptance rule.
    """
    from .pipeline import release_edges  # local import: pipeline depends on audit users, not vice versa

    p_intra = intra_rate_for_fraction(n, n_groups, group_size, p_inter, rho)
    root = RngStream(seed).child(STREAM_AUDIT)
    per_orig: list[float] = []
    per_eps: dict[float, list[float]] = {eps: [] for eps in eps_values}
    for s in range(n_seeds):
        g = planted_partition_graph(
            n, n_groups, group_size, p_intra, p_inter, root.child(s, 0)
        )
        pairs, labels = candidate_pairs(g, root.child(s, 1))
        per_orig.append(edge_inference_attack(g, pairs, labels).auc)
        for j, eps in enumerate(eps_values):
            released, _ = release_edges(
                g,
                eps_e1=eps / 2.0,
                eps_e2=eps / 2.0,
                seed=seed * 1_000_003 + s * 101 + j,
                max_steps=mcmc_steps,
                pri_substeps=pri_substeps,
                convergence_window=mcmc_steps,
            )
            per_eps[eps].append(edge_inference_attack(released.graph, pairs, labels).auc)
    return TrendReport(
        eps_values=tuple(eps_values),
        auc_original=float(np.mean(per_orig)),
        auc_by_eps={eps: float(np.mean(v)) for eps, v in per_eps.items()},
        per_seed_original=tuple(per_orig),
        per_seed_by_eps={eps: tuple(v) for eps, v in per_eps.items()},
        params={
            "n": n,
            "n_groups": n_groups,
            "group_size": group_size,
            "p_intra": p_intra,
            "p_inter": p_inter,
            "rho": rho,
            "mcmc_steps": mcmc_steps,
            "pri_substeps": pri_substeps,
            "n_seeds": n_seeds,
            "seed": seed,
        },
    )
