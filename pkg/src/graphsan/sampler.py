"""Resample private edges from the released probabilities and rebuild the graph."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

from .graph import Edge, PrivacyGraph, RngStream
from .hrg import Dendrogram, lca_node

#: RngStream split index reserved for the pair-sampling phase.
STREAM_SAMPLER = 3


def lca(d: Dendrogram, u: int, v: int) -> int:
    """Lowest common ancestor of leaves ``u`` and ``v`` (an internal node id)."""
    n = d.n
    if not (0 <= u < n and 0 <= v < n):
        raise ValueError(f"leaves must be in 0..{n - 1}, got ({u}, {v})")
    if u == v:
        raise ValueError("lca of a leaf with itself is undefined")
    return lca_node(d, u, v)


def sample_private_graph(
    d: Dendrogram, pri_nodes: Iterable[int], stream: RngStream
) -> frozenset[Edge]:
    """Draw a fresh private edge set: Bernoulli(ptilde at the pair's LCA).

    Every unordered pair of private nodes is resampled independently from its
    own child stream ``stream.child(u, v)``, so the draw for a pair does not
    depend on how many other pairs exist or the traversal order.
    """
    if d.stats is None:
        raise ValueError("stats not computed; run the release pipeline first")
    nodes = sorted(set(int(x) for x in pri_nodes))
    if nodes and not (0 <= nodes[0] and nodes[-1] < d.n):
        raise ValueError(f"private nodes outside 0..{d.n - 1}")
    ptilde = d.stats.ptilde
    out: set[Edge] = set()
    for i, u in enumerate(nodes):
        for v in nodes[i + 1 :]:
            p = ptilde[lca_node(d, u, v) - d.n]
            if math.isnan(p):
                raise RuntimeError(
                    f"ptilde missing at the LCA of ({u}, {v}); release probabilities incomplete"
                )
            if p > 0.0 and stream.child(u, v).generator().random() < p:
                out.add((u, v))
    return frozenset(out)


@dataclass(frozen=True)
class SanitizedGraph:
    """Release artifact: the rebuilt graph plus provenance metadata.

    The graph keeps the class labels (sampled edges are marked private) so
    audits can still separate the classes; :meth:`release_view` strips them
    for the outward-facing release.
    """

    graph: PrivacyGraph
    metadata: dict = field(default_factory=dict)

    def release_view(self) -> PrivacyGraph:
        return PrivacyGraph(self.graph.n, pub_edges=self.graph.all_edges)


def merge(
    g: PrivacyGraph, sampled_pri: frozenset[Edge], metadata: dict | None = None
) -> SanitizedGraph:
    """Combine the untouched public edges with a sampled private edge set.

    Public edges always survive verbatim; a sampled pair that coincides with
    a public edge is dropped from the private class (the pair stays public).
    Sampled pairs must touch only private nodes of ``g``.
    """
    pri_nodes = g.pri_nodes
    for u, v in sampled_pri:
        if u not in pri_nodes or v not in pri_nodes:
            raise ValueError(f"sampled pair ({u}, {v}) touches a non-private node")
    sampled = frozenset((u, v) if u <= v else (v, u) for u, v in sampled_pri)
    return SanitizedGraph(
        graph=PrivacyGraph(g.n, pub_edges=g.pub_edges, pri_edges=sampled - g.pub_edges),
        metadata=dict(metadata or {}),
    )
