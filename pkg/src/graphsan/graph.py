"""Core containers: class-labelled graphs, feature matrices, splittable RNG streams."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

Edge = tuple[int, int]


def _canon(u: int, v: int) -> Edge:
    return (u, v) if u <= v else (v, u)


@dataclass(frozen=True)
class PrivacyGraph:
    """Undirected graph whose edges carry a public/private visibility class.

    Nodes are dense integer ids ``0..n-1``.  Edges are stored canonically as
    ``(min, max)`` pairs.  Public edges are released verbatim by the pipeline;
    private edges leave the graph only through the DP release path.  Instances
    are immutable; sanitization builds new graphs instead of mutating.

    Construction does not enforce the class invariants (no self-loops, no pair
    in both classes, endpoints in range); use :func:`validate_graph` to check
    a graph built from untrusted parts.
    """

    n: int
    pub_edges: frozenset[Edge] = frozenset()
    pri_edges: frozenset[Edge] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "pub_edges", frozenset(_canon(u, v) for u, v in self.pub_edges))
        object.__setattr__(self, "pri_edges", frozenset(_canon(u, v) for u, v in self.pri_edges))

    @cached_property
    def pub_nodes(self) -> frozenset[int]:
        """Nodes incident to at least one public edge."""
        return frozenset(x for e in self.pub_edges for x in e)

    @cached_property
    def pri_nodes(self) -> frozenset[int]:
        """Nodes incident to at least one private edge."""
        return frozenset(x for e in self.pri_edges for x in e)

    @property
    def all_edges(self) -> frozenset[Edge]:
        return self.pub_edges | self.pri_edges

    def adjacency(self, which: str = "all") -> list[list[int]]:
        """Neighbor lists (sorted) over the chosen edge class: pub, pri or all."""
        edges = {"pub": self.pub_edges, "pri": self.pri_edges, "all": self.all_edges}[which]
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in edges:
            adj[u].append(v)
            adj[v].append(u)
        for row in adj:
            row.sort()
        return adj


def validate_graph(g: PrivacyGraph) -> list[str]:
    """Report every invariant violation in ``g``; an empty list means valid.

    Checks: node ids within ``0..n-1``, no self-loops, no unordered pair in
    both edge classes.  Reporting rather than raising lets the auditor show
    all problems at once.
    """
    problems: list[str] = []
    if g.n < 0:
        problems.append(f"negative node count {g.n}")
    for label, edges in (("pub", g.pub_edges), ("pri", g.pri_edges)):
        for u, v in sorted(edges):
            if u == v:
                problems.append(f"self-loop at {u} in {label} class")
            if not (0 <= u < g.n) or not (0 <= v < g.n):
                problems.append(f"edge ({u},{v}) in {label} class outside 0..{g.n - 1}")
    for u, v in sorted(g.pub_edges & g.pri_edges):
        problems.append(f"dual-class edge ({u},{v})")
    return problems


@dataclass(frozen=True)
class FeatureMatrix:
    """Node-by-feature matrix of floats; row ``v`` holds the features of node ``v``.

    The underlying array is copied and frozen on construction.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=np.float64, copy=True)
        if arr.ndim != 2:
            raise ValueError(f"feature matrix must be 2-D, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n_nodes(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]


def normalize_features(raw: np.ndarray | FeatureMatrix) -> FeatureMatrix:
    """Min-max scale every column into [0, 1]; constant columns map to all zeros.

    Raises ValueError naming the first offending column if it contains a
    non-finite entry.
    """
    values = raw.values if isinstance(raw, FeatureMatrix) else np.asarray(raw, dtype=np.float64)
    if values.ndim != 2:
        raise ValueError(f"feature matrix must be 2-D, got shape {values.shape}")
    finite = np.isfinite(values).all(axis=0)
    if not finite.all():
        col = int(np.flatnonzero(~finite)[0])
        raise ValueError(f"non-finite value in feature column {col}")
    lo = values.min(axis=0)
    span = values.max(axis=0) - lo
    out = np.zeros_like(values)
    nz = span > 0
    out[:, nz] = (values[:, nz] - lo[nz]) / span[nz]
    return FeatureMatrix(out)


@dataclass(frozen=True)
class RngStream:
    """Deterministic, splittable randomness source.

    A stream is identified by a root seed plus a path of split indices; the
    same (seed, path) always yields the same generator, and distinct paths
    yield statistically independent generators.  The pipeline derives one
    child stream per consumer (per feature cell, per MCMC chain, per sampled
    pair), which makes outputs reproducible regardless of evaluation order.
    """

    seed: int
    path: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        object.__setattr__(self, "path", tuple(int(i) for i in self.path))

    def child(self, *indices: int) -> RngStream:
        return RngStream(self.seed, self.path + tuple(int(i) for i in indices))

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=self.path))
