"""Dendrograms over graph nodes and their class-split likelihoods.

A dendrogram is a rooted full binary tree whose leaves are exactly the graph
nodes.  Every internal node ``r`` splits its leaves into left/right and is
scored by how well a single connection probability explains the edges that
cross the split.  Public and private edges are scored separately: the public
likelihood drives ordinary hill-climbing MCMC, the private likelihood enters
only through an exponential-mechanism acceptance rule.

Node ids: leaves are graph nodes ``0..n-1``; internal nodes are ``n..2n-2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph import PrivacyGraph


def chi(p: float) -> float:
    """Per-pair log-score ``p*ln(p) + (1-p)*ln(1-p)`` with 0*ln(0) = 0."""
    if p < 0.0 or p > 1.0:
        raise ValueError(f"probability {p} outside [0, 1]")
    acc = 0.0
    if p > 0.0:
        acc += p * math.log(p)
    if p < 1.0:
        acc += (1.0 - p) * math.log(1.0 - p)
    return acc


def num_dendrograms(n: int) -> int:
    """Count of labeled dendrogram shapes on n leaves: (2n-3)!!."""
    if n < 2:
        raise ValueError("need at least 2 leaves")
    out = 1
    for odd in range(3, 2 * n - 2, 2):
        out *= odd
    return out


@dataclass
class DendroStats:
    """Per-internal-node counts, indexed by internal ordinal ``node - n``.

    ``e``/``ebar``: public/private edges whose endpoints lie on opposite sides.
    ``L``/``R``: public-incident leaves below the left/right child, ``Lbar``/
    ``Rbar`` the private analogues.  ``npub_below``/``npri_below`` cover every
    node id (leaves included) and keep local MCMC updates O(subtree).
    ``ptilde`` holds the DP release probabilities once computed (NaN before).
    """

    e: list[int]
    ebar: list[int]
    L: list[int]
    R: list[int]
    Lbar: list[int]
    Rbar: list[int]
    npub_below: list[int]
    npri_below: list[int]
    ptilde: list[float]


@dataclass(frozen=True)
class InternalStats:
    """Read-only view of one internal node's counts and probabilities."""

    node: int
    e: int
    ebar: int
    L: int
    R: int
    Lbar: int
    Rbar: int
    p: float
    pbar: float
    ptilde: float


class Dendrogram:
    """Mutable rooted full binary tree over leaves ``0..n-1``.

    Only the MCMC sampler mutates an instance (single-owner discipline);
    everything else treats dendrograms as values and works on copies.
    """

    __slots__ = ("n", "left", "right", "parent", "root", "stats")

    def __init__(self, n: int, left: list[int], right: list[int], parent: list[int], root: int):
        self.n = n
        self.left = left
        self.right = right
        self.parent = parent
        self.root = root
        self.stats: DendroStats | None = None

    # -- structure ---------------------------------------------------------

    def is_leaf(self, node: int) -> bool:
        return node < self.n

    def children(self, node: int) -> tuple[int, int]:
        return self.left[node - self.n], self.right[node - self.n]

    def internal_nodes(self) -> range:
        return range(self.n, 2 * self.n - 1)

    def subtree_leaves(self, node: int) -> list[int]:
        """All leaf ids below ``node`` (``node`` itself if it is a leaf)."""
        out: list[int] = []
        stack = [node]
        while stack:
            x = stack.pop()
            if x < self.n:
                out.append(x)
            else:
                stack.append(self.left[x - self.n])
                stack.append(self.right[x - self.n])
        return out

    def postorder_internal(self) -> list[int]:
        """Internal node ids, children before parents."""
        order: list[int] = []
        stack = [self.root]
        while stack:
            x = stack.pop()
            if x >= self.n:
                order.append(x)
                stack.append(self.left[x - self.n])
                stack.append(self.right[x - self.n])
        order.reverse()
        return order

    def copy(self) -> Dendrogram:
        d = Dendrogram(self.n, list(self.left), list(self.right), list(self.parent), self.root)
        if self.stats is not None:
            s = self.stats
            d.stats = DendroStats(
                list(s.e), list(s.ebar), list(s.L), list(s.R), list(s.Lbar), list(s.Rbar),
                list(s.npub_below), list(s.npri_below), list(s.ptilde),
            )
        return d

    def internal_stats(self, node: int) -> InternalStats:
        if self.stats is None:
            raise ValueError("stats not computed; call compute_stats first")
        s, i = self.stats, node - self.n
        N = s.L[i] * s.R[i]
        Nbar = s.Lbar[i] * s.Rbar[i]
        return InternalStats(
            node=node, e=s.e[i], ebar=s.ebar[i], L=s.L[i], R=s.R[i],
            Lbar=s.Lbar[i], Rbar=s.Rbar[i],
            p=s.e[i] / N if N else 0.0,
            pbar=s.ebar[i] / Nbar if Nbar else 0.0,
            ptilde=s.ptilde[i],
        )


def lca_node(d: Dendrogram, x: int, y: int) -> int:
    """Lowest common ancestor of two distinct nodes, by ancestor-set walk."""
    if x == y:
        raise ValueError("lca of a node with itself is undefined here")
    seen = set()
    a = x
    while a != -1:
        seen.add(a)
        a = d.parent[a]
    b = y
    while b not in seen:
        b = d.parent[b]
    return b


def random_dendrogram(n: int, rng: np.random.Generator) -> Dendrogram:
    """Random tree built by iterative pair merging.

    Repeatedly picks two active subtrees uniformly at random and joins them
    under a fresh internal node.  Reaches every labeled shape (not with
    exactly uniform probability; balanced shapes are mildly favored), which
    is all the MCMC initialization needs.
    """
    if n < 2:
        raise ValueError("need at least 2 nodes")
    left = [0] * (n - 1)
    right = [0] * (n - 1)
    parent = [-1] * (2 * n - 1)
    active = list(range(n))
    for i in range(n - 1):
        a = active.pop(int(rng.integers(len(active))))
        b = active.pop(int(rng.integers(len(active))))
        node = n + i
        left[i], right[i] = a, b
        parent[a] = parent[b] = node
        active.append(node)
    return Dendrogram(n, left, right, parent, active[0])


def compute_stats(d: Dendrogram, g: PrivacyGraph) -> Dendrogram:
    """Fill in the per-internal-node counts of ``d`` for graph ``g``.

    The leaf set must be exactly ``0..g.n-1``.  Cross-edge counts attribute
    each edge to the lowest common ancestor of its endpoints.
    """
    n = d.n
    if n != g.n:
        raise ValueError(f"dendrogram has {n} leaves but graph has {g.n} nodes")
    npub = [0] * (2 * n - 1)
    npri = [0] * (2 * n - 1)
    for v in range(n):
        if v in g.pub_nodes:
            npub[v] = 1
        if v in g.pri_nodes:
            npri[v] = 1
    order = d.postorder_internal()
    for node in order:
        l, r = d.children(node)
        npub[node] = npub[l] + npub[r]
        npri[node] = npri[l] + npri[r]
    m = n - 1
    s = DendroStats(
        e=[0] * m, ebar=[0] * m,
        L=[0] * m, R=[0] * m, Lbar=[0] * m, Rbar=[0] * m,
        npub_below=npub, npri_below=npri,
        ptilde=[math.nan] * m,
    )
    for node in order:
        l, r = d.children(node)
        i = node - n
        s.L[i], s.R[i] = npub[l], npub[r]
        s.Lbar[i], s.Rbar[i] = npri[l], npri[r]
    for u, v in g.pub_edges:
        s.e[lca_node(d, u, v) - n] += 1
    for u, v in g.pri_edges:
        s.ebar[lca_node(d, u, v) - n] += 1
    d.stats = s
    return d


def log_likelihood(d: Dendrogram, which: str = "pub") -> float:
    """Class-restricted log-likelihood ``sum_r N_r * chi(e_r / N_r)``.

    ``N_r`` counts the class-incident leaf pairs split by ``r``; internal
    nodes with ``N_r = 0`` contribute nothing.  Always <= 0, with 0 reached
    exactly when every split is all-or-nothing.
    """
    if d.stats is None:
        raise ValueError("stats not computed; call compute_stats first")
    s = d.stats
    if which == "pub":
        es, Ls, Rs = s.e, s.L, s.R
    elif which == "pri":
        es, Ls, Rs = s.ebar, s.Lbar, s.Rbar
    else:
        raise ValueError(f"which must be 'pub' or 'pri', got {which!r}")
    total = 0.0
    for i in range(d.n - 1):
        N = Ls[i] * Rs[i]
        if N:
            total += N * chi(es[i] / N)
    return total


def subtree_alternatives(d: Dendrogram, r: int) -> tuple[Dendrogram, Dendrogram]:
    """The two local rotations at non-root internal node ``r``.

    With ``r``'s subtrees ``(a, b)`` and sibling subtree ``c``, the current
    configuration ``((a,b),c)`` has alternatives ``((a,c),b)`` and
    ``((c,b),a)``.  Returns fresh copies with stats dropped; the input is
    untouched.
    """
    if r < d.n:
        raise ValueError(f"node {r} is a leaf")
    if r == d.root:
        raise ValueError("root has no rotation alternatives")
    p = d.parent[r]
    a, b = d.children(r)
    pl, pr = d.children(p)
    c = pr if pl == r else pl

    def rebuild(r_kids: tuple[int, int], p_other: int) -> Dendrogram:
        out = Dendrogram(d.n, list(d.left), list(d.right), list(d.parent), d.root)
        i, j = r - d.n, p - d.n
        out.left[i], out.right[i] = r_kids
        if pl == r:
            out.left[j], out.right[j] = r, p_other
        else:
            out.left[j], out.right[j] = p_other, r
        for kid in r_kids:
            out.parent[kid] = r
        out.parent[p_other] = p
        return out

    return rebuild((a, c), b), rebuild((c, b), a)


# -- construction from / conversion to nested tuples ------------------------


def from_nested(nested: tuple | int) -> Dendrogram:
    """Build a dendrogram from nested 2-tuples of leaf ids, e.g. ((0,1),(2,3)).

    Leaf ids must be exactly ``0..n-1``.  Internal ids are assigned in
    post-order, so the root is always ``2n-2``.
    """
    leaves: list[int] = []

    def count(t) -> None:
        if isinstance(t, tuple):
            a, b = t
            count(a)
            count(b)
        else:
            leaves.append(int(t))

    count(nested)
    n = len(leaves)
    if sorted(leaves) != list(range(n)):
        raise ValueError(f"leaves must be exactly 0..{n - 1}, got {sorted(leaves)}")
    left = [0] * (n - 1)
    right = [0] * (n - 1)
    parent = [-1] * (2 * n - 1)
    next_internal = [n]

    def build(t) -> int:
        if not isinstance(t, tuple):
            return int(t)
        a = build(t[0])
        b = build(t[1])
        node = next_internal[0]
        next_internal[0] += 1
        left[node - n], right[node - n] = a, b
        parent[a] = parent[b] = node
        return node

    root = build(nested)
    return Dendrogram(n, left, right, parent, root)


def canonical_form(d: Dendrogram) -> tuple | int:
    """Order-insensitive nested-tuple form: children sorted by smallest leaf.

    Two dendrograms describe the same hierarchy iff their canonical forms are
    equal.
    """

    def canon(node: int) -> tuple:
        if node < d.n:
            return (node, node)  # (min leaf, form)
        l, r = d.children(node)
        ml, fl = canon(l)
        mr, fr = canon(r)
        if ml < mr:
            return (ml, (fl, fr))
        return (mr, (fr, fl))

    return canon(d.root)[1]


def enumerate_dendrograms(n: int) -> "list[Dendrogram] | object":
    """Yield every labeled dendrogram shape on leaves ``0..n-1`` exactly once.

    Grows a tree leaf by leaf, inserting the next leaf on every edge and
    above the root; the count is (2n-3)!!.  Capped at n = 8 (135135 shapes)
    to keep brute-force audits bounded.
    """
    if not 2 <= n <= 8:
        raise ValueError(f"enumeration supported for 2 <= n <= 8, got {n}")

    def insertions(t, x):
        yield (t, x)
        if isinstance(t, tuple):
            a, b = t
            for va in insertions(a, x):
                yield (va, b)
            for vb in insertions(b, x):
                yield (a, vb)

    def grow(t, next_leaf):
        if next_leaf == n:
            yield t
            return
        for t2 in insertions(t, next_leaf):
            yield from grow(t2, next_leaf + 1)

    def gen():
        for nested in grow((0, 1), 2):
            yield from_nested(nested)

    return gen()


def validate_dendrogram(d: Dendrogram) -> list[str]:
    """Structural invariant report: full binary, consistent parents, leaf cover."""
    problems: list[str] = []
    n = d.n
    if len(d.left) != n - 1 or len(d.right) != n - 1 or len(d.parent) != 2 * n - 1:
        return [f"array lengths inconsistent with n={n}"]
    if d.parent[d.root] != -1:
        problems.append("root has a parent")
    seen_parents = {}
    for node in d.internal_nodes():
        for kid in d.children(node):
            if kid in seen_parents:
                problems.append(f"node {kid} has two parents")
            seen_parents[kid] = node
            if d.parent[kid] != node:
                problems.append(f"parent[{kid}] inconsistent with child links")
    leaves = sorted(d.subtree_leaves(d.root))
    if leaves != list(range(n)):
        problems.append(f"leaves below root are {leaves}, expected 0..{n - 1}")
    return problems


def to_newick(d: Dendrogram) -> str:
    """Newick-style dump with per-internal-node count annotations.

    Intended for audit and debugging output; not parsed back.
    """

    def fmt(x: float) -> str:
        return "na" if math.isnan(x) else f"{x:.6g}"

    def render(node: int) -> str:
        if node < d.n:
            return str(node)
        l, r = d.children(node)
        body = f"({render(l)},{render(r)})"
        if d.stats is None:
            return body
        st = d.internal_stats(node)
        ann = (
            f"e={st.e};ebar={st.ebar};L={st.L};R={st.R};Lbar={st.Lbar};Rbar={st.Rbar};"
            f"p={fmt(st.p)};pbar={fmt(st.pbar)};ptilde={fmt(st.ptilde)}"
        )
        return body + "[" + ann + "]"

    return render(d.root) + ";"
