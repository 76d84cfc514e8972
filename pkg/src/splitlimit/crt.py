"""Finite-dimensional marginals of the Brownian continuum random tree.

A k-proper shape is a rooted binary tree whose root is the extra leaf 0 and
whose other leaves are 1..k. Shapes are nested tuples: a leaf is its integer,
an internal node is the pair of its children sorted by smallest leaf.

Edge numbering used throughout the package: edge 0 hangs below leaf 0, edge
``i`` (1 <= i <= k) ends at leaf ``i``, and the remaining internal edges get
indices ``k+1 ... 2k-2`` in order of their sorted leaf clusters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import stats


def _min_leaf(node) -> int:
    return node if isinstance(node, int) else min(_min_leaf(c) for c in node)


def canonical_shape(node):
    if isinstance(node, int):
        return node
    a, b = (canonical_shape(c) for c in node)
    return (a, b) if _min_leaf(a) < _min_leaf(b) else (b, a)


def shape_key(node) -> str:
    """Stable string key of a shape, e.g. ``((1,2),3)``."""
    node = canonical_shape(node)
    if isinstance(node, int):
        return str(node)
    return "(" + ",".join(shape_key(c) for c in node) + ")"


def double_factorial(m: int) -> int:
    return 1 if m <= 0 else m * double_factorial(m - 2)


def _subtrees(node):
    yield node
    if not isinstance(node, int):
        for c in node:
            yield from _subtrees(c)


def _graft(node, target, leaf):
    """Subdivide the edge above ``target`` and hang ``leaf`` there."""
    if node is target:
        return (node, leaf)
    if isinstance(node, int):
        return node
    return tuple(_graft(c, target, leaf) for c in node)


@lru_cache(maxsize=None)
def kproper_shapes(k: int) -> tuple:
    """All (2k-3)!! shapes with leaves 1..k, canonical and sorted by key."""
    if k < 1:
        raise ValueError("k must be at least 1")
    shapes = [1]
    for leaf in range(2, k + 1):
        nxt = []
        for s in shapes:
            for target in list(_subtrees(s)):
                nxt.append(canonical_shape(_graft(s, target, leaf)))
        shapes = nxt
    uniq = {shape_key(s): s for s in shapes}
    return tuple(uniq[key] for key in sorted(uniq))


def _cluster(node) -> tuple[int, ...]:
    return tuple(sorted(x for x in _subtrees(node) if isinstance(x, int)))


@dataclass(frozen=True)
class EdgeLayout:
    """Edges of a shape indexed as described in the module docstring."""

    shape: object
    k: int
    clusters: tuple[tuple[int, ...], ...]  # leaf cluster below each edge
    branches: tuple[tuple[int, int, int], ...]  # (parent edge, smaller child edge, larger child edge)

    @property
    def n_edges(self) -> int:
        return len(self.clusters)

    def edge_of_cluster(self, cluster) -> int:
        return self.clusters.index(tuple(sorted(cluster)))


@lru_cache(maxsize=None)
def edge_layout(shape) -> EdgeLayout:
    shape = canonical_shape(shape)
    nodes = list(_subtrees(shape))
    k = sum(isinstance(x, int) for x in nodes)
    root_cluster = _cluster(shape)
    leaf_clusters = [(i,) for i in range(1, k + 1)]
    inner = sorted({_cluster(x) for x in nodes if not isinstance(x, int) and x is not shape})
    clusters = [root_cluster] + leaf_clusters + [c for c in inner if c != root_cluster]
    if k == 1:
        clusters = [root_cluster]
    branches = []
    for x in nodes:
        if isinstance(x, int):
            continue
        e = clusters.index(_cluster(x))
        a, b = sorted(clusters.index(_cluster(c)) for c in x)
        branches.append((e, a, b))
    return EdgeLayout(shape, k, tuple(clusters), tuple(sorted(branches)))


def sample_lengths(k: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Edge lengths of a k-proper tree: chi(2k) total length spread uniformly on the simplex."""
    d = 2 * k - 1
    m = 1 if size is None else size
    total = np.sqrt(rng.chisquare(2 * k, size=m))
    spacing = rng.dirichlet(np.ones(d), size=m)
    out = spacing * total[:, None]
    return out[0] if size is None else out


def sample_lengths_rejection(k: int, rng: np.random.Generator, size: int) -> np.ndarray:
    """Same law drawn by rejection from i.i.d. exponential proposals.

    Target density on the positive orthant of dimension 2k-1 is proportional
    to s*exp(-s^2/2) with s the sum of coordinates.
    """
    d = 2 * k - 1
    lam = d / math.sqrt(2 * k)
    s_star = (lam + math.sqrt(lam * lam + 4)) / 2
    log_bound = math.log(s_star) + lam * s_star - s_star * s_star / 2
    chunks = []
    have = 0
    while have < size:
        batch = max(1024, 4 * (size - have))
        x = rng.exponential(1 / lam, size=(batch, d))
        s = x.sum(axis=1)
        log_ratio = np.log(s) + lam * s - s * s / 2 - log_bound
        keep = np.log(rng.random(batch)) < log_ratio
        chunks.append(x[keep])
        have += int(keep.sum())
    return np.concatenate(chunks)[:size]


def sample_shape(k: int, rng: np.random.Generator):
    """Uniform k-proper shape by grafting each new leaf on a uniform edge."""
    shape = 1
    for leaf in range(2, k + 1):
        edges = list(_subtrees(shape))
        shape = _graft(shape, edges[int(rng.integers(len(edges)))], leaf)
    return canonical_shape(shape)


def sample_kproper(k: int, rng: np.random.Generator):
    """A shape and its edge lengths (indexed as in ``edge_layout``)."""
    return sample_shape(k, rng), sample_lengths(k, rng)


def distance_matrix(shape, lengths) -> np.ndarray:
    """Distances between leaves 0..k along the weighted shape."""
    layout = edge_layout(shape)
    k = layout.k
    lengths = np.asarray(lengths, dtype=float)
    if lengths.shape != (layout.n_edges,):
        raise ValueError(f"expected {layout.n_edges} edge lengths")
    # depth of leaf i = total length of edges whose cluster contains i
    member = np.array([[i in c for c in layout.clusters] for i in range(k + 1)], dtype=float)
    depth = member @ lengths
    out = np.zeros((k + 1, k + 1))
    for i in range(k + 1):
        for j in range(k + 1):
            if i != j:
                shared = (member[i] * member[j]) @ lengths
                out[i, j] = depth[i] + depth[j] - 2 * shared
    return out


def rayleigh_mean() -> float:
    return math.sqrt(math.pi / 2)


def total_length_cdf(k: int):
    """CDF of the total edge length (chi with 2k degrees of freedom)."""
    return stats.chi(2 * k).cdf


def total_length_pdf(k: int):
    return stats.chi(2 * k).pdf
