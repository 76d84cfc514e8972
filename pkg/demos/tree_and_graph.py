"""Encode a small tree as a graph, decompose it back, compare distances."""

from __future__ import annotations

from splitlimit import DHTree, decompose, distance, gr
from splitlimit.sampler import exact_sampler, make_rng

t = exact_sampler("dh", 12).sample(8, make_rng(7))
g = gr(t)
print("tree :", t.to_json())
print("edges:", g.edges())
print("round trip ok:", decompose(g) == t)
for a, b in [(0, 1), (2, 5), (3, 8)]:
    print(f"d({a},{b}) tree={distance(t, a, b)} bfs={g.bfs(a)[b]}")
assert DHTree.from_json(t.to_json()) == t
