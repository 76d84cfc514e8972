"""Reduced clique-star trees, the graphs they encode, and the inverse decomposition.

A tree is stored in nested canonical form:

* a leaf is its positive integer label;
* an internal node is ``(kind, dist, children)`` with ``kind`` in
  ``{"K", "SC", "SX"}``, ``children`` a tuple sorted by smallest leaf label
  and ``dist`` the index of the distinguished child (``SX`` only, else ``None``).

The root-leaf carries label 0 and is implicit: it hangs above the root-node.
"""

from __future__ import annotations

import itertools
import json
import sys
from collections import deque
from typing import Iterable, Mapping

import networkx as nx

KINDS = ("K", "SC", "SX")


class InvalidTreeError(ValueError):
    pass


class NotDistanceHereditaryError(ValueError):
    pass


def canonicalize(node):
    """Sort children by smallest leaf label, remapping the distinguished index."""
    if isinstance(node, int):
        return node
    # iterative post-order so deep trees do not hit the recursion limit
    done: dict[int, tuple] = {}
    stack = [(node, False)]
    while stack:
        x, ready = stack.pop()
        if isinstance(x, int):
            continue
        if not ready:
            stack.append((x, True))
            stack.extend((c, False) for c in x[2] if not isinstance(c, int))
            continue
        kind, dist, children = x
        kids = [(c, c) if isinstance(c, int) else done[id(c)] for c in children]
        order = sorted(range(len(kids)), key=lambda i: kids[i][1])
        new_dist = order.index(dist) if dist is not None else None
        built = (kind, new_dist, tuple(kids[i][0] for i in order))
        done[id(x)] = (built, kids[order[0]][1])
    return done[id(node)][0]


def _loads_deep(text: str):
    # the C decoder recurses once per nesting level
    depth = text.count("[") + text.count("{")
    old = sys.getrecursionlimit()
    if depth + 200 > old:
        sys.setrecursionlimit(depth + 200)
    try:
        return json.loads(text)
    finally:
        sys.setrecursionlimit(old)


def _nested_children(x):
    return None if isinstance(x, int) else x[2]


def _post_order(root, children_of, build, leaf):
    """Bottom-up rebuild without recursion; ``children_of`` returns None on leaves."""
    kids0 = children_of(root)
    if kids0 is None:
        return leaf(root)
    results: list = []
    stack = [(root, kids0, 0)]
    frames: list[list] = [[]]
    while stack:
        x, kids, i = stack.pop()
        if i < len(kids):
            stack.append((x, kids, i + 1))
            c = kids[i]
            ck = children_of(c)
            if ck is None:
                frames[-1].append(leaf(c))
            else:
                stack.append((c, ck, 0))
                frames.append([])
        else:
            done = build(x, frames.pop())
            if frames:
                frames[-1].append(done)
            else:
                results.append(done)
    return results[0] if results else frames[0][0]


class DHTree:
    """Rooted reduced clique-star tree with leaves labeled 1..n (root-leaf 0 implicit)."""

    __slots__ = ("root", "_arena")

    def __init__(self, root):
        self.root = canonicalize(root)
        self._arena = None

    # -- (de)serialization ------------------------------------------------

    @classmethod
    def from_json(cls, obj) -> "DHTree":
        if isinstance(obj, str):
            obj = _loads_deep(obj)

        def check(x):
            if isinstance(x, bool):
                raise InvalidTreeError("boolean is not a leaf label")
            if isinstance(x, int):
                return None
            if not isinstance(x, Mapping) or "type" not in x or "children" not in x:
                raise InvalidTreeError(f"malformed node {x!r}")
            kind = x["type"]
            if kind not in KINDS:
                raise InvalidTreeError(f"unknown node type {kind!r}")
            dist = x.get("dist")
            if kind == "SX" and dist is None:
                raise InvalidTreeError("SX node without distinguished child")
            if kind != "SX" and dist is not None:
                raise InvalidTreeError(f"{kind} node cannot have a distinguished child")
            return x["children"]

        return cls(_post_order(obj, check, lambda x, kids: (x["type"], x.get("dist"), tuple(kids)), lambda x: x))

    def to_obj(self):
        def build(x, kids):
            out = {"type": x[0]}
            if x[1] is not None:
                out["dist"] = x[1]
            out["children"] = kids
            return out

        return _post_order(self.root, _nested_children, build, lambda x: x)

    def to_json(self) -> str:
        """Compact JSON, written without recursion so deep trees serialize."""
        if isinstance(self.root, int):
            return str(self.root)
        out: list[str] = []
        stack: list = [self.root]
        while stack:
            x = stack.pop()
            if isinstance(x, str):
                out.append(x)
            elif isinstance(x, int):
                out.append(str(x))
            else:
                kind, dist, kids = x
                out.append(f'{{"type":"{kind}",' + (f'"dist":{dist},' if dist is not None else "") + '"children":[')
                stack.append("]}")
                for i in range(len(kids) - 1, -1, -1):
                    stack.append(kids[i])
                    if i:
                        stack.append(",")
        return "".join(out)

    def __eq__(self, other):
        return isinstance(other, DHTree) and self.root == other.root

    def __hash__(self):
        return hash(self.root)

    def __repr__(self):
        return f"DHTree({self.to_json()})"

    # -- basic queries -------------------------------------------------------

    def leaves(self) -> list[int]:
        out: list[int] = []
        stack = [self.root]
        while stack:
            x = stack.pop()
            if isinstance(x, int):
                out.append(x)
            else:
                stack.extend(x[2])
        return sorted(out)

    @property
    def size(self) -> int:
        return len(self.leaves())

    def internal_nodes(self) -> list[tuple]:
        out = []
        stack = [self.root]
        while stack:
            x = stack.pop()
            if not isinstance(x, int):
                out.append(x)
                stack.extend(x[2])
        return out

    def relabel(self, mapping: Mapping[int, int]) -> "DHTree":
        return DHTree(_post_order(self.root, _nested_children, lambda x, kids: (x[0], x[1], tuple(kids)), mapping.__getitem__))

    @property
    def arena(self) -> "Arena":
        if self._arena is None:
            self._arena = Arena(self.root)
        return self._arena


class Arena:
    """Flat parent/children arrays of a tree; node 0 is the root-leaf."""

    __slots__ = ("kind", "parent", "children", "dist_child", "label", "leaf_node", "depth")

    def __init__(self, root):
        self.kind = ["L"]
        self.parent = [-1]
        self.children: list[list[int]] = [[]]
        self.dist_child = [-1]
        self.label = [0]
        self.depth = [0]
        self.leaf_node = {0: 0}
        stack = [(root, 0)]
        while stack:
            x, par = stack.pop()
            idx = len(self.kind)
            self.parent.append(par)
            self.children.append([])
            self.children[par].append(idx)
            self.depth.append(self.depth[par] + 1)
            self.dist_child.append(-1)
            if isinstance(x, int):
                self.kind.append("L")
                self.label.append(x)
                if x in self.leaf_node:
                    raise InvalidTreeError(f"duplicate leaf label {x}")
                self.leaf_node[x] = idx
            else:
                self.kind.append(x[0])
                self.label.append(-1)
                kids = x[2]
                # children are appended in order as they are popped, so push reversed
                for c in reversed(kids):
                    stack.append((c, idx))
                if x[1] is not None:
                    self.dist_child[idx] = -2 - x[1]  # resolved below
        for v, d in enumerate(self.dist_child):
            if d <= -2:
                self.dist_child[v] = self.children[v][-2 - d]

    @classmethod
    def from_arrays(cls, kind: list[str], parent: list[int], dist_child: list[int], label: list[int] | None = None) -> "Arena":
        """Arena from parent pointers; node 0 must be the root-leaf, parents precede children."""
        a = cls.__new__(cls)
        n = len(kind)
        a.kind = kind = list(kind)
        a.parent = parent = list(parent)
        a.dist_child = list(dist_child)
        a.children = children = [[] for _ in range(n)]
        a.depth = depth = [0] * n
        for v in range(1, n):
            p = parent[v]
            children[p].append(v)
            depth[v] = depth[p] + 1
        leaves = [v for v in range(n) if kind[v] == "L"]
        if label is None:
            label = [-1] * n
            for i, v in enumerate(leaves):
                label[v] = i
        a.label = list(label)
        a.leaf_node = {a.label[v]: v for v in leaves}
        return a

    def to_nested(self):
        """Nested tree form below the root-leaf (children in arena order)."""
        built: dict[int, object] = {}
        for v in range(len(self.kind) - 1, 0, -1):
            if self.kind[v] == "L":
                built[v] = self.label[v]
            else:
                kids = self.children[v]
                dist = kids.index(self.dist_child[v]) if self.kind[v] == "SX" else None
                built[v] = (self.kind[v], dist, tuple(built.pop(c) for c in kids))
        return built[self.children[0][0]]

    def __len__(self):
        return len(self.kind)

    def neighbors(self, v: int) -> list[int]:
        p = self.parent[v]
        return ([p] if p >= 0 else []) + self.children[v]

    def is_jump(self, v: int, a: int, b: int) -> bool:
        """Whether a path entering internal node v from neighbor a and leaving to b jumps."""
        kind = self.kind[v]
        if kind == "K":
            return False
        p = self.parent[v]
        if kind == "SC":
            return a != p and b != p
        d = self.dist_child[v]
        return a != d and b != d

    def path(self, x: int, y: int) -> list[int]:
        """Node indices of the tree path from x to y."""
        up, down = [x], [y]
        a, b = x, y
        while self.depth[a] > self.depth[b]:
            a = self.parent[a]
            up.append(a)
        while self.depth[b] > self.depth[a]:
            b = self.parent[b]
            down.append(b)
        while a != b:
            a = self.parent[a]
            b = self.parent[b]
            up.append(a)
            down.append(b)
        return up + down[-2::-1]

    def path_jumps(self, path: list[int]) -> int:
        return sum(self.is_jump(path[i], path[i - 1], path[i + 1]) for i in range(1, len(path) - 1))


# -- validation -------------------------------------------------------------


def rooted_violations(t: DHTree) -> list[str]:
    """Violations of the rooted reducedness conditions."""
    out: list[str] = []
    labels = []
    stack = [t.root]
    while stack:
        x = stack.pop()
        if isinstance(x, int):
            labels.append(x)
            continue
        kind, dist, kids = x
        if kind not in KINDS:
            out.append(f"unknown kind {kind}")
            continue
        if len(kids) < 2:
            out.append(f"{kind} node with fewer than 2 children")
        kid_kinds = ["L" if isinstance(c, int) else c[0] for c in kids]
        if kind == "K" and "K" in kid_kinds:
            out.append("K node with a K child")
        if kind == "SC" and "SC" in kid_kinds:
            out.append("SC node with an SC child")
        if kind == "SX":
            if dist is None or not 0 <= dist < len(kids):
                out.append("SX node without a valid distinguished child")
            else:
                if kid_kinds[dist] == "SX":
                    out.append("SX node whose distinguished child is SX")
                if any(k == "SC" for i, k in enumerate(kid_kinds) if i != dist):
                    out.append("SX node with a non-distinguished SC child")
        elif dist is not None:
            out.append(f"{kind} node with a distinguished child")
        stack.extend(kids)
    if any(l <= 0 for l in labels):
        out.append("leaf labels must be positive")
    if len(set(labels)) != len(labels):
        out.append("duplicate leaf labels")
    return out


def _marker(arena: Arena, v: int, towards: int) -> str:
    """Marker of internal node v on the edge to neighbor ``towards``: clique, center or extremity."""
    kind = arena.kind[v]
    if kind == "K":
        return "clique"
    if kind == "SC":
        return "center" if towards == arena.parent[v] else "extremity"
    return "center" if towards == arena.dist_child[v] else "extremity"


def unrooted_violations(t: DHTree) -> list[str]:
    """Violations of reducedness stated on the unrooted decorated tree."""
    if isinstance(t.root, int):
        return []
    a = t.arena
    out = []
    for v in range(1, len(a)):
        if a.kind[v] == "L":
            continue
        if len(a.neighbors(v)) < 3:
            out.append("internal node of degree < 3")
        p = a.parent[v]
        if a.kind[p] == "L":
            continue
        mv, mp = _marker(a, v, p), _marker(a, p, v)
        if mv == mp == "clique":
            out.append("two adjacent clique nodes")
        if {mv, mp} == {"center", "extremity"}:
            out.append("star center joined to star extremity")
    return out


def validate_reduced(t: DHTree) -> None:
    problems = rooted_violations(t)
    if problems:
        raise InvalidTreeError("; ".join(sorted(set(problems))))


# -- graphs ---------------------------------------------------------------


class Graph:
    """Simple undirected graph on vertices 0..n-1."""

    __slots__ = ("n", "adj")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        self.n = n
        adj: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v or not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"bad edge {(u, v)}")
            adj[u].add(v)
            adj[v].add(u)
        self.adj = tuple(frozenset(s) for s in adj)

    def edges(self) -> list[tuple[int, int]]:
        return sorted((u, v) for u in range(self.n) for v in self.adj[u] if u < v)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adj[u]

    def __eq__(self, other):
        return isinstance(other, Graph) and self.n == other.n and self.adj == other.adj

    def __hash__(self):
        return hash((self.n, self.adj))

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.edges()})"

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "edges": [list(e) for e in self.edges()]}, separators=(",", ":"))

    @classmethod
    def from_json(cls, obj) -> "Graph":
        if isinstance(obj, str):
            obj = _loads_deep(obj)
        return cls(int(obj["n"]), [tuple(e) for e in obj["edges"]])

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges())
        return g

    @classmethod
    def from_networkx(cls, g: nx.Graph) -> "Graph":
        nodes = sorted(g.nodes)
        index = {v: i for i, v in enumerate(nodes)}
        return cls(len(nodes), [(index[u], index[v]) for u, v in g.edges])

    def bfs(self, src: int) -> list[int]:
        dist = [-1] * self.n
        dist[src] = 0
        q = deque([src])
        while q:
            x = q.popleft()
            for y in self.adj[x]:
                if dist[y] < 0:
                    dist[y] = dist[x] + 1
                    q.append(y)
        return dist

    def is_connected(self) -> bool:
        return self.n <= 1 or min(self.bfs(0)) >= 0

    def induced(self, vertices: Iterable[int]) -> "Graph":
        vs = sorted(vertices)
        index = {v: i for i, v in enumerate(vs)}
        return Graph(len(vs), [(index[u], index[v]) for u in vs for v in self.adj[u] if v in index and u < v])


def gr(t: DHTree) -> Graph:
    """Accessibility graph: leaves (and the root-leaf) joined when their path has no jump."""
    validate_reduced(t)
    labels = t.leaves()
    n = len(labels)
    if labels != list(range(1, n + 1)):
        raise InvalidTreeError("leaf labels must be exactly 1..n")
    if isinstance(t.root, int):
        return Graph(2, [(0, 1)])
    a = t.arena
    edges = []
    for src_label in range(n + 1):
        src = a.leaf_node[src_label]
        start = a.parent[src] if src != 0 else a.children[0][0]
        stack = [(start, src)]
        while stack:
            v, came = stack.pop()
            if a.kind[v] == "L":
                if a.label[v] > src_label:
                    edges.append((src_label, a.label[v]))
                continue
            for w in a.neighbors(v):
                if w != came and not a.is_jump(v, came, w):
                    stack.append((w, v))
    return Graph(n + 1, edges)


def jumps(t: DHTree, l1: int, l2: int) -> int:
    a = t.arena
    if l1 == l2:
        raise ValueError("jumps between a leaf and itself")
    return a.path_jumps(a.path(a.leaf_node[l1], a.leaf_node[l2]))


def distance(obj, v: int, w: int) -> int:
    """Graph distance; trees use jumps + 1, graphs use breadth-first search."""
    if v == w:
        return 0
    if isinstance(obj, DHTree):
        return jumps(obj, v, w) + 1
    d = obj.bfs(v)[w]
    if d < 0:
        raise ValueError("vertices are not connected")
    return d


# -- recognition ------------------------------------------------------------

_HOUSE = nx.Graph([(0, 1), (1, 2), (2, 3), (3, 0), (2, 4), (3, 4)])
_GEM = nx.Graph([(0, 1), (1, 2), (2, 3), (4, 0), (4, 1), (4, 2), (4, 3)])
_DOMINO = nx.Graph([(0, 1), (1, 2), (3, 4), (4, 5), (0, 3), (1, 4), (2, 5)])


def _elimination(g: Graph):
    """Pendant/twin pruning sequence, lowest eligible label first.

    Yields ``(u, v, op)`` meaning u was removed as ``op`` ("pendant", "true", "false")
    relative to v. Raises NotDistanceHereditaryError when stuck.
    """
    alive = set(range(g.n))
    adj = {v: set(g.adj[v]) for v in alive}
    steps = []
    while len(alive) > 2:
        groups_open: dict[frozenset, list[int]] = {}
        groups_closed: dict[frozenset, list[int]] = {}
        for v in alive:
            groups_open.setdefault(frozenset(adj[v]), []).append(v)
            groups_closed.setdefault(frozenset(adj[v] | {v}), []).append(v)
        choice = None
        for u in sorted(alive):
            if len(adj[u]) == 1:
                choice = (u, next(iter(adj[u])), "pendant")
                break
            twins = [v for v in groups_closed[frozenset(adj[u] | {u})] if v != u]
            if twins:
                choice = (u, min(twins), "true")
                break
            twins = [v for v in groups_open[frozenset(adj[u])] if v != u]
            if twins:
                choice = (u, min(twins), "false")
                break
        if choice is None:
            raise NotDistanceHereditaryError("no pendant vertex or twin left")
        u = choice[0]
        for w in adj[u]:
            adj[w].discard(u)
        del adj[u]
        alive.discard(u)
        steps.append(choice)
    return steps, sorted(alive)


def is_dh(g: Graph) -> bool:
    """Distance-hereditary test by pendant/twin pruning (connected graphs only)."""
    if g.n == 0 or not g.is_connected():
        return False
    try:
        _elimination(g)
    except NotDistanceHereditaryError:
        return False
    return True


def forbidden_subgraph(g: Graph, max_hole: int | None = None):
    """Exhaustively find an induced house, gem, domino or hole (cycle of length >= 5).

    Exponential; intended as an oracle for small graphs. Returns a sorted vertex
    tuple or None.
    """
    ng = g.to_networkx()
    for pattern in (_HOUSE, _GEM, _DOMINO):
        gm = nx.algorithms.isomorphism.GraphMatcher(ng, pattern)
        for mapping in gm.subgraph_isomorphisms_iter():
            return tuple(sorted(mapping))
    top = g.n if max_hole is None else max_hole
    for size in range(5, top + 1):
        for vs in itertools.combinations(range(g.n), size):
            h = g.induced(vs)
            if all(len(a) == 2 for a in h.adj) and h.is_connected():
                return vs
    return None


def is_dh_definitional(g: Graph) -> bool:
    """Every connected induced subgraph preserves distances (small graphs only)."""
    if g.n > 10:
        raise ValueError("definitional test is exponential; use at most 10 vertices")
    if not g.is_connected():
        return False
    full = [g.bfs(v) for v in range(g.n)]
    for mask in range(1, 1 << g.n):
        vs = [v for v in range(g.n) if mask >> v & 1]
        if len(vs) < 3:
            continue
        h = g.induced(vs)
        if not h.is_connected():
            continue
        for i, v in enumerate(vs):
            dh = h.bfs(i)
            for j, w in enumerate(vs):
                if dh[j] != full[v][w]:
                    return False
    return True


# -- decomposition ----------------------------------------------------------


class _SplitTree:
    """Unrooted clique-star tree under construction. Leaves are graph vertices."""

    def __init__(self, a: int, b: int):
        self.kind: dict[int, str] = {a: "leaf", b: "leaf"}
        self.adj: dict[int, set[int]] = {a: {b}, b: {a}}
        self.center: dict[int, int] = {}
        self.next_id = -1

    def _new(self, kind: str) -> int:
        x = self.next_id
        self.next_id -= 1
        self.kind[x] = kind
        self.adj[x] = set()
        return x

    def insert(self, u: int, v: int, op: str) -> None:
        (p,) = self.adj[v]
        node = self._new("K" if op == "true" else "S")
        self.adj[p].discard(v)
        self.adj[v] = {node}
        self.adj[p].add(node)
        self.adj[node] = {p, v, u}
        if self.center.get(p) == v:
            self.center[p] = node  # the edge p-v now ends at node
        self.kind[u] = "leaf"
        self.adj[u] = {node}
        if op == "false":
            self.center[node] = p
        elif op == "pendant":
            self.center[node] = v

    def _merge(self, keep: int, gone: int) -> None:
        for w in self.adj[gone]:
            if w == keep:
                continue
            self.adj[w].discard(gone)
            self.adj[w].add(keep)
            self.adj[keep].add(w)
            if self.center.get(w) == gone:
                self.center[w] = keep
        self.adj[keep].discard(gone)
        del self.adj[gone], self.kind[gone]
        self.center.pop(gone, None)

    def normalize(self) -> None:
        changed = True
        while changed:
            changed = False
            for x in list(self.kind):
                if x not in self.kind or self.kind[x] == "leaf":
                    continue
                for y in list(self.adj[x]):
                    kx, ky = self.kind[x], self.kind[y]
                    if kx == ky == "K":
                        self._merge(x, y)
                        changed = True
                        break
                    if kx == ky == "S" and self.center[x] == y and self.center[y] != x:
                        # x's center faces an extremity of y: absorb x into y
                        self._merge(y, x)
                        changed = True
                        break
                if changed:
                    break

    def rooted(self, root_leaf: int = 0):
        (top,) = self.adj[root_leaf]
        built: dict[int, object] = {}
        stack = [(top, root_leaf, False)]
        while stack:
            x, parent, ready = stack.pop()
            if self.kind[x] == "leaf":
                built[x] = x
                continue
            kids = sorted(w for w in self.adj[x] if w != parent)
            if not ready:
                stack.append((x, parent, True))
                stack.extend((w, x, False) for w in kids)
                continue
            sub = tuple(built[w] for w in kids)
            if self.kind[x] == "K":
                built[x] = ("K", None, sub)
            elif self.center[x] == parent:
                built[x] = ("SC", None, sub)
            else:
                built[x] = ("SX", kids.index(self.center[x]), sub)
        return built[top]


def decompose(g: Graph) -> DHTree:
    """Reduced clique-star tree of a connected distance-hereditary graph, rooted at vertex 0."""
    if g.n < 2:
        raise ValueError("need at least two vertices")
    if not g.is_connected():
        raise NotDistanceHereditaryError("graph is not connected")
    steps, (a, b) = _elimination(g)
    tree = _SplitTree(a, b)
    for u, v, op in reversed(steps):
        tree.insert(u, v, op)
    tree.normalize()
    return DHTree(tree.rooted(0))


# -- subclasses -------------------------------------------------------------


def is_2connected(t: DHTree) -> bool:
    """No leaf, root-leaf included, sits at the center of a star."""
    if isinstance(t.root, int):
        return True
    if t.root[0] == "SC":
        return False
    for kind, dist, kids in t.internal_nodes():
        if kind == "SX" and isinstance(kids[dist], int):
            return False
    return True


def is_3leaf(t: DHTree) -> bool:
    """Star nodes span a connected subtree and no tree edge joins two star centers."""
    if isinstance(t.root, int):
        return True
    a = t.arena
    stars = [v for v in range(len(a)) if a.kind[v] in ("SC", "SX")]
    star_set = set(stars)
    for v in stars:
        p = a.parent[v]
        if p in star_set and a.kind[v] == "SC" and a.dist_child[p] == v:
            return False
    if not stars:
        return True
    tops = [v for v in stars if a.parent[v] not in star_set]
    return len(tops) == 1


def classify(t: DHTree) -> dict[str, bool]:
    return {"is_2connected": is_2connected(t), "is_3leaf": is_3leaf(t)}


def leaf_power(tree, k: int) -> tuple[Graph, list]:
    """k-leaf power of a tree (networkx graph or adjacency mapping).

    Returns the graph on the tree's leaves, relabeled 0..L-1 in sorted order,
    and the list mapping new labels back to tree vertices.
    """
    if not isinstance(tree, nx.Graph):
        tree = nx.Graph(tree)
    if not nx.is_tree(tree):
        raise ValueError("input is not a tree")
    leaves = sorted(v for v in tree.nodes if tree.degree(v) == 1)
    index = {v: i for i, v in enumerate(leaves)}
    edges = []
    for v in leaves:
        for w, d in nx.single_source_shortest_path_length(tree, v, cutoff=k).items():
            if w in index and index[w] > index[v] and d <= k:
                edges.append((index[v], index[w]))
    return Graph(len(leaves), edges), leaves


def is_3leaf_power_by_cliques(g: Graph) -> bool:
    """Graph-side test: merging true twins (critical cliques) leaves a tree."""
    if not g.is_connected():
        return False
    classes: dict[frozenset, int] = {}
    rep = []
    for v in range(g.n):
        key = frozenset(g.adj[v] | {v})
        if key not in classes:
            classes[key] = len(classes)
            rep.append(v)
    cls_of = [classes[frozenset(g.adj[v] | {v})] for v in range(g.n)]
    q = Graph(len(rep), {(min(cls_of[u], cls_of[v]), max(cls_of[u], cls_of[v])) for u, v in g.edges() if cls_of[u] != cls_of[v]})
    return q.is_connected() and len(q.edges()) == q.n - 1
