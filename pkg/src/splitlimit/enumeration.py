"""Exact enumeration of the three tree families and the marked-leaf identities.

Families:

``dh``
    all reduced clique-star trees (distance-hereditary graphs);
``dh2c``
    trees of 2-connected distance-hereditary graphs (no leaf at a star center);
``leaf3``
    trees of 3-leaf powers.

Sizes count non-root leaves, so a tree of size n encodes a graph on n + 1
vertices. Marked leaves are never counted in the size.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from . import crt
from .series import (
    ExpGe,
    Known,
    SpecSystem,
    Tag,
    TruncatedSeries,
    UAtom,
    Var,
    ZAtom,
    binomial_row,
    exp_ge,
    solve_fixpoint,
    solve_system,
)
from .treecodec import DHTree, is_2connected, is_3leaf

FAMILIES = ("dh", "dh2c", "leaf3")
TYPES = ("K", "SX", "SC")


class IdentityMismatch(AssertionError):
    pass


def check_family(f: str) -> str:
    if f not in FAMILIES:
        raise ValueError(f"unknown family {f!r}; expected one of {', '.join(FAMILIES)}")
    return f


# -- specifications ------------------------------------------------------------


def specification(f: str) -> tuple[SpecSystem, str]:
    """Tagged specification of a family and the name of its total class."""
    check_family(f)
    z = ZAtom
    if f in ("dh", "dh2c"):
        K, C, X = Var("K"), Var("SC"), Var("SX")
        center = (K + C) if f == "dh2c" else (z + K + C)
        eqs = {
            "K": Tag("K", ExpGe(z + C + X, 2)),
            "SC": Tag("SC", ExpGe(z + K + X, 2)),
            "SX": Tag("SX", center * ExpGe(z + K + X, 1)),
        }
        eqs["D"] = (K + X) if f == "dh2c" else (K + C + X)
        return SpecSystem(eqs), "D"
    L, X, C, K = Var("L"), Var("SX"), Var("SC"), Var("K")
    eqs = {
        "L": z + Tag("K", ExpGe(z, 2)),
        "SX": Tag("SX", L * ExpGe(L + X, 1)),
        "SC": Tag("SC", ExpGe(L + X, 2)),
        "K": L + Tag("Kstar", (X + C) * ExpGe(z, 1)),
    }
    eqs["D"] = X + C + K
    return SpecSystem(eqs), "D"


@lru_cache(maxsize=32)
def family_series(f: str, order: int) -> dict[str, TruncatedSeries]:
    system, _ = specification(f)
    return solve_fixpoint(system, order)


def count_trees(f: str, n: int) -> int:
    """Number of family trees with n labeled non-root leaves."""
    check_family(f)
    if n < 1:
        raise ValueError("size must be at least 1")
    return int(family_series(f, n)["D"].labeled(n))


def count_graphs(f: str, m: int) -> int:
    """Number of labeled family graphs on m >= 3 vertices."""
    if m < 3:
        raise ValueError("graph counts are defined for at least 3 vertices")
    return count_trees(f, m - 1)


def counts_csv(f: str, max_n: int) -> str:
    check_family(f)
    series = family_series(f, max_n)["D"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["family", "n", "tree_count", "graph_count"])
    for n in range(1, max_n + 1):
        t = int(series.labeled(n))
        g = int(series.labeled(n - 1)) if n - 1 >= 2 else ""
        w.writerow([f, n, t, g])
    return buf.getvalue()


def F_series(f: str, order: int) -> TruncatedSeries:
    """exp_{>=1}(z + D_K + D_SX) for the dh families."""
    if f not in ("dh", "dh2c"):
        raise ValueError("F is defined for the dh families only")
    s = family_series(f, order)
    return exp_ge(TruncatedSeries.z(order) + s["K"] + s["SX"], 1)


def ESX_series(order: int) -> TruncatedSeries:
    return family_series("leaf3", order)["SX"]


# -- labeled brute force ---------------------------------------------------------


def _set_partitions(items: tuple):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        yield [(first,)] + part
        for i in range(len(part)):
            yield part[:i] + [(first,) + part[i]] + part[i + 1 :]


_CHILD_KINDS = {
    "K": ("L", "SC", "SX"),
    "SC": ("L", "K", "SX"),
    "SX_dist": ("L", "K", "SC"),
    "SX_other": ("L", "K", "SX"),
}


def _brute(labels: tuple, kind: str, memo: dict) -> list:
    key = (labels, kind)
    if key in memo:
        return memo[key]
    out: list = []
    if kind == "L":
        if len(labels) == 1:
            out = [labels[0]]
    elif len(labels) >= 2:
        for part in _set_partitions(labels):
            if len(part) < 2:
                continue
            part = sorted(part)
            if kind in ("K", "SC"):
                opts = [_options(b, _CHILD_KINDS[kind], memo) for b in part]
                out.extend((kind, None, kids) for kids in itertools.product(*opts))
            else:
                for d in range(len(part)):
                    opts = [
                        _options(b, _CHILD_KINDS["SX_dist" if i == d else "SX_other"], memo)
                        for i, b in enumerate(part)
                    ]
                    out.extend(("SX", d, kids) for kids in itertools.product(*opts))
    memo[key] = out
    return out


def _options(labels: tuple, kinds: tuple, memo: dict) -> list:
    out: list = []
    for k in kinds:
        out.extend(_brute(labels, k, memo))
    return out


def iter_brute_force_roots(n: int):
    """Nested canonical roots of every reduced tree on leaves 1..n (no filtering)."""
    memo: dict = {}
    labels = tuple(range(1, n + 1))
    for kind in TYPES:
        yield from _brute(labels, kind, memo)


def in_family(f: str, t: DHTree) -> bool:
    if f == "dh":
        return True
    if f == "dh2c":
        return is_2connected(t)
    return is_3leaf(t)


def brute_force_trees(f: str, n: int) -> set[DHTree]:
    """Every family tree of size n, by exhaustive generation (n <= 7)."""
    check_family(f)
    if n > 7:
        raise ValueError("brute force is limited to n <= 7")
    if n < 1:
        raise ValueError("size must be at least 1")
    if n == 1:
        # a lone leaf under the root-leaf; only the 3-leaf grammar admits it
        return {DHTree(1)} if f == "leaf3" else set()
    out = set()
    for root in iter_brute_force_roots(n):
        t = DHTree(root)
        if in_family(f, t):
            out.add(t)
    return out


# -- marked-leaf series ------------------------------------------------------------


def marked_series(f: str, order: int) -> dict[tuple[str, str], TruncatedSeries]:
    """Bivariate series of trees with one marked leaf, solved from their systems.

    Keys are ``(root type, marked-leaf cotype)``; u marks jumps on the path from
    the marked leaf to the root-leaf. For ``leaf3`` the keys are ``("SX", "SX")``
    and ``("SX", "*")``.
    """
    check_family(f)
    z = ZAtom
    u = UAtom
    base = family_series(f, order)
    if f == "leaf3":
        L = Known(base["L"], "L")
        X = Known(base["SX"], "E_SX")
        Lmark = Known(exp_ge(TruncatedSeries.z(order), 0), "exp(z)")
        XX, Xb = Var("SX^SX"), Var("SX^*")
        system = SpecSystem(
            {
                "SX^SX": u * (1 + XX) * L * ExpGe(L + X, 0),
                "SX^*": Lmark * ExpGe(L + X, 1) + u * (Lmark + Xb) * L * ExpGe(L + X, 0),
            },
            bivariate=True,
        )
        sol = solve_fixpoint(system, order)
        return {("SX", "SX"): sol["SX^SX"], ("SX", "*"): sol["SX^*"]}
    K, C, X = Known(base["K"], "D_K"), Known(base["SC"], "D_SC"), Known(base["SX"], "D_SX")
    center = (K + C) if f == "dh2c" else (z + K + C)
    eqs = {}
    for b in TYPES:
        v = {a: Var(f"{a}^{b}") for a in TYPES}

        def leaf(cotype):
            return 1 if b == cotype else 0

        eqs[f"K^{b}"] = (leaf("K") + v["SC"] + v["SX"]) * ExpGe(C + X + z, 1)
        eqs[f"SC^{b}"] = (leaf("SX") + v["K"] + v["SX"]) * ExpGe(X + K + z, 1)
        eqs[f"SX^{b}"] = (leaf("SC") + v["K"] + v["SC"]) * ExpGe(X + K + z, 1) + u * (
            leaf("SX") + v["K"] + v["SX"]
        ) * center * ExpGe(X + K + z, 0)
    sol = solve_fixpoint(SpecSystem(eqs, bivariate=True), order)
    return {(a, b): sol[f"{a}^{b}"] for a in TYPES for b in TYPES}


def closed_forms(f: str, order: int, *, printed_sign: bool = False) -> dict[tuple[str, str], TruncatedSeries]:
    """Rational expressions in F (or P for leaf3) for the marked-leaf series.

    With ``printed_sign`` the 2-connected K/K series uses a minus sign in front
    of its second term instead of a plus.
    """
    check_family(f)
    zz = TruncatedSeries.z(order, True)
    uu = TruncatedSeries.u(order)
    one = TruncatedSeries.constant(1, order, True)
    if f == "leaf3":
        ez = exp_ge(TruncatedSeries.z(order), 0)
        E = ESX_series(order)
        inner = exp_ge(ez - 1 + E, 0)
        P = ((ez - 1) * inner).lift()
        R = (one - uu * P).reciprocal()
        return {
            ("SX", "SX"): -one + R,
            ("SX", "*"): -ez.lift() + (ez * inner).lift() * R,
        }
    F = F_series(f, order).lift()
    G = (F - zz) if f == "dh2c" else F
    den = (one + F) * (one - 2 * F) - uu * G
    inv = den.reciprocal()
    inv1 = (one + F).reciprocal()
    kk_sign = -1 if (printed_sign and f == "dh2c") else 1
    out = {
        ("K", "K"): F * inv1 + kk_sign * F * F * inv,
        ("SX", "SX"): -inv1 + (one - F) * (one - F) * inv,
        ("SC", "SC"): F * F * inv,
        ("K", "SX"): -F * inv1 + F * (one - F) * inv,
        ("K", "SC"): F * F * inv,
        ("SX", "SC"): F * (one - F) * inv,
    }
    out[("SX", "K")] = out[("K", "SX")]
    out[("SC", "K")] = out[("K", "SC")]
    out[("SC", "SX")] = out[("SX", "SC")]
    return out


def H_series(f: str, order: int) -> TruncatedSeries:
    """The series counting one more jump (equal to 1 at the singularity)."""
    if f == "leaf3":
        ez = exp_ge(TruncatedSeries.z(order), 0)
        return (ez - 1) * exp_ge(ez - 1 + ESX_series(order), 0)
    F = F_series(f, order)
    one = TruncatedSeries.constant(1, order)
    num = F - TruncatedSeries.z(order) if f == "dh2c" else F
    return num * ((one + F) * (one - 2 * F)).reciprocal()


def J_series(f: str, a: str, b: str, c: str, order: int) -> TruncatedSeries:
    """Generating series of the essential-vertex pieces."""
    if f not in ("dh", "dh2c"):
        raise ValueError("J is defined for the dh families")
    F = F_series(f, order)
    one = TruncatedSeries.constant(1, order)
    in_A = a != "SX" and b != "SC" and c != "SC"
    in_B = b != "SX" and a != "SC" and c != "SC"
    in_C = c != "SX" and a != "SC" and b != "SC"
    mult = int(in_A) + int(in_B) + int(in_C) + int("K" not in (a, b, c))
    last = (F - TruncatedSeries.z(order)) if f == "dh2c" else F
    return mult * (one + F) + (last if "SC" not in (a, b, c) else TruncatedSeries.zero(order))


def J_brute_force(f: str, a: str, b: str, c: str, n: int) -> int:
    """Trees whose root holds two marked leaves and n other leaves, counted directly.

    Kept are those on which a subtree of type b (resp. c) can be glued at the
    first (resp. second) marked leaf and which can themselves be glued at a
    marked leaf of cotype a, all without breaking reducedness.
    """
    memo: dict = {}
    m1, m2 = n + 1, n + 2
    allowed = {
        "K": lambda t: t != "K",
        "SC": lambda t: t != "SC",
        "SX_dist": lambda t: t != "SX",
        "SX_other": lambda t: t != "SC",
    }
    # the gluing slot above forbids one root type: a clique slot forbids a
    # clique, an extremity slot forbids a center-up star, a center slot an extremity-up star
    forbidden_root = {"K": "K", "SX": "SC", "SC": "SX"}[a]
    total = 0
    for part in _set_partitions(tuple(range(1, n + 1))):
        blocks = sorted(part) + [(m1,), (m2,)]
        for root in TYPES:
            if root == forbidden_root:
                continue
            dists = range(len(blocks)) if root == "SX" else [None]
            for d in dists:
                roles = [
                    root if root != "SX" else ("SX_dist" if i == d else "SX_other") for i in range(len(blocks))
                ]
                if not (allowed[roles[-2]](b) and allowed[roles[-1]](c)):
                    continue
                ways = 1
                for i, blk in enumerate(blocks[:-2]):
                    opts = _options(blk, _CHILD_KINDS[roles[i]], memo)
                    if f == "dh2c" and roles[i] == "SX_dist":
                        opts = [o for o in opts if not isinstance(o, int)]
                    if f == "dh2c":
                        opts = [o for o in opts if isinstance(o, int) or is_2connected_subtree(o)]
                    ways *= len(opts)
                    if not ways:
                        break
                total += ways
    return total


def is_2connected_subtree(node) -> bool:
    """No leaf at the center of a star anywhere inside a nested subtree."""
    stack = [node]
    while stack:
        x = stack.pop()
        if isinstance(x, int):
            continue
        kind, dist, kids = x
        if kind == "SX" and isinstance(kids[dist], int):
            return False
        stack.extend(kids)
    return True


# -- sparse multivariate series for the induced-subtree identities ---------------


Sparse = dict  # {(n, exps): labeled coefficient}


def _sparse_from_bivariate(s: TruncatedSeries, slot: int, nslots: int) -> Sparse:
    out: Sparse = {}
    for n in range(s.order + 1):
        for j, c in enumerate(s.labeled(n)):
            if c:
                e = [0] * nslots
                e[slot] = j
                out[(n, tuple(e))] = c
    return out


def _sparse_from_univariate(s: TruncatedSeries, nslots: int) -> Sparse:
    zero = (0,) * nslots
    return {(n, zero): s.labeled(n) for n in range(s.order + 1) if s.labeled(n)}


def _sparse_mul(a: Sparse, b: Sparse, order: int) -> Sparse:
    out: Sparse = defaultdict(int)
    for (n1, e1), c1 in a.items():
        for (n2, e2), c2 in b.items():
            n = n1 + n2
            if n > order:
                continue
            out[(n, tuple(x + y for x, y in zip(e1, e2)))] += binomial_row(n)[n1] * c1 * c2
    return {k: v for k, v in out.items() if v}


def _sparse_add(a: Sparse, b: Sparse) -> Sparse:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + v
    return {k: v for k, v in out.items() if v}


def induced_series(f: str, shape, order: int) -> Sparse:
    """Series of marked trees inducing ``shape`` from the piecewise decomposition."""
    check_family(f)
    layout = crt.edge_layout(shape)
    k, m = layout.k, layout.n_edges
    children_of = {e: (s, g) for e, s, g in layout.branches}
    if f == "leaf3":
        marked = marked_series("leaf3", order)
        ez = exp_ge(TruncatedSeries.z(order), 0)
        L = family_series("leaf3", order)["L"]
        I = L * exp_ge(ESX_series(order) + L, 0)
        acc = _sparse_from_univariate(I ** (k - 1), m)
        for i in range(m):
            piece = marked[("SX", "*")] if i <= k else marked[("SX", "SX")]
            acc = _sparse_mul(acc, _sparse_from_bivariate(piece, i, m), order)
        return acc
    marked = marked_series(f, order)
    allowed_root = ("K", "SX") if f == "dh2c" else TYPES
    allowed_leaf = ("K", "SX") if f == "dh2c" else TYPES

    def piece(i, tp, ct):
        tps = allowed_root if tp == "*" else (tp,)
        cts = allowed_leaf if ct == "*" else (ct,)
        s = None
        for a in tps:
            for b in cts:
                s = marked[(a, b)] if s is None else s + marked[(a, b)]
        return _sparse_from_bivariate(s, i, m)

    internal = [e for e in range(m) if e in children_of]
    total: Sparse = {}
    free_tp = list(range(1, m))
    for tps in itertools.product(TYPES, repeat=len(free_tp)):
        tp = {0: "*", **dict(zip(free_tp, tps))}
        for cts in itertools.product(TYPES, repeat=len(internal)):
            ct = {i: "*" for i in range(m)}
            ct.update(zip(internal, cts))
            term = {(0, (0,) * m): 1}
            for e in internal:
                s, g = children_of[e]
                J = J_series(f, ct[e], tp[s], tp[g], order)
                if all(J.labeled(n) == 0 for n in range(order + 1)):
                    term = {}
                    break
                term = _sparse_mul(term, _sparse_from_univariate(J, m), order)
            if not term:
                continue
            for i in range(m):
                term = _sparse_mul(term, piece(i, tp[i], ct[i]), order)
                if not term:
                    break
            total = _sparse_add(total, term)
    return total


# -- brute force over marked trees (unlabeled anonymous leaves) -------------------


@dataclass(frozen=True)
class _Shape:
    key: str
    struct: object  # 0 anonymous leaf, m >= 1 marked leaf, or (kind, dist_shape|None, others)
    aut: int
    size: int  # anonymous leaves


def _node_shape(kind: str, dist: "_Shape | None", others: list["_Shape"]) -> _Shape:
    others = sorted(others, key=lambda s: s.key)
    aut = math.prod(s.aut for s in others) * (dist.aut if dist else 1)
    for _, grp in itertools.groupby(others, key=lambda s: s.key):
        g = list(grp)
        if g[0].struct != 0 and not _is_anonymous(g[0]):
            continue
        aut *= math.factorial(len(g))
    head = kind + ("<" + dist.key + ">" if dist else "")
    key = head + "[" + ",".join(s.key for s in others) + "]"
    size = sum(s.size for s in others) + (dist.size if dist else 0)
    return _Shape(key, (kind, dist, tuple(others)), aut, size)


def _is_anonymous(s: _Shape) -> bool:
    return "m" not in s.key


class MarkedShapeEnumerator:
    """Rooted trees whose unmarked leaves are unlabeled, weighted by automorphisms.

    Labeled trees with n unmarked leaves correspond to a shape with weight
    n! / aut. With ``prune`` the enumeration keeps only trees in which no two
    essential vertices are adjacent and every branching vertex has exactly two
    marked directions.
    """

    def __init__(self, prune: bool = True, leaf3: bool = False):
        self.prune = prune
        self.leaf3 = leaf3
        self._memo: dict = {}

    def _kinds(self, role: str, top: bool = False) -> tuple:
        # leaf3 mode drops children that can never occur in a 3-leaf power tree:
        # a clique below the root holds only leaves, a center never holds a star
        if self.leaf3:
            if role == "K" and not top:
                return ("L",)
            if role == "SX_dist":
                return ("L", "K")
        return _CHILD_KINDS[role]

    def anonymous(self, n: int, kind: str) -> list[_Shape]:
        return self.shapes(n, (), kind, False)

    def shapes(self, n: int, marks: tuple, kind: str, parent_essential: bool, top: bool = False) -> list[_Shape]:
        key = (n, marks, kind, parent_essential if self.prune else False, top and kind == "K")
        if key in self._memo:
            return self._memo[key]
        out = self._build(n, marks, kind, parent_essential, top)
        self._memo[key] = out
        return out

    def _child_options(self, n: int, marks: tuple, kinds: tuple, pe: bool) -> list[_Shape]:
        out = []
        for kd in kinds:
            out.extend(self.shapes(n, marks, kd, pe))
        return out

    def _anon_multisets(self, m: int, kinds: tuple, min_count: int):
        """Multisets of anonymous subtrees of the given kinds with m leaves in total."""
        cands = []
        top = m - 1 if min_count >= 2 else m
        for size in range(1, top + 1):
            cands.extend(self._child_options(size, (), kinds, False))
        cands.sort(key=lambda s: s.key)

        def rec(start: int, remaining: int, chosen: list):
            if remaining == 0:
                if len(chosen) >= min_count:
                    yield list(chosen)
                return
            for i in range(start, len(cands)):
                c = cands[i]
                if c.size <= remaining:
                    chosen.append(c)
                    yield from rec(i, remaining - c.size, chosen)
                    chosen.pop()

        yield from rec(0, m, [])

    def _build(self, n: int, marks: tuple, kind: str, pe: bool, top: bool = False) -> list[_Shape]:
        if kind == "L":
            if n == 1 and not marks:
                return [_Shape("o", 0, 1, 1)]
            if n == 0 and len(marks) == 1:
                if self.prune and pe:
                    return []
                return [_Shape(f"m{marks[0]}", marks[0], 1, 0)]
            return []
        if n + len(marks) < 2:
            return []
        out: list[_Shape] = []
        blocks_list = list(_set_partitions(marks)) if marks else [[]]
        for blocks in blocks_list:
            blocks = sorted(blocks)
            r = len(blocks)
            essential = r >= 2
            if self.prune and (r > 2 or (essential and pe)):
                continue
            for sizes in _compositions_bounded(n, r):
                rest = n - sum(sizes)
                if r == 1 and rest == 0:
                    continue
                if kind in ("K", "SC"):
                    kinds = self._kinds(kind, top)
                    marked_opts = [self._child_options(sz, b, kinds, essential) for sz, b in zip(sizes, blocks)]
                    if any(not o for o in marked_opts):
                        continue
                    for anon in self._anon_multisets(rest, kinds, max(0, 2 - r)):
                        for combo in itertools.product(*marked_opts):
                            out.append(_node_shape(kind, None, list(combo) + anon))
                else:
                    # distinguished child is one of the marked children ...
                    for d in range(r):
                        opts = [
                            self._child_options(
                                sz, b, self._kinds("SX_dist" if i == d else "SX_other"), essential
                            )
                            for i, (sz, b) in enumerate(zip(sizes, blocks))
                        ]
                        if any(not o for o in opts):
                            continue
                        for anon in self._anon_multisets(rest, self._kinds("SX_other"), max(0, 2 - r)):
                            for combo in itertools.product(*opts):
                                combo = list(combo)
                                dist = combo.pop(d)
                                out.append(_node_shape("SX", dist, combo + anon))
                    # ... or an anonymous one
                    opts = [
                        self._child_options(sz, b, self._kinds("SX_other"), essential)
                        for sz, b in zip(sizes, blocks)
                    ]
                    if any(not o for o in opts):
                        continue
                    for dsize in range(1, rest - max(0, 1 - r) + 1):
                        for dist in self._child_options(dsize, (), self._kinds("SX_dist"), False):
                            for anon in self._anon_multisets(rest - dsize, self._kinds("SX_other"), max(0, 1 - r)):
                                for combo in itertools.product(*opts):
                                    out.append(_node_shape("SX", dist, list(combo) + anon))
        return out


def _compositions_bounded(n: int, r: int):
    """Tuples of r nonnegative integers with sum at most n."""
    if r == 0:
        yield ()
        return
    for first in range(n + 1):
        for rest in _compositions_bounded(n - first, r - 1):
            yield (first,) + rest


def materialize(shape: _Shape, n: int) -> tuple[DHTree, dict[int, int]]:
    """Concrete tree: unmarked leaves 1..n in traversal order, mark j -> leaf n + j."""
    counter = itertools.count(1)
    mark_leaf: dict[int, int] = {}

    def conv(s: _Shape):
        st = s.struct
        if st == 0:
            return next(counter)
        if isinstance(st, int):
            mark_leaf[st] = n + st
            return n + st
        kind, dist, others = st
        kids = [conv(c) for c in others]
        if dist is None:
            return (kind, None, tuple(kids))
        return (kind, 0, tuple([conv(dist)] + kids))

    return DHTree(conv(shape)), mark_leaf


@dataclass
class MarkedAnalysis:
    shape_key: str
    jumps: tuple[int, ...]
    adjacent_essential: bool
    item_iii: bool


def analyze_marked(t: DHTree, marked_leaves: dict[int, int]) -> MarkedAnalysis:
    """Induced subtree, per-edge jumps and the side conditions of a marked tree."""
    a = t.arena
    return enriched_subtree(a, {a.leaf_node[lbl]: mk for mk, lbl in marked_leaves.items()})


def enriched_subtree(a, node_mark: dict[int, int]) -> MarkedAnalysis:
    """Shape spanned by the root-leaf and the marked nodes, with jumps per shape edge.

    Only the paths from marks to the root-leaf are visited. Essential vertices
    (root-leaf, marks, branching nodes) never count as jumps of the paths they end.
    """
    via: dict[int, set] = {}
    below: dict[int, set] = {}
    for v, mk in node_mark.items():
        below.setdefault(v, set()).add(mk)
        while v != 0:
            p = a.parent[v]
            via.setdefault(p, set()).add(v)
            below.setdefault(p, set()).add(mk)
            v = p
    branching = {v for v, kids in via.items() if v != 0 and len(kids) >= 2}
    essential = {0} | set(node_mark) | branching
    binary = all(len(via[v]) == 2 for v in branching)
    adjacent = any(a.parent[v] in essential for v in essential if v != 0)
    if not node_mark or not binary:
        return MarkedAnalysis("degenerate", (), adjacent, False)
    # essential parent of every essential vertex, and the shape bottom-up
    ess_parent: dict[int, int] = {}
    paths: dict[int, list[int]] = {}
    for v in essential:
        if v == 0:
            continue
        path = [v]
        w = a.parent[v]
        while w not in essential:
            path.append(w)
            w = a.parent[w]
        path.append(w)
        ess_parent[v] = w
        paths[v] = path
    built: dict[int, object] = {}
    for v in sorted(ess_parent, key=lambda x: -a.depth[x]):
        if v in node_mark:
            built[v] = node_mark[v]
        else:
            kids = [c for c in ess_parent if ess_parent[c] == v]
            built[v] = tuple(built[c] for c in kids)
    (top,) = [v for v, p in ess_parent.items() if p == 0]
    shape = built[top]
    layout = crt.edge_layout(shape)
    jumps_out = [0] * layout.n_edges
    for v, path in paths.items():
        jumps_out[layout.edge_of_cluster(below[v])] = a.path_jumps(path)
    item_iii = True
    for v in branching:
        p = a.parent[v]
        cot_sx = a.kind[p] == "SC" or (a.kind[p] == "SX" and a.dist_child[p] != v)
        kids_sx = all(a.kind[c] == "SX" for c in via[v])
        if not (a.kind[v] == "SX" and cot_sx and kids_sx):
            item_iii = False
    return MarkedAnalysis(crt.shape_key(shape), tuple(jumps_out), adjacent, item_iii)


def induced_brute_force(f: str, k: int, max_n: int, *, prune: bool = True) -> dict[str, Sparse]:
    """Direct count of marked family trees in each induced class, by shape."""
    check_family(f)
    enum = MarkedShapeEnumerator(prune=prune, leaf3=f == "leaf3")
    marks = tuple(range(1, k + 1))
    out: dict[str, Sparse] = defaultdict(dict)
    for n in range(0, max_n + 1):
        for kind in TYPES:
            for s in enum.shapes(n, marks, kind, True, top=True):
                t, mark_leaf = materialize(s, n)
                if not in_family(f, t):
                    continue
                res = analyze_marked(t, mark_leaf)
                if res.shape_key == "degenerate" or res.adjacent_essential:
                    continue
                if f == "leaf3" and not res.item_iii:
                    continue
                weight = math.factorial(n) // s.aut
                key = (n, res.jumps)
                out[res.shape_key][key] = out[res.shape_key].get(key, 0) + weight
    return dict(out)


def marked_brute_force(f: str, max_n: int) -> dict[tuple[str, str], Sparse]:
    """Direct count of trees with one marked leaf by (root type, cotype) and jumps."""
    check_family(f)
    enum = MarkedShapeEnumerator(prune=False)
    out: dict[tuple[str, str], Sparse] = defaultdict(dict)
    for n in range(0, max_n + 1):
        for kind in TYPES:
            for s in enum.shapes(n, (1,), kind, True):
                t, mark_leaf = materialize(s, n)
                a = t.arena
                leaf = a.leaf_node[mark_leaf[1]]
                p = a.parent[leaf]
                if a.kind[p] == "K":
                    cot = "K"
                elif a.kind[p] == "SC":
                    cot = "SX"
                else:
                    cot = "SC" if a.dist_child[p] == leaf else "SX"
                j = a.path_jumps(a.path(leaf, 0))
                weight = math.factorial(n) // s.aut
                if f == "leaf3":
                    if not is_3leaf(t) or kind != "SX":
                        continue
                    keys = [("SX", "*")] + ([("SX", "SX")] if cot == "SX" else [])
                else:
                    if f == "dh2c" and not _dh2c_marked_ok(t, leaf):
                        continue
                    keys = [(kind, cot)]
                for key in keys:
                    out[key][(n, (j,))] = out[key].get((n, (j,)), 0) + weight
    return dict(out)


def _dh2c_marked_ok(t: DHTree, marked_node: int) -> bool:
    """No unmarked leaf at a star center (the root-leaf and marked leaf are exempt)."""
    a = t.arena
    for v in range(1, len(a)):
        if a.kind[v] == "SX":
            d = a.dist_child[v]
            if a.kind[d] == "L" and d != marked_node:
                return False
    return True


def leaf3_min_size(k: int) -> int:
    """Smallest size with a nonzero coefficient in the leaf3 product form (k >= 2)."""
    return (k + 1) + (k - 2) + (k - 1)


# -- identity report -----------------------------------------------------------------


@dataclass
class IdentityCheck:
    name: str
    ok: bool
    detail: str = ""


@dataclass
class IdentityReport:
    order: int
    checks: list[IdentityCheck] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def add(self, name: str, ok: bool, detail: str = "") -> None:
        self.checks.append(IdentityCheck(name, ok, detail))

    def failures(self) -> list[IdentityCheck]:
        return [c for c in self.checks if not c.ok]


def first_difference(a: TruncatedSeries, b: TruncatedSeries) -> str:
    for n in range(min(a.order, b.order) + 1):
        if a.labeled(n) != b.labeled(n):
            return f"z^{n}: {a.labeled(n)} != {b.labeled(n)}"
    return ""


def _sparse_difference(a: Sparse, b: Sparse) -> str:
    for key in sorted(set(a) | set(b)):
        if a.get(key, 0) != b.get(key, 0):
            return f"{key}: {a.get(key, 0)} != {b.get(key, 0)}"
    return ""


def _sparse_truncate(a: Sparse, max_n: int) -> Sparse:
    return {k: v for k, v in a.items() if k[0] <= max_n and v}


def verify_identities(order: int = 30, *, brute_max_n: int = 6, max_k: int = 3, strict: bool = True) -> IdentityReport:
    """Check the exact series identities; raise on the first mismatch when ``strict``."""
    rep = IdentityReport(order)

    def check(name, a, b):
        diff = first_difference(a, b)
        rep.add(name, not diff, diff)
        if diff and strict:
            raise IdentityMismatch(f"{name}: {diff}")

    def check_sparse(name, a, b):
        diff = _sparse_difference(a, b)
        rep.add(name, not diff, diff)
        if diff and strict:
            raise IdentityMismatch(f"{name}: {diff}")

    zs = TruncatedSeries.z(order)
    one = TruncatedSeries.constant(1, order)
    # (a) main series
    dh = family_series("dh", order)
    check("(a) D_K = D_SC", dh["K"], dh["SC"])
    F = F_series("dh", order)
    check("(a) D_K = (F/(1+F) - z)/2", dh["K"], (F / (one + F) - zs) * Fraction(1, 2))
    check("(a) D_SX = F^2/(1+F)", dh["SX"], F * F / (one + F))
    K, X = Var("K"), Var("X")
    reduced = solve_fixpoint(
        SpecSystem({"K": ExpGe(ZAtom + K + X, 2), "X": (ZAtom + 2 * K) * ExpGe(ZAtom + K + X, 1)}), order
    )
    check("(a) reduced system", reduced["K"] * 2 + reduced["X"], dh["D"])
    c2 = family_series("dh2c", order)
    F2 = F_series("dh2c", order)
    check("(a) 2c: D_K = (F - z)/(2 + 2F)", c2["K"], (F2 - zs) / (2 * (one + F2)))
    check("(a) 2c: D_SX = (F^2 - zF)/(1 + F)", c2["SX"], (F2 * F2 - zs * F2) / (one + F2))
    check("(a) 2c: D_K = D_SC", c2["K"], c2["SC"])
    l3 = family_series("leaf3", order)
    check("(a) leaf3: L = exp(z) - 1", l3["L"], exp_ge(zs, 1))

    for f in FAMILIES:
        marked = marked_series(f, order)
        closed = closed_forms(f, order)
        # (b) each series satisfies its system when substituted back
        ok = all(s.u_degree(n) <= n for s in marked.values() for n in range(order + 1))
        rep.add(f"(b) {f}: u-degree <= z-degree", ok)
        if not ok and strict:
            raise IdentityMismatch(f"(b) {f}: u-degree exceeds z-degree")
        brute = marked_brute_force(f, min(brute_max_n, order))
        for key, s in marked.items():
            ser = _sparse_from_bivariate(s, 0, 1)
            check_sparse(f"(b) {f}: {key} vs brute force", _sparse_truncate(ser, brute_max_n), brute.get(key, {}))
        # (c) u = 1 counts pointed trees
        if f == "leaf3":
            check("(c) leaf3: E_SX^*(z,1) = E_SX'", marked[("SX", "*")].at_u(1).truncate(order - 1), l3["SX"].derivative_z())
        else:
            roots = ("K", "SX") if f == "dh2c" else TYPES
            cots = ("K", "SX") if f == "dh2c" else TYPES
            total = sum((marked[(a, b)].at_u(1) for a in roots for b in cots), TruncatedSeries.zero(order))
            base = family_series(f, order)["D"]
            check(f"(c) {f}: sum of D_a^b(z,1) = D'", total.truncate(order - 1), base.derivative_z())
        # (d) closed forms
        for key, s in marked.items():
            check(f"(d) {f}: closed form {key}", s, closed[key])
        # H at the level of series: the jump kernel is shared by all (a, b)
        if f != "leaf3":
            Ff = F_series(f, order).lift()
            Hs = H_series(f, order).lift()
            zz = TruncatedSeries.z(order, True)
            onev = TruncatedSeries.constant(1, order, True)
            G = Ff - zz if f == "dh2c" else Ff
            check(f"(d) {f}: H = G/((1+F)(1-2F))", Hs, G / ((onev + Ff) * (onev - 2 * Ff)))
            base = family_series(f, order)
            kk = base["K"] + base["SX"] + zs
            if f == "dh":
                check(f"(c) {f}: (D_SC + D_K + z) exp(D_SX + D_K + z) = F", (base["SC"] + base["K"] + zs) * exp_ge(kk, 0), F_series(f, order))
            jn = min(brute_max_n, 5)
            for a_, b_, c_ in itertools.product(TYPES, repeat=3):
                J = J_series(f, a_, b_, c_, jn)
                got = [J_brute_force(f, a_, b_, c_, n) for n in range(jn + 1)]
                want = [int(J.labeled(n)) for n in range(jn + 1)]
                diff = "" if got == want else f"{want} != brute {got}"
                rep.add(f"(d) {f}: J_{a_}^{b_}{c_} vs brute force", not diff, diff)
                if diff and strict:
                    raise IdentityMismatch(f"J_{a_}^{b_}{c_}: {diff}")
    # (e)/(f) induced subtrees
    for f in FAMILIES:
        label = "(e)" if f == "dh" else "(f)"
        # the leaf3 product form needs at least one branching vertex
        for k in range(2 if f == "leaf3" else 1, max_k + 1):
            size = max(brute_max_n, leaf3_min_size(k) + 1) if f == "leaf3" else brute_max_n
            brute = induced_brute_force(f, k, size)
            for shape in crt.kproper_shapes(k):
                key = crt.shape_key(shape)
                formula = induced_series(f, shape, size)
                check_sparse(f"{label} {f}: induced k={k} {key}", formula, brute.get(key, {}))
    return rep
