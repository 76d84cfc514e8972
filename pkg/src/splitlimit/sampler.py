"""Uniform random trees of each family.

Two modes:

``exact``
    recursive method driven by exact integer counting tables of every node of
    the family grammar; uniform over labeled trees of size exactly n.
``boltzmann``
    free Boltzmann generation at x = rho (1 - 1/(2n)), rejected until the size
    lands in a window around n. Attempts are grown in large batches as a
    multitype branching process, one numpy pass per generation.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy import stats as sps

from . import enumeration as en
from .series import Const, ExpGe, Prod, Scale, Sum, Tag, Var, ZAtom, binomial_row
from .treecodec import Arena, DHTree, Graph, gr

MODES = ("exact", "boltzmann")


class SamplerError(RuntimeError):
    pass


@dataclass(frozen=True)
class SamplerConfig:
    family: str
    n: int
    mode: str = "exact"
    eps: float = 0.1
    seed: int = 0
    max_attempts: int = 10**6

    def __post_init__(self):
        en.check_family(self.family)
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.n < 1:
            raise ValueError("size must be at least 1")
        if not 0 <= self.eps < 1:
            raise ValueError("eps must lie in [0, 1)")

    @property
    def window(self) -> tuple[int, int]:
        if self.mode == "exact":
            return self.n, self.n
        return max(1, math.ceil(self.n * (1 - self.eps))), math.floor(self.n * (1 + self.eps))


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """PCG64 stream derived from a 64-bit seed and an optional replicate path."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=tuple(stream))))


def seed_from_env(default: int = 0) -> int:
    val = os.environ.get("SPLITLIMIT_SEED")
    return int(val) if val not in (None, "") else default


# -- exact mode ------------------------------------------------------------------


def _randbelow(rng: np.random.Generator, bound: int) -> int:
    if bound <= 0:
        raise ValueError("empty range")
    if bound <= 2**62:
        return int(rng.integers(bound))
    bits = bound.bit_length()
    words = (bits + 63) // 64
    while True:
        x = 0
        for w in rng.integers(0, 2**64, size=words, dtype=np.uint64):
            x = (x << 64) | int(w)
        x >>= words * 64 - bits
        if x < bound:
            return x


def _choose(rng: np.random.Generator, weights: list[int]) -> int:
    total = sum(weights)
    r = _randbelow(rng, total)
    for i, w in enumerate(weights):
        if r < w:
            return i
        r -= w
    raise AssertionError("unreachable")


class _Node:
    __slots__ = ("label", "items")

    def __init__(self, label: str):
        self.label = label
        self.items: list = []


def integer_tables(system, max_n: int) -> tuple[dict[int, list[int]], dict[tuple[int, int], list[int]]]:
    """Labeled counts n![z^n] of every grammar node, in integer arithmetic only.

    Returns per-node count lists and, for each Set argument, the counts of
    Set_{>=r'} for every r' up to the node's bound (keyed by (id(arg), r')).
    Each degree is settled by repeated passes, since same-degree references
    only occur through vanishing constant terms.
    """
    nodes = system.nodes()
    counts: dict[int, list[int]] = {id(nd): [] for nd in nodes}
    exps: dict[tuple[int, int], list[int]] = {}
    for nd in nodes:
        if isinstance(nd, ExpGe):
            for r in range(nd.r + 1):
                exps[(id(nd.arg), r)] = []
    for m in range(max_n + 1):
        row = binomial_row(m)
        prev = binomial_row(m - 1) if m else ()
        for nd in nodes:
            counts[id(nd)].append(0)
        for lst in exps.values():
            lst.append(0)
        for _ in range(len(nodes) + 2):
            changed = False
            for nd in nodes:
                if isinstance(nd, Var):
                    v = counts[id(system.equations[nd.name])][m]
                elif nd is ZAtom:
                    v = int(m == 1)
                elif isinstance(nd, Const):
                    v = int(nd.value) if m == 0 else 0
                elif isinstance(nd, Sum):
                    v = sum(counts[id(t)][m] for t in nd.terms)
                elif isinstance(nd, Tag):
                    v = counts[id(nd.arg)][m]
                elif isinstance(nd, Prod):
                    a, b = counts[id(nd.left)], counts[id(nd.right)]
                    v = sum(row[k] * a[k] * b[m - k] for k in range(m + 1))
                elif isinstance(nd, ExpGe):
                    a = counts[id(nd.arg)]
                    if a[0]:
                        raise SamplerError("set of a class with objects of size 0")
                    for r in range(nd.r + 1):
                        if m == 0:
                            e = int(r == 0)
                        else:
                            sub = exps[(id(nd.arg), max(r - 1, 0))]
                            e = sum(prev[j] * a[j + 1] * sub[m - 1 - j] for j in range(m))
                        exps[(id(nd.arg), r)][m] = e
                    v = exps[(id(nd.arg), nd.r)][m]
                else:
                    raise SamplerError(f"no integer table for {nd!r}")
                if v != counts[id(nd)][m]:
                    counts[id(nd)][m] = v
                    changed = True
            if not changed:
                break
        else:
            raise SamplerError(f"counting tables did not settle at size {m}")
    return counts, exps


class ExactSampler:
    """Recursive-method sampler for one family up to a maximal size."""

    def __init__(self, family: str, max_n: int):
        self.family = en.check_family(family)
        self.max_n = max_n
        system, self.total = en.specification(family)
        self.system = system
        self._counts, self._exp = integer_tables(system, max_n)

    def count(self, n: int) -> int:
        return self._counts[id(self.system.equations[self.total])][n]

    def sample(self, n: int, rng: np.random.Generator) -> DHTree:
        if n > self.max_n:
            raise SamplerError(f"size {n} exceeds counting tables ({self.max_n})")
        if self.count(n) == 0:
            raise SamplerError(f"no {self.family} tree of size {n}")
        labels = list(range(1, n + 1))
        top: list = []
        stack = [(self.system.equations[self.total], labels, top)]
        while stack:
            expr, labs, sink = stack.pop()
            m = len(labs)
            if isinstance(expr, Var):
                stack.append((self.system.equations[expr.name], labs, sink))
            elif expr is ZAtom:
                assert m == 1
                sink.append(labs[0])
            elif isinstance(expr, Tag):
                node = _Node(expr.label)
                sink.append(node)
                stack.append((expr.arg, labs, node.items))
            elif isinstance(expr, Sum):
                i = _choose(rng, [self._counts[id(t)][m] for t in expr.terms])
                stack.append((expr.terms[i], labs, sink))
            elif isinstance(expr, Prod):
                a, b = self._counts[id(expr.left)], self._counts[id(expr.right)]
                row = binomial_row(m)
                k = _choose(rng, [row[k] * a[k] * b[m - k] for k in range(m + 1)])
                pick = set(rng.choice(m, size=k, replace=False).tolist()) if k else set()
                left = [x for i, x in enumerate(labs) if i in pick]
                right = [x for i, x in enumerate(labs) if i not in pick]
                stack.append((expr.right, right, sink))
                stack.append((expr.left, left, sink))
            elif isinstance(expr, ExpGe):
                parts = self._split_set(expr, labs, rng)
                for part in reversed(parts):
                    stack.append((expr.arg, part, sink))
            elif isinstance(expr, Scale):
                raise SamplerError("scaled terms are not samplable")
            else:
                raise SamplerError(f"cannot sample {expr!r}")
        (root,) = top
        return DHTree(_build_nested(root))

    def _split_set(self, expr: ExpGe, labs: list[int], rng) -> list[list[int]]:
        """Components of a labeled set: the one holding the smallest label first."""
        a = self._counts[id(expr.arg)]
        labs = sorted(labs)
        parts = []
        r = expr.r
        while labs:
            m = len(labs)
            rest = self._exp[(id(expr.arg), max(r - 1, 0))]
            row = binomial_row(m - 1)
            weights = [row[j] * a[j + 1] * rest[m - 1 - j] for j in range(m)]
            j = _choose(rng, weights)
            others = labs[1:]
            pick = set(rng.choice(m - 1, size=j, replace=False).tolist()) if j else set()
            parts.append([labs[0]] + [x for i, x in enumerate(others) if i in pick])
            labs = [x for i, x in enumerate(others) if i not in pick]
            r = max(r - 1, 0)
        return parts


def _build_nested(root):
    """Nested tuples from the sampler's node objects (iterative)."""
    out: dict[int, object] = {}
    order = []
    stack = [root]
    while stack:
        x = stack.pop()
        if isinstance(x, _Node):
            order.append(x)
            stack.extend(x.items)
    for x in reversed(order):
        kids = tuple(out.pop(id(c)) if isinstance(c, _Node) else c for c in x.items)
        if x.label == "SX":
            out[id(x)] = ("SX", 0, kids)
        elif x.label in ("K", "Kstar"):
            out[id(x)] = ("K", None, kids)
        else:
            out[id(x)] = (x.label, None, kids)
    return out[id(root)] if isinstance(root, _Node) else root


@lru_cache(maxsize=16)
def exact_sampler(family: str, max_n: int) -> ExactSampler:
    return ExactSampler(family, max_n)


# -- Boltzmann mode ----------------------------------------------------------------

# node codes used by the batched generator
LEAF, K, SC, SX, KLEAF = 0, 1, 2, 3, 4
_KIND = {LEAF: "L", K: "K", SC: "SC", SX: "SX", KLEAF: "K"}


def _smallest_root(fn, hi):
    """Smallest positive root of fn on (0, hi] with fn(0) > 0, fn(hi) <= 0."""
    lo = mpmath.mpf(0)
    hi = mpmath.mpf(hi)
    for _ in range(200):
        mid = (lo + hi) / 2
        if fn(mid) > 0:
            lo = mid
        else:
            hi = mid
    return hi


@dataclass(frozen=True)
class BoltzmannOracle:
    """Class values at the tuning parameter x."""

    family: str
    x: float
    values: dict

    @classmethod
    def at(cls, family: str, x: float) -> "BoltzmannOracle":
        from .asymptotics import solve_constants

        c = solve_constants(family, 128)
        if not 0 < x < c.rho:
            raise ValueError(f"tuning parameter must lie in (0, rho={c.rho:.6f})")
        with mpmath.workprec(128):
            z = mpmath.mpf(x)
            top = mpmath.mpf(c.F_at_rho)
            if family in ("dh", "dh2c"):
                from .asymptotics import _dh2c_G, _dh_G

                G = _dh_G if family == "dh" else _dh2c_G
                w = _smallest_root(lambda y: G(z, y) - y, top)
                if family == "dh":
                    k = (w / (1 + w) - z) / 2
                    xx = w * w / (1 + w)
                else:
                    k = (w - z) / (2 * (1 + w))
                    xx = (w * w - z * w) / (1 + w)
                vals = {"z": z, "K": k, "SC": k, "SX": xx}
            else:
                from .asymptotics import _leaf3_G

                y = _smallest_root(lambda t: _leaf3_G(z, t) - t, top)
                L = mpmath.exp(z) - 1
                ec = mpmath.exp(L + y) - 1 - (L + y)
                vals = {"z": z, "L": L, "SX": y, "SC": ec, "Kstar": (y + ec) * L, "Kleaf": L - z}
        return cls(family, float(x), {k: float(v) for k, v in vals.items()})


@lru_cache(maxsize=256)
def _cond_poisson_table(lam: float, r: int) -> tuple[np.ndarray, np.ndarray]:
    top = int(lam + 12 * math.sqrt(lam) + 40) + r
    ks = np.arange(r, top + 1)
    cdf = np.cumsum(sps.poisson.pmf(ks, lam))
    return ks, cdf / cdf[-1]


def _cond_poisson(rng: np.random.Generator, lam: float, r: int, size: int) -> np.ndarray:
    """Poisson(lam) conditioned on being at least r, by inverse CDF on a truncated table."""
    if size == 0:
        return np.zeros(0, dtype=np.int64)
    ks, cdf = _cond_poisson_table(float(lam), r)
    return ks[np.searchsorted(cdf, rng.random(size), side="right").clip(max=len(ks) - 1)]


def _categorical(rng: np.random.Generator, codes: list[int], weights: list[float], size: int) -> np.ndarray:
    p = np.asarray(weights, dtype=float)
    p = np.cumsum(p / p.sum())
    idx = np.searchsorted(p, rng.random(size), side="right").clip(max=len(codes) - 1)
    return np.asarray(codes)[idx]


class BoltzmannBatch:
    """Generator of many Boltzmann attempts at once, pruned at an upper size bound."""

    def __init__(self, family: str, x: float):
        self.family = en.check_family(family)
        self.oracle = BoltzmannOracle.at(family, x)
        v = self.oracle.values
        z = v["z"]
        if family in ("dh", "dh2c"):
            self.root = ([K, SX], [v["K"], v["SX"]]) if family == "dh2c" else ([K, SC, SX], [v["K"], v["SC"], v["SX"]])
            center = ([K, SC], [v["K"], v["SC"]]) if family == "dh2c" else ([LEAF, K, SC], [z, v["K"], v["SC"]])
            self.rules = {
                K: (None, ([LEAF, SC, SX], [z, v["SC"], v["SX"]]), 2),
                SC: (None, ([LEAF, K, SX], [z, v["K"], v["SX"]]), 2),
                SX: (center, ([LEAF, K, SX], [z, v["K"], v["SX"]]), 1),
            }
        else:
            L, Y = v["L"], v["SX"]
            l_split = ([LEAF, KLEAF], [z, v["Kleaf"]])
            self.root = ([SX, SC, -1, LEAF, KLEAF], [Y, v["SC"], v["Kstar"], z, v["Kleaf"]])
            self.rules = {
                KLEAF: (None, ([LEAF], [z]), 2),
                SX: (l_split, ([LEAF, KLEAF, SX], [z, v["Kleaf"], Y]), 1),
                SC: (None, ([LEAF, KLEAF, SX], [z, v["Kleaf"], Y]), 2),
            }
            self.kstar_top = ([SX, SC], [Y, v["SC"]])
        self.lam = {kind: sum(rule[1][1]) for kind, rule in self.rules.items()}
        self.z = z

    def run(self, attempts: int, lo: int, hi: int, rng: np.random.Generator) -> list[Arena]:
        """Grow ``attempts`` trees; return those whose size lies in [lo, hi]."""
        # node arrays, appended generation by generation
        kinds = [np.full(attempts, -2, dtype=np.int8)]  # root-leaf placeholders
        parents = [np.full(attempts, -1, dtype=np.int64)]
        isdist = [np.zeros(attempts, dtype=bool)]
        owner = [np.arange(attempts, dtype=np.int64)]
        nid = attempts
        root_kind = _categorical(rng, *self.root, attempts)
        front_kind = root_kind.astype(np.int8)
        front_parent = np.arange(attempts, dtype=np.int64)
        front_dist = np.zeros(attempts, dtype=bool)
        front_owner = np.arange(attempts, dtype=np.int64)
        size = np.zeros(attempts, dtype=np.int64)
        alive = np.ones(attempts, dtype=bool)
        extra_kind: list[np.ndarray] = []
        extra_parent: list[np.ndarray] = []
        extra_owner: list[np.ndarray] = []
        # Kstar roots (leaf3): a clique holding one star and >= 1 leaves
        star_roots = front_kind == -1
        front_kind[star_roots] = K
        while len(front_kind):
            ids = np.arange(nid, nid + len(front_kind), dtype=np.int64)
            nid += len(front_kind)
            kinds.append(front_kind)
            parents.append(front_parent)
            isdist.append(front_dist)
            owner.append(front_owner)
            is_leaf = front_kind == LEAF
            np.add.at(size, front_owner[is_leaf], 1)
            alive &= size <= hi
            keep = alive[front_owner] & ~is_leaf
            new_k, new_p, new_d, new_o = [], [], [], []
            if star_roots is not None and star_roots.any():
                # first generation only: expand the special clique roots
                sel = keep & star_roots[front_owner] & (front_parent == front_owner)
                if sel.any():
                    par = ids[sel]
                    own = front_owner[sel]
                    top_kind = _categorical(rng, *self.kstar_top, len(par))
                    nleaf = _cond_poisson(rng, self.z, 1, len(par))
                    new_k += [top_kind, np.full(int(nleaf.sum()), LEAF, dtype=np.int8)]
                    new_p += [par, np.repeat(par, nleaf)]
                    new_d += [np.zeros(len(par), dtype=bool), np.zeros(int(nleaf.sum()), dtype=bool)]
                    new_o += [own, np.repeat(own, nleaf)]
                    keep = keep & ~sel
                star_roots = None
            for kind, (center, others, r) in self.rules.items():
                sel = keep & (front_kind == kind)
                if not sel.any():
                    continue
                par = ids[sel]
                own = front_owner[sel]
                if center is not None:
                    ck = _categorical(rng, *center, len(par))
                    new_k.append(ck.astype(np.int8))
                    new_p.append(par)
                    new_d.append(np.ones(len(par), dtype=bool))
                    new_o.append(own)
                m = _cond_poisson(rng, self.lam[kind], r, len(par))
                tot = int(m.sum())
                new_k.append(_categorical(rng, *others, tot).astype(np.int8))
                new_p.append(np.repeat(par, m))
                new_d.append(np.zeros(tot, dtype=bool))
                new_o.append(np.repeat(own, m))
            if new_k:
                front_kind = np.concatenate(new_k).astype(np.int8)
                front_parent = np.concatenate(new_p)
                front_dist = np.concatenate(new_d)
                front_owner = np.concatenate(new_o)
            else:
                front_kind = np.zeros(0, dtype=np.int8)
        kind_all = np.concatenate(kinds)
        par_all = np.concatenate(parents)
        dist_all = np.concatenate(isdist)
        own_all = np.concatenate(owner)
        good = np.flatnonzero(alive & (size >= lo) & (size <= hi))
        out = []
        if len(good) == 0:
            return out
        # global ids increase from parents to children, so a stable sort by
        # owner keeps every tree in parent-first order
        mine = np.flatnonzero(np.isin(own_all, good))
        order = mine[np.argsort(own_all[mine], kind="stable")]
        own_sorted = own_all[order]
        starts = np.searchsorted(own_sorted, good)
        ends = np.searchsorted(own_sorted, good, side="right")
        for s, e in zip(starts, ends):
            idx = order[s:e]  # increasing global ids, parents first
            out.append(_arena_from_global(idx, kind_all, par_all, dist_all))
        return out


_KIND_TABLE = np.array(["L", "K", "SC", "SX", "K"], dtype=object)


def _arena_from_global(idx: np.ndarray, kind_all, par_all, dist_all) -> Arena:
    rest = idx[1:]
    parent = np.empty(len(idx), dtype=np.int64)
    parent[0] = -1
    parent[1:] = np.searchsorted(idx, par_all[rest])
    dist_child = np.full(len(idx), -1, dtype=np.int64)
    d = np.flatnonzero(dist_all[rest]) + 1
    dist_child[parent[d]] = d
    kinds = ["L"] + _KIND_TABLE[kind_all[rest]].tolist()
    return Arena.from_arrays(kinds, parent.tolist(), dist_child.tolist())


def default_tuning(family: str, n: int) -> float:
    from .asymptotics import solve_constants

    return solve_constants(family, 128).rho * (1 - 1 / (2 * n))


def boltzmann_arenas(
    family: str,
    n: int,
    count: int,
    rng: np.random.Generator,
    *,
    eps: float = 0.1,
    x: float | None = None,
    max_attempts: int = 10**6,
    batch: int | None = None,
) -> list[Arena]:
    """``count`` Boltzmann trees with size in the window, as arenas (unlabeled leaves).

    ``max_attempts`` bounds the attempts spent per returned tree.
    """
    lo, hi = max(1, math.ceil(n * (1 - eps))), math.floor(n * (1 + eps))
    gen = BoltzmannBatch(family, x if x is not None else default_tuning(family, n))
    batch = batch or 20_000
    out: list[Arena] = []
    spent = 0
    while len(out) < count:
        if spent >= max_attempts * count:
            raise SamplerError(
                f"boltzmann rejection exceeded {max_attempts} attempts per tree; retune x or widen the window"
            )
        got = gen.run(batch, lo, hi, rng)
        spent += batch
        out.extend(got)
    return out[:count]


def labeled_tree(arena: Arena, rng: np.random.Generator) -> DHTree:
    """Attach uniformly random labels 1..n to the leaves of an unlabeled arena."""
    leaves = [v for v in range(1, len(arena)) if arena.kind[v] == "L"]
    perm = rng.permutation(len(leaves)) + 1
    label = [-1] * len(arena)
    label[0] = 0
    for v, lab in zip(leaves, perm.tolist()):
        label[v] = lab
    a = Arena.from_arrays(arena.kind, arena.parent, arena.dist_child, label)
    return DHTree(a.to_nested())


# -- public API ------------------------------------------------------------------------


def sample(cfg: SamplerConfig, rng: np.random.Generator | None = None) -> DHTree:
    rng = rng if rng is not None else make_rng(cfg.seed)
    if cfg.mode == "exact":
        return exact_sampler(cfg.family, max(cfg.n, 8)).sample(cfg.n, rng)
    (arena,) = boltzmann_arenas(cfg.family, cfg.n, 1, rng, eps=cfg.eps, max_attempts=cfg.max_attempts)
    return labeled_tree(arena, rng)


def sample_graph(cfg: SamplerConfig, rng: np.random.Generator | None = None) -> Graph:
    return gr(sample(cfg, rng))
