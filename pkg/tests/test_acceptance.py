"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the collected lines are
repeated in the terminal summary. Criterion 7 is slow (about 20 minutes on one
core) and carries the ``slow`` marker.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import networkx as nx
import pytest
from scipy import stats as sps

from splitlimit import asymptotics as A
from splitlimit import crt
from splitlimit import enumeration as en
from splitlimit import stats as st
from splitlimit.sampler import exact_sampler, make_rng
from splitlimit.treecodec import Graph, decompose, distance, gr, is_2connected, is_dh_definitional

RESULTS: list[str] = []
FAMILIES = en.FAMILIES
SEEDS = (101, 202, 303)


def record(label: str, ok: bool, detail: str) -> bool:
    line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
    RESULTS.append(line)
    print(line)
    return ok


def info(label: str, detail: str) -> None:
    line = f"[INFO] {label}: {detail}"
    RESULTS.append(line)
    print(line)


# -- 1 ---------------------------------------------------------------------------------


@pytest.mark.parametrize("f", FAMILIES)
def test_c1_exact_counts_vs_brute_force(f):
    rows = [(n, en.count_trees(f, n), len(en.brute_force_trees(f, n))) for n in range(1, 7)]
    ok = all(a == b for _, a, b in rows)
    detail = ", ".join(f"n={n}: {a}" + ("" if a == b else f" vs brute {b}") for n, a, b in rows)
    assert record(f"criterion 1 exact counts {f}", ok, detail)


# -- 2 ---------------------------------------------------------------------------------


def _dh_graphs_definitional(m: int) -> set[Graph]:
    pairs = list(itertools.combinations(range(m), 2))
    out = set()
    for mask in range(1 << len(pairs)):
        g = Graph(m, [p for i, p in enumerate(pairs) if mask >> i & 1])
        if g.is_connected() and is_dh_definitional(g):
            out.add(g)
    return out


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_c2_bijection(n):
    trees = en.brute_force_trees("dh", n)
    images = [gr(t) for t in trees]
    injective = len(set(images)) == len(images)
    target = _dh_graphs_definitional(n + 1)
    same = set(images) == target
    assert record(
        f"criterion 2 bijection n={n}",
        injective and same,
        f"{len(trees)} trees, {len(set(images))} distinct images, {len(target)} DH graphs on {n + 1} vertices",
    )


# -- 3 ---------------------------------------------------------------------------------


@pytest.mark.parametrize("f", FAMILIES)
def test_c3_distance_oracle(f):
    rng = make_rng(3, FAMILIES.index(f))
    s = exact_sampler(f, 60)
    pairs = bad = 0
    for _ in range(1000):
        t = s.sample(int(rng.integers(2, 61)), rng)
        g = gr(t)
        for a in range(g.n):
            d = g.bfs(a)
            for b in range(a + 1, g.n):
                pairs += 1
                bad += distance(t, a, b) != d[b]
    assert record(f"criterion 3 distance oracle {f}", bad == 0, f"1000 trees, {pairs} pairs, {bad} mismatches")


# -- 4 ---------------------------------------------------------------------------------


def test_c4_identities():
    rep = en.verify_identities(30, brute_max_n=6, max_k=3, strict=False)
    fails = [f"{c.name} ({c.detail})" for c in rep.failures()]
    assert record("criterion 4 identities to order 30", rep.ok, f"{len(rep.checks)} checks, failures: {fails or 'none'}")


# -- 5 ---------------------------------------------------------------------------------

PRINTED = [
    ("dh", "rho", 0.1597),
    ("dh", "gamma_H", 3.9258),
    ("dh", "c_f", 0.3602),
    ("dh2c", "gamma_H", 7.5022),
    ("dh2c", "c_f", 0.1885),
    ("leaf3", "gamma_H", 1.5263),
    ("leaf3", "c_f", 0.9266),
]


@pytest.mark.parametrize("f,key,value", PRINTED)
def test_c5_constants(f, key, value):
    got = getattr(A.solve_constants(f), key)
    assert record(f"criterion 5 {f} {key}", abs(got - value) <= 5e-4, f"{got:.6f} vs {value} +/- 5e-4")


@pytest.mark.parametrize("f", FAMILIES)
def test_c5_kernel_at_singularity(f):
    r = A.solve_constants(f).residuals["H_at_rho_minus_1"]
    assert record(f"criterion 5 {f} jump kernel at rho", abs(r) <= 1e-6, f"|K(rho) - 1| = {abs(r):.2e}")


@pytest.mark.parametrize("f", ["dh", "dh2c"])
def test_c5_relation_constants(f):
    res = A.solve_constants(f).residuals
    r1, r2 = res["gamma_H_sq_minus_2_rho_nu"], res["gamma_H_mu_minus_gamma_D"]
    ok = abs(r1) <= 1e-8 and abs(r2) <= 1e-8
    assert record(f"criterion 5 {f} gamma relations", ok, f"gamma_H^2 - 2 rho nu = {r1:.2e}, gamma_H mu - gamma_D = {r2:.2e}")


# -- 6 ---------------------------------------------------------------------------------


def test_c6_semilarge_powers():
    reps = [A.semilarge_check("dh", n, 1.0) for n in (100, 200, 400)]
    ratios = [r.ratio for r in reps]
    inside = all(0.8 <= q <= 1.2 for q in ratios)
    toward = all(abs(b - 1) < abs(a - 1) for a, b in zip(ratios, ratios[1:]))
    detail = ", ".join(f"n={r.n}: {r.ratio:.4f}" for r in reps)
    for r in reps:
        xe = r.a_n / math.sqrt(r.n)
        alt = A.semilarge_check("dh", r.n, xe).ratio if xe != 1.0 else r.ratio
        info(f"criterion 6 n={r.n}", f"a_n={r.a_n}, ratio with x=a_n/sqrt(n): {alt:.4f}, coefficient ratio {r.coefficient_ratio:.5f}")
    assert record("criterion 6 semi-large powers", inside and toward, f"{detail}; in [0.8,1.2]: {inside}; toward 1: {toward}")


# -- 7 ---------------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _two_point(f, n, seed):
    return st.two_point(f, n, 2000, seed)


@pytest.mark.slow
@pytest.mark.parametrize("f", FAMILIES)
def test_c7_two_point_mean(f):
    rep = _two_point(f, 3000, SEEDS[0])
    m = rep.summary["literal_mean"]
    info(
        f"criterion 7 {f} d/(c_f sqrt n)",
        f"mean {rep.summary['corrected_mean']:.4f}, KS {rep.summary['corrected_ks']:.4f}",
    )
    ok = abs(m / st.RAYLEIGH_MEAN - 1) <= 0.10
    assert record(f"criterion 7 {f} mean of c_f d/sqrt n", ok, f"{m:.4f} vs {st.RAYLEIGH_MEAN:.4f} +/- 10%")


@pytest.mark.slow
@pytest.mark.parametrize("f", FAMILIES)
def test_c7_two_point_mean_inverse_scaling(f):
    rep = _two_point(f, 3000, SEEDS[0])
    m = rep.summary["corrected_mean"]
    ok = abs(m / st.RAYLEIGH_MEAN - 1) <= 0.10
    assert record(f"criterion 7 variant {f} mean of d/(c_f sqrt n)", ok, f"{m:.4f} vs {st.RAYLEIGH_MEAN:.4f} +/- 10%")


def _ks_votes(f, which):
    rows = []
    for s in SEEDS:
        small, large = _two_point(f, 500, s), _two_point(f, 3000, s)
        rows.append((small.summary[f"{which}_ks"], large.summary[f"{which}_ks"]))
    wins = sum(b < a for a, b in rows)
    return wins, ", ".join(f"{a:.4f}->{b:.4f}" for a, b in rows)


@pytest.mark.slow
@pytest.mark.parametrize("f", FAMILIES)
def test_c7_ks_decreases(f):
    wins, detail = _ks_votes(f, "literal")
    assert record(f"criterion 7 {f} KS(3000) < KS(500), c_f d/sqrt n", wins >= 2, f"{wins}/3 batches ({detail})")


@pytest.mark.slow
@pytest.mark.parametrize("f", FAMILIES)
def test_c7_ks_decreases_inverse_scaling(f):
    wins, detail = _ks_votes(f, "corrected")
    assert record(f"criterion 7 variant {f} KS(3000) < KS(500), d/(c_f sqrt n)", wins >= 2, f"{wins}/3 batches ({detail})")


@pytest.mark.slow
@pytest.mark.parametrize("f", FAMILIES)
def test_c7_k_point_shapes(f):
    rep = st.k_point(f, 3000, 3, 2000, SEEDS[0])
    s = rep.summary
    freqs = ", ".join(f"{k} {v:.4f}" for k, v in s["shape_freqs"].items())
    info(
        f"criterion 7 {f} k=3 total length",
        f"KS vs chi(6) {s['corrected_ks']:.4f} (p={s['corrected_p']:.2e}), degenerate {s['degenerate']}",
    )
    ok = s["shape_within_3sigma"]
    assert record(f"criterion 7 {f} k=3 shape frequencies", ok, f"{freqs} (sigma {s['shape_sigma']:.4f})")


# -- 8 ---------------------------------------------------------------------------------


@pytest.mark.parametrize("k", [1, 2, 3])
def test_c8_crt_reference(k):
    rng = make_rng(8, k)
    a = crt.sample_lengths(k, rng, size=100_000)
    b = crt.sample_lengths_rejection(k, rng, 100_000)
    p_s = sps.ks_2samp(a.sum(1), b.sum(1)).pvalue
    p_x = sps.ks_2samp(a[:, 0], b[:, 0]).pvalue
    ok = p_s > 0.001 and p_x > 0.001
    assert record(f"criterion 8 CRT k={k}", ok, f"KS p on S {p_s:.4f}, on X0 {p_x:.4f}")


# -- 9 ---------------------------------------------------------------------------------


@pytest.mark.parametrize("f", FAMILIES)
def test_c9_round_trip(f):
    rng = make_rng(9, FAMILIES.index(f))
    s = exact_sampler(f, 200)
    bad = 0
    for _ in range(500):
        t = s.sample(int(rng.integers(2, 201)), rng)
        g = gr(t)
        bad += gr(decompose(g)) != g
    assert record(f"criterion 9 round trip {f}", bad == 0, f"500 trees up to size 200, {bad} mismatches")


# -- 10 --------------------------------------------------------------------------------


def test_c10_two_connectivity():
    rng = make_rng(10)
    s = exact_sampler("dh", 100)
    bad = yes = 0
    for _ in range(500):
        t = s.sample(int(rng.integers(2, 101)), rng)
        graph_says = not any(True for _ in nx.articulation_points(gr(t).to_networkx()))
        yes += graph_says
        bad += is_2connected(t) != graph_says
    assert record("criterion 10 2-connectivity", bad == 0, f"500 dh trees, {yes} 2-connected, {bad} disagreements")
