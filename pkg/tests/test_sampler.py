from __future__ import annotations

import collections

import networkx as nx
import numpy as np
import pytest
from scipy import stats

from splitlimit import enumeration as en
from splitlimit import sampler as S
from splitlimit.series import solve_system
from splitlimit.treecodec import gr, is_2connected, validate_reduced


@pytest.mark.parametrize("f", en.FAMILIES)
def test_integer_tables_match_rational_solver(f):
    system, _ = en.specification(f)
    counts, _ = S.integer_tables(system, 40)
    sol = solve_system(system, 40)
    for nd in system.nodes():
        assert counts[id(nd)] == [int(sol.series(nd).labeled(k)) for k in range(41)]


def test_exact_dh_size_two_uniform():
    rng = S.make_rng(1)
    s = S.exact_sampler("dh", 8)
    draws = 100_000
    freq = collections.Counter(s.sample(2, rng) for _ in range(draws))
    assert set(freq) == en.brute_force_trees("dh", 2)
    sigma = np.sqrt(0.25 * 0.75 / draws)
    for c in freq.values():
        assert abs(c / draws - 0.25) < 3 * sigma


def test_exact_graphs_dh2c_size_two():
    rng = S.make_rng(2)
    cfg = S.SamplerConfig("dh2c", 2)
    for _ in range(20):
        g = S.sample_graph(cfg, rng)
        assert g.edges() == [(0, 1), (0, 2), (1, 2)]


@pytest.mark.parametrize("f", en.FAMILIES)
def test_exact_size_three_chi_square(f):
    rng = S.make_rng(3, en.FAMILIES.index(f))
    s = S.exact_sampler(f, 8)
    universe = sorted(en.brute_force_trees(f, 3), key=lambda t: t.to_json())
    draws = 100_000
    freq = collections.Counter(s.sample(3, rng) for _ in range(draws))
    assert set(freq) == set(universe)
    p = stats.chisquare([freq[t] for t in universe]).pvalue
    assert p > 0.001


def test_boltzmann_conditional_uniformity_at_size_three():
    rng = S.make_rng(4)
    arenas = S.boltzmann_arenas("dh", 3, 30_000, rng, eps=0.0, x=0.12)
    trees = [S.labeled_tree(a, rng) for a in arenas]
    universe = sorted(en.brute_force_trees("dh", 3), key=lambda t: t.to_json())
    freq = collections.Counter(trees)
    assert set(freq) == set(universe)
    assert stats.chisquare([freq[t] for t in universe]).pvalue > 0.001


@pytest.mark.parametrize("f", en.FAMILIES)
def test_sampled_trees_are_valid(f):
    rng = S.make_rng(5)
    for mode, n in (("exact", 60), ("boltzmann", 300)):
        cfg = S.SamplerConfig(f, n, mode)
        for _ in range(5):
            t = S.sample(cfg, rng)
            validate_reduced(t)
            assert en.in_family(f, t)
            if mode == "boltzmann":
                assert cfg.window[0] <= t.size <= cfg.window[1]
            else:
                assert t.size == n


def test_dh2c_graphs_have_no_articulation_point():
    rng = S.make_rng(6)
    s = S.exact_sampler("dh2c", 100)
    for _ in range(30):
        t = s.sample(int(rng.integers(2, 101)), rng)
        assert is_2connected(t)
        assert not list(nx.articulation_points(gr(t).to_networkx()))


def test_window_sizes_near_figure_examples():
    rng = S.make_rng(7)
    for n in (290, 388):
        (a,) = S.boltzmann_arenas("dh", n, 1, rng, eps=0.02)
        assert abs(sum(k == "L" for k in a.kind) - 1 - n) <= 0.02 * n


def test_determinism():
    cfg = S.SamplerConfig("leaf3", 200, "boltzmann", seed=99)
    assert S.sample(cfg).to_json() == S.sample(cfg).to_json()
    cfg = S.SamplerConfig("dh", 30, "exact", seed=99)
    assert S.sample(cfg).to_json() == S.sample(cfg).to_json()


def test_errors():
    with pytest.raises(S.SamplerError):
        S.exact_sampler("dh", 10).sample(11, S.make_rng(0))
    with pytest.raises(S.SamplerError):
        S.boltzmann_arenas("dh", 2000, 1, S.make_rng(0), eps=0.0, max_attempts=10, batch=10)
    with pytest.raises(ValueError):
        S.SamplerConfig("dh", 10, "other")


def test_seed_from_env(monkeypatch):
    monkeypatch.setenv("SPLITLIMIT_SEED", "1234")
    assert S.seed_from_env() == 1234
    monkeypatch.delenv("SPLITLIMIT_SEED")
    assert S.seed_from_env(5) == 5

