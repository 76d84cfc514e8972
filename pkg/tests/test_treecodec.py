from __future__ import annotations

import itertools
import json

import networkx as nx
import pytest

from splitlimit import enumeration as en
from splitlimit.sampler import exact_sampler, make_rng
from splitlimit.treecodec import (
    DHTree,
    Graph,
    InvalidTreeError,
    NotDistanceHereditaryError,
    classify,
    decompose,
    distance,
    gr,
    is_2connected,
    is_3leaf,
    is_3leaf_power_by_cliques,
    is_dh,
    is_dh_definitional,
    jumps,
    leaf_power,
    rooted_violations,
    unrooted_violations,
    validate_reduced,
)


@pytest.fixture
def nine_leaf(fixtures_dir):
    return DHTree.from_json((fixtures_dir / "nine_leaf_tree.json").read_text())


def test_nine_leaf_tree(nine_leaf):
    validate_reduced(nine_leaf)
    g = gr(nine_leaf)
    assert g.n == 9
    assert g.has_edge(2, 3)
    assert not g.has_edge(6, 7)
    assert jumps(nine_leaf, 6, 7) == 2
    assert distance(nine_leaf, 6, 7) == 3
    assert g.bfs(6)[7] == 3


def test_single_nodes():
    k = DHTree(("K", None, (1, 2, 3, 4)))
    g = gr(k)
    assert g.edges() == list(itertools.combinations(range(5), 2))
    assert all(distance(k, a, b) == 1 for a, b in itertools.combinations(range(5), 2))
    star = DHTree(("SC", None, (1, 2, 3)))
    assert gr(star).edges() == [(0, 1), (0, 2), (0, 3)]
    assert jumps(star, 1, 2) == 1 and distance(star, 1, 2) == 2


def test_validation_messages():
    with pytest.raises(InvalidTreeError, match="K node with a K child"):
        validate_reduced(DHTree(("K", None, (1, ("K", None, (2, 3))))))
    with pytest.raises(InvalidTreeError, match="fewer than 2"):
        validate_reduced(DHTree(("SC", None, (1,))))
    bad = DHTree(("SX", 0, (("SX", 0, (1, 2)), 3)))
    assert "SX node whose distinguished child is SX" in rooted_violations(bad)
    with pytest.raises(InvalidTreeError):
        DHTree.from_json('{"type":"SX","children":[1,2]}')
    with pytest.raises(InvalidTreeError):
        DHTree.from_json('{"type":"Q","children":[1,2]}')


@pytest.mark.parametrize("f", en.FAMILIES)
@pytest.mark.parametrize("n", [2, 3, 4])
def test_rooted_and_unrooted_conditions_coincide(f, n):
    for t in en.brute_force_trees(f, n):
        assert not rooted_violations(t) and not unrooted_violations(t)
    for nodes in en.iter_brute_force_roots(n):
        t = DHTree(nodes)
        assert bool(rooted_violations(t)) == bool(unrooted_violations(t))


def test_json_round_trip(nine_leaf):
    text = nine_leaf.to_json()
    assert DHTree.from_json(text).to_json() == text
    assert json.loads(text) == nine_leaf.to_obj()
    g = gr(nine_leaf)
    assert Graph.from_json(g.to_json()) == g


def test_deep_tree_serializes():
    node = ("K", None, (1, 2))
    for i in range(3, 3000):
        node = ("SC" if i % 2 else "K", None, (node, i))
    t = DHTree(node)
    assert DHTree.from_json(t.to_json()).to_json() == t.to_json()


def test_distance_equals_bfs_random():
    rng = make_rng(11)
    for f in en.FAMILIES:
        s = exact_sampler(f, 60)
        for _ in range(15):
            t = s.sample(int(rng.integers(2, 61)), rng)
            g = gr(t)
            for a in range(g.n):
                d = g.bfs(a)
                for b in range(a + 1, g.n):
                    assert distance(t, a, b) == d[b] == distance(t, b, a)


def test_is_dh_examples():
    c5 = Graph(5, [(i, (i + 1) % 5) for i in range(5)])
    assert not is_dh(c5) and not is_dh_definitional(c5)
    tree = Graph(6, [(0, 1), (1, 2), (1, 3), (3, 4), (3, 5)])
    assert is_dh(tree) and is_dh_definitional(tree)
    for n in range(2, 5):
        for t in en.brute_force_trees("dh", n):
            assert is_dh_definitional(gr(t))


def test_decompose_small_graphs():
    assert decompose(Graph(3, [(0, 1), (0, 2), (1, 2)])) == DHTree(("K", None, (1, 2)))
    assert decompose(Graph(3, [(0, 1), (1, 2)])) == DHTree(("SX", 0, (1, 2)))
    with pytest.raises(NotDistanceHereditaryError):
        decompose(Graph(5, [(i, (i + 1) % 5) for i in range(5)]))


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_decompose_inverts_gr_exhaustively(n):
    for t in en.brute_force_trees("dh", n):
        assert decompose(gr(t)) == t


def test_classify_against_articulation_points():
    rng = make_rng(12)
    s = exact_sampler("dh", 100)
    for _ in range(60):
        t = s.sample(int(rng.integers(2, 101)), rng)
        ng = gr(t).to_networkx()
        assert is_2connected(t) == (not any(True for _ in nx.articulation_points(ng)))
    assert classify(DHTree(("K", None, (1, 2, 3))))["is_2connected"]


def test_leaf_power_examples():
    star = nx.Graph([(0, 1), (0, 2), (0, 3)])
    g, _ = leaf_power(star, 3)
    assert g.edges() == [(0, 1), (0, 2), (1, 2)]
    cat = nx.Graph([("u", "a"), ("a", "b"), ("b", "c"), ("c", "w"), ("b", "v")])
    g, leaves = leaf_power(cat, 3)
    idx = {v: i for i, v in enumerate(leaves)}
    assert sorted(g.edges()) == sorted([tuple(sorted((idx["u"], idx["v"]))), tuple(sorted((idx["v"], idx["w"])))])


def test_three_leaf_powers_classify():
    rng = make_rng(13)
    for _ in range(40):
        m = int(rng.integers(4, 40))
        tree = nx.random_labeled_tree(m, seed=int(rng.integers(2**31)))
        g, _ = leaf_power(tree, 3)
        if g.n < 3 or not g.is_connected():
            continue
        assert is_dh(g) and is_3leaf_power_by_cliques(g)
        assert is_3leaf(decompose(g))
