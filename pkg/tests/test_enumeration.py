from __future__ import annotations

import itertools

import pytest

from splitlimit import enumeration as en
from splitlimit.treecodec import DHTree, Graph, gr, is_2connected, is_dh, validate_reduced

GOLDEN = {
    "dh": [0, 4, 38, 596, 13072, 368488, 12693536, 516718112],
    "dh2c": [0, 1, 10, 106, 1696, 34224, 845888, 24675872],
    "leaf3": [1, 4, 35, 361, 4482, 68027, 1238841, 26416474],
}


@pytest.mark.parametrize("f", en.FAMILIES)
def test_counts_match_frozen_values(f):
    assert [en.count_trees(f, n) for n in range(1, 9)] == GOLDEN[f]


@pytest.mark.parametrize("f", en.FAMILIES)
@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_counts_match_brute_force(f, n):
    trees = en.brute_force_trees(f, n)
    assert len(trees) == en.count_trees(f, n)
    for t in trees:
        validate_reduced(t)


def test_small_examples():
    assert en.count_trees("dh", 2) == 4
    assert en.count_trees("dh2c", 2) == 1
    assert en.count_trees("leaf3", 2) == 4
    assert en.count_graphs("dh", 3) == 4
    assert en.count_graphs("dh2c", 3) == 1
    with pytest.raises(ValueError):
        en.count_graphs("dh", 2)
    with pytest.raises(ValueError):
        en.count_trees("nope", 3)


def test_size_two_trees_by_hand():
    trees = en.brute_force_trees("dh", 2)
    kinds = sorted(t.root[0] for t in trees)
    assert kinds == ["K", "SC", "SX", "SX"]
    dists = sorted(t.root[2][t.root[1]] for t in trees if t.root[0] == "SX")
    assert dists == [1, 2]


def _connected_graphs(m):
    pairs = list(itertools.combinations(range(m), 2))
    for mask in range(1 << len(pairs)):
        g = Graph(m, [p for i, p in enumerate(pairs) if mask >> i & 1])
        if g.is_connected():
            yield g


@pytest.mark.parametrize("m", [3, 4, 5, 6])
def test_graph_counts_by_forbidden_subgraphs(m):
    assert sum(1 for g in _connected_graphs(m) if is_dh(g)) == en.count_graphs("dh", m)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_gr_is_injective(n):
    trees = en.brute_force_trees("dh", n)
    assert len({gr(t) for t in trees}) == len(trees)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_two_connected_subfamily(n):
    full = en.brute_force_trees("dh", n)
    assert en.brute_force_trees("dh2c", n) == {t for t in full if is_2connected(t)}


def test_counts_csv_header_and_row():
    rows = en.counts_csv("dh", 4).splitlines()
    assert rows[0] == "family,n,tree_count,graph_count"
    assert rows[2] == "dh,2,4,"
    assert rows[3] == "dh,3,38,4"


def test_marked_symmetry_and_closed_forms():
    m = en.marked_series("dh", 30)
    assert m[("K", "SX")] == m[("SX", "K")]
    closed = en.closed_forms("dh", 30)
    for key, s in m.items():
        assert s == closed[key], key


def test_printed_sign_is_wrong():
    # the 2c clique/clique closed form with the opposite sign disagrees at z^2
    good = en.closed_forms("dh2c", 10)
    bad = en.closed_forms("dh2c", 10, printed_sign=True)
    m = en.marked_series("dh2c", 10)
    assert m[("K", "K")] == good[("K", "K")]
    assert m[("K", "K")] != bad[("K", "K")]


def test_enriched_subtree_on_small_tree():
    t = DHTree.from_json('{"type":"SX","dist":0,"children":[{"type":"K","children":[2,3,4]},1,'
                         '{"type":"SX","dist":0,"children":[5,6,{"type":"SX","dist":1,"children":[7,8]}]}]}')
    res = en.analyze_marked(t, {1: 6, 2: 7})
    assert res.shape_key == "(1,2)"
    # edge 0 runs from the root-leaf to the branching SX, edges 1 and 2 to the marks
    assert len(res.jumps) == 3
    assert res.jumps[2] == 1  # the lowest SX is a jump on the way to 7


def test_identities_small_order():
    rep = en.verify_identities(12, brute_max_n=4, max_k=2, strict=False)
    assert rep.ok, [(c.name, c.detail) for c in rep.failures()]
