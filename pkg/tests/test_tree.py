import itertools

import pytest
from hypothesis import given, strategies as st

from hftcube.tree import (SimplicialTree, TreeError, collapse_subtrees, geodesic, half_trees,
                          tripod_median)
from strategies import tree_with_vertices, trees


def path(n):
    return SimplicialTree.path(n)


def test_geodesic_examples():
    assert geodesic(path(2), 0, 2) == [0, 1, 2]
    assert geodesic(path(4), 3, 3) == [3]
    assert geodesic(SimplicialTree.star(3), 1, 3) == [1, 0, 3]


def test_geodesic_rejects_bad_vertex():
    with pytest.raises(TreeError):
        geodesic(path(2), 0, 5)


def test_tripod_median_examples():
    t = path(3)
    assert tripod_median(t, 1, 1, 3) == 1
    assert tripod_median(t, 0, 2, 3) == 2
    assert tripod_median(SimplicialTree.star(3), 1, 2, 3) == 0


def test_half_trees_examples():
    assert half_trees(path(2), (0, 1)).sides == (frozenset({0}), frozenset({1, 2}))
    assert half_trees(path(1), (0, 1)).sides == (frozenset({0}), frozenset({1}))
    w = half_trees(SimplicialTree.star(3), (0, 2))
    assert set(map(frozenset, w.sides)) == {frozenset({2}), frozenset({0, 1, 3})}
    with pytest.raises(TreeError):
        half_trees(path(2), (0, 2))


def test_collapse_examples():
    t2, m = collapse_subtrees(path(3), [{1, 2}])
    assert t2.n == 3 and t2.diameter == 2 and list(m) == [0, 1, 1, 2]
    t2, m = collapse_subtrees(path(3), [])
    assert list(m) == [0, 1, 2, 3] and t2.edges == path(3).edges
    # {4} is a single vertex and removes no edge: only the 1-2 edge is lost
    t2, m = collapse_subtrees(path(5), [{1, 2}, {4}])
    assert t2.diameter == 4 and t2.dist[m[0], m[5]] == 4
    t2, m = collapse_subtrees(path(5), [{1, 2}, {4, 5}])
    assert t2.dist[m[0], m[5]] == 3


def test_collapse_rejects_bad_sets():
    with pytest.raises(TreeError):
        collapse_subtrees(path(4), [{0, 2}])
    with pytest.raises(TreeError):
        collapse_subtrees(path(4), [{0, 1}, {1, 2}])


def test_structure_checks():
    with pytest.raises(TreeError):
        SimplicialTree(3, [(0, 1)])
    with pytest.raises(TreeError):
        SimplicialTree(3, [(0, 1), (1, 2), (0, 2)])
    assert SimplicialTree.point().diameter == 0
    t = SimplicialTree.from_dict(path(3).to_dict())
    assert t.edges == ((0, 1), (1, 2), (2, 3))


@given(tree_with_vertices(3))
def test_tripod_median_symmetric_and_central(tv):
    t, (a, b, c) = tv
    m = tripod_median(t, a, b, c)
    assert all(tripod_median(t, *p) == m for p in itertools.permutations((a, b, c)))
    for x, y in ((a, b), (a, c), (b, c)):
        assert m in geodesic(t, x, y)


@given(tree_with_vertices(2))
def test_geodesic_length_is_distance(tv):
    t, (a, b) = tv
    g = geodesic(t, a, b)
    assert len(g) - 1 == t.dist[a, b]
    assert all(t.has_edge(x, y) for x, y in zip(g, g[1:]))


@given(trees(), st.data())
def test_half_trees_partition(t, data):
    if t.n == 1:
        return
    e = data.draw(st.sampled_from(t.edges))
    s0, s1 = half_trees(t, e).sides
    assert s0 | s1 == set(range(t.n)) and not s0 & s1
    assert t.is_connected_subset(s0) and t.is_connected_subset(s1)
    assert e[0] in s0 and e[1] in s1


@given(trees(14), st.data())
def test_collapse_drops_by_collapsed_edges(t, data):
    # pick disjoint connected sets as components of a random edge subset
    chosen = [e for e in t.edges if data.draw(st.booleans())]
    parent = list(range(t.n))

    def find(a):
        while parent[a] != a:
            a = parent[a]
        return a

    for a, b in chosen:
        parent[find(a)] = find(b)
    groups = {}
    for v in range(t.n):
        groups.setdefault(find(v), set()).add(v)
    sets = [g for g in groups.values() if len(g) > 1]
    t2, m = collapse_subtrees(t, sets)
    chosen = set(chosen)
    for u, v in itertools.combinations(range(t.n), 2):
        g = geodesic(t, u, v)
        lost = sum((min(x, y), max(x, y)) in chosen for x, y in zip(g, g[1:]))
        assert t2.dist[m[u], m[v]] == t.dist[u, v] - lost
    assert sorted(set(m)) == list(range(t2.n))
