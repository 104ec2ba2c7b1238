import itertools

import numpy as np
import pytest
from hypothesis import given, settings

from hftcube.cube import (BudgetExceeded, NotInQ, build_q, distance, enumerate_q_naive, interval,
                          is_consistent, median)
from hftcube.instances import grid, nested_gadget, transverse_gadget
from oracles import all_tuples, bfs_dist, consistent_by_definition
from strategies import RICH, SMALL, hfts


def test_is_consistent_examples():
    t = transverse_gadget(2)     # domains U, V, S
    assert not is_consistent(t, (1, 1, 0))
    assert is_consistent(t, (0, 1, 0))
    n = nested_gadget(2)         # domains U, V
    assert not is_consistent(n, (2, 0))
    for h in (t, n, grid([2, 3])):
        assert all(is_consistent(h, h.marked_tuple(f)) for f in h.labels)


def test_is_consistent_rejects_malformed():
    with pytest.raises(ValueError):
        is_consistent(grid([2, 3]), (0, 0))
    with pytest.raises(ValueError):
        is_consistent(grid([2, 3]), (0, 9, 0))


@pytest.mark.parametrize("h,size", [(grid([2, 3]), 12), (transverse_gadget(2), 5),
                                    (nested_gadget(2), 5), (grid([4]), 5)])
def test_build_q_sizes(h, size):
    qc = build_q(h)
    assert len(qc) == size
    assert set(qc.points) == enumerate_q_naive(h)
    assert set(qc.points) == {p for p in all_tuples(h) if consistent_by_definition(h, p)}


@pytest.mark.parametrize("h", [transverse_gadget(2), nested_gadget(2)])
def test_gadgets_are_paths_of_length_four(h):
    qc = build_q(h)
    degs = sorted(len(a) for a in qc.adjacency)
    assert len(qc.edges) == 4 and degs == [1, 1, 2, 2, 2]


def test_distance_examples():
    g = build_q(grid([2, 3]))
    assert distance(g, (0, 0, 0), (2, 3, 0)) == 5
    t = build_q(transverse_gadget(2))
    a, b = t.hft.marked_tuple("a"), t.hft.marked_tuple("b")
    assert distance(t, a, b) == 4 and distance(t, a, a) == 0
    with pytest.raises(NotInQ):
        distance(t, (1, 1, 0), a)


def test_median_examples():
    g = build_q(grid([2, 3]))
    assert median(g, (0, 0, 0), (0, 0, 0), (2, 3, 0)) == (0, 0, 0)
    assert median(g, (0, 0, 0), (2, 0, 0), (0, 3, 0)) == (0, 0, 0)
    t = build_q(transverse_gadget(2))
    assert median(t, (0, 0, 0), (2, 2, 0), (0, 2, 0)) == (0, 2, 0)


def test_interval_examples():
    g = build_q(grid([2, 3]))
    assert interval(g, (1, 1, 0), (1, 1, 0)) == {(1, 1, 0)}
    assert interval(g, (0, 0, 0), (2, 3, 0)) == set(g.points)
    t = build_q(transverse_gadget(2))
    assert interval(t, t.hft.marked_tuple("a"), t.hft.marked_tuple("b")) == set(t.points)


def test_budgets():
    with pytest.raises(BudgetExceeded):
        build_q(grid([3, 3]), budget=10)
    with pytest.raises(BudgetExceeded):
        enumerate_q_naive(grid([3, 3]), budget=10)


@given(hfts(SMALL))
def test_consistency_matches_definition(h):
    for p in all_tuples(h):
        assert is_consistent(h, p) == consistent_by_definition(h, p)


@given(hfts(RICH))
def test_flood_fill_matches_oracle(h):
    assert set(build_q(h).points) == enumerate_q_naive(h)


@given(hfts(RICH))
def test_metric(h):
    qc = build_q(h)
    d = qc.distance_matrix
    nbrs = [[j for j, _ in a] for a in qc.adjacency]
    for i in range(len(qc)):
        hops = bfs_dist(nbrs, i)
        assert [hops[j] for j in range(len(qc))] == d[i].tolist()
    assert (d == d.T).all() and (np.diag(d) == 0).all()
    off = ~np.eye(len(qc), dtype=bool)
    assert (d[off] > 0).all()
    assert (d[:, None, :] <= d[:, :, None] + d[None, :, :]).all()


@settings(max_examples=40)
@given(hfts(RICH))
def test_median_properties(h):
    qc = build_q(h)
    pts = qc.points
    for a, b, c in itertools.combinations_with_replacement(pts, 3):
        m = median(qc, a, b, c)
        assert all(median(qc, *perm) == m for perm in itertools.permutations((a, b, c)))
        assert interval(qc, a, b) & interval(qc, a, c) & interval(qc, b, c) == {m}


@given(hfts(RICH))
def test_interval_is_metric_interval(h):
    qc = build_q(h)
    d = qc.distance_matrix
    for i, j in itertools.combinations_with_replacement(range(len(qc)), 2):
        want = {qc.points[k] for k in range(len(qc)) if d[i, k] + d[k, j] == d[i, j]}
        assert interval(qc, qc.points[i], qc.points[j]) == want
