import itertools

import pytest
from hypothesis import given, settings

from hftcube.cube import build_q, distance
from hftcube.instances import grid, transverse_gadget, tree_of_flats_hft
from hftcube.paths import (check_domain_geodesic, normal_cube_path, nr_order,
                           verify_normal_path)
from hftcube.walls import separating_walls
from oracles import all_geodesics, crosses_by_square
from strategies import RICH, hfts


def _is_total(order):
    n = len(order.walls)
    return all(order.comparable(i, j) for i, j in itertools.combinations(range(n), 2))


def test_nr_order_examples():
    qc = build_q(grid([5]))
    assert _is_total(nr_order(qc, (0,), (5,)))
    g = build_q(grid([2, 3]))
    o = nr_order(g, (0, 0, 0), (2, 3, 0))
    for i, j in itertools.combinations(range(len(o.walls)), 2):
        same = o.walls[i].label == o.walls[j].label
        assert o.comparable(i, j) == same
    t = build_q(transverse_gadget(2))
    o = nr_order(t, t.hft.marked_tuple("a"), t.hft.marked_tuple("b"))
    assert len(o.walls) == 4 and _is_total(o)


def test_normal_path_examples():
    g = build_q(grid([2, 3]))
    p = normal_cube_path(g, (0, 0, 0), (2, 3, 0))
    assert p.points == [(0, 0, 0), (1, 1, 0), (2, 2, 0), (2, 3, 0)]
    assert p.length == 5 and [len(s) for s in p.steps] == [2, 2, 1]
    assert normal_cube_path(g, (1, 2, 0), (1, 2, 0)).points == [(1, 2, 0)]
    t = build_q(transverse_gadget(2))
    p = normal_cube_path(t, t.hft.marked_tuple("a"), t.hft.marked_tuple("b"))
    assert len(p.points) == 5 and p.length == 4
    assert p.to_document()["points"] == [t.index[z] for z in p.points]


def test_check_domain_geodesic_examples():
    g = build_q(grid([2, 3]))
    p = normal_cube_path(g, (0, 0, 0), (2, 3, 0))
    assert all(check_domain_geodesic(p, u) for u in g.hft.domains)
    walk = [(0, 0, 0), (1, 0, 0), (0, 0, 0), (0, 1, 0)]
    assert not check_domain_geodesic(walk, "a", g)
    assert check_domain_geodesic(walk, "b", g)
    with pytest.raises(ValueError):
        check_domain_geodesic(walk, "a")


def test_every_shortest_path_projects_to_geodesics():
    for h in (transverse_gadget(3), tree_of_flats_hft("abcaabbc"), grid([2, 2])):
        qc = build_q(h)
        for a, b in itertools.combinations(range(len(qc)), 2):
            for path in all_geodesics(qc, a, b, cap=50):
                pts = [qc.points[i] for i in path]
                assert all(check_domain_geodesic(pts, u, qc) for u in h.domains)


@settings(max_examples=40)
@given(hfts(RICH))
def test_normal_paths_on_fuzz(h):
    qc = build_q(h)
    for p, q in itertools.permutations(qc.points, 2):
        path = normal_cube_path(qc, p, q)
        assert path.length == distance(qc, p, q) == len(path.points) - 1 + sum(len(s) - 1 for s in path.steps)
        assert set(w for s in path.steps for w in s) == separating_walls(qc, p, q)
        for s in path.steps:
            for a, b in itertools.combinations(s, 2):
                assert crosses_by_square(qc, (a.label, a.edge), (b.label, b.edge))
        assert verify_normal_path(path).ok


@settings(max_examples=30)
@given(hfts(RICH))
def test_all_geodesics_project_to_geodesics(h):
    qc = build_q(h)
    if len(qc) > 40:
        return
    for a, b in itertools.combinations(range(len(qc)), 2):
        for path in all_geodesics(qc, a, b, cap=30):
            pts = [qc.points[i] for i in path]
            assert all(check_domain_geodesic(pts, u, qc) for u in h.domains)
