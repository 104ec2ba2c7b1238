import itertools

import pytest
from hypothesis import given

from hftcube.cube import build_q, distance
from hftcube.instances import grid, nested_gadget, transverse_gadget, tree_of_flats_hft
from hftcube.walls import (QHalfSpace, QWall, build_pocset, crosses, dimension, halfspace_meets,
                           halfspace_nests, halfspaces_of, separating_walls, wall_table_text,
                           walls_of)
from oracles import crosses_by_quadrants, crosses_by_square, halfspace_masks
from strategies import RICH, hfts


def hs(label, a, b, side):
    return QHalfSpace(QWall(label, (a, b)), side)


def test_walls_of_counts():
    assert len(walls_of(grid([2, 3]))) == 5
    assert len(walls_of(transverse_gadget(2))) == 4
    assert walls_of(grid([0])) == []


def test_crosses_examples():
    g = build_q(grid([2, 3]))
    for v, h in itertools.product(walls_of(g.hft), repeat=2):
        if v.label == "a" and h.label == "b":
            assert crosses(g, v, h) and crosses_by_square(g, (v.label, v.edge), (h.label, h.edge))
    assert not crosses(g, QWall("a", (0, 1)), QWall("a", (1, 2)))
    t = build_q(transverse_gadget(2))
    near_u, near_v = QWall("U", (0, 1)), QWall("V", (1, 2))
    assert not crosses(t, near_u, near_v)
    assert not crosses_by_square(t, ("U", (0, 1)), ("V", (1, 2)))


def _point_set(qc, h):
    return halfspace_masks(qc)[(h.wall.label, h.wall.edge, h.side)]


def test_nests_examples():
    g = grid([2, 3])
    assert halfspace_nests(g, hs("b", 0, 1, 0), hs("b", 1, 2, 0))
    for s, t in itertools.product((0, 1), repeat=2):
        assert not halfspace_nests(g, hs("a", 0, 1, s), hs("b", 0, 1, t))
    tg = transverse_gadget(2)
    qc = build_q(tg)
    # V's projection point 2 lies on side 1 of V's edge (1,2); U's point 0 is off side 1 of (0,1)
    h1, h2 = hs("U", 0, 1, 1), hs("V", 1, 2, 1)
    assert halfspace_nests(tg, h1, h2)
    m1, m2 = _point_set(qc, h1), _point_set(qc, h2)
    assert not (m1 & ~m2).any()


def test_meets_examples():
    g = grid([2, 3])
    for s, t in itertools.product((0, 1), repeat=2):
        assert halfspace_meets(g, hs("a", 0, 1, s), hs("b", 2, 3, t))
    h = hs("a", 1, 2, 0)
    assert not halfspace_meets(g, h, h.complement)
    n = nested_gadget(2)
    qc = build_q(n)
    for h1, h2 in itertools.product(halfspaces_of(n), repeat=2):
        want = bool((_point_set(qc, h1) & _point_set(qc, h2)).any())
        assert halfspace_meets(n, h1, h2) == want


@pytest.mark.parametrize("h,width", [(grid([2, 3]), 2), (grid([4]), 1), (transverse_gadget(2), 1)])
def test_pocset_width(h, width):
    p = build_pocset(h)
    assert p.width == width and p.check_axioms().ok


def test_separating_walls_examples():
    g = build_q(grid([2, 3]))
    assert len(separating_walls(g, (0, 0, 0), (2, 3, 0))) == 5
    assert separating_walls(g, (1, 1, 0), (1, 1, 0)) == set()
    t = build_q(transverse_gadget(2))
    assert len(separating_walls(t, t.hft.marked_tuple("a"), t.hft.marked_tuple("b"))) == 4


@pytest.mark.parametrize("h,dim", [(grid([2, 3]), 2), (transverse_gadget(2), 1), (grid([1, 1, 1]), 3)])
def test_dimension(h, dim):
    assert dimension(build_q(h)) == dim


def test_wall_table_text():
    text = wall_table_text(grid([1, 1]))
    assert text.splitlines() == ["wall\tlabel\tedge\tside0\tside1", "0\ta\t0-1\t0\t1", "1\tb\t0-1\t0\t1"]


def _check_label_criteria(h):
    qc = build_q(h)
    masks = halfspace_masks(qc)
    ws = walls_of(h)
    for a, b in itertools.combinations(ws, 2):
        w1, w2 = (a.label, a.edge), (b.label, b.edge)
        assert crosses(h, a, b) == crosses_by_quadrants(masks, w1, w2) == crosses_by_square(qc, w1, w2)
    for h1, h2 in itertools.product(halfspaces_of(h), repeat=2):
        m1 = masks[(h1.wall.label, h1.wall.edge, h1.side)]
        m2 = masks[(h2.wall.label, h2.wall.edge, h2.side)]
        assert halfspace_meets(h, h1, h2) == bool((m1 & m2).any())
        if h1 != h2:
            assert halfspace_nests(h, h1, h2) == bool(not (m1 & ~m2).any())
    return qc


@given(hfts(RICH))
def test_label_criteria_match_point_sets(h):
    _check_label_criteria(h)


def test_label_criteria_on_flats():
    _check_label_criteria(tree_of_flats_hft("abcaabbcab"))


@given(hfts(RICH))
def test_separating_walls_count_distance(h):
    qc = build_q(h)
    for p, q in itertools.combinations_with_replacement(qc.points, 2):
        assert len(separating_walls(qc, p, q)) == distance(qc, p, q)


@given(hfts(RICH))
def test_pocset_axioms_and_nonempty_halfspaces(h):
    qc = build_q(h)
    p = build_pocset(h, qc)
    assert p.check_axioms().ok
    assert p.width == dimension(qc)
    masks = halfspace_masks(qc)
    for hsp in halfspaces_of(h):
        sel = masks[(hsp.wall.label, hsp.wall.edge, hsp.side)]
        assert sel.any()
        k = h.index[hsp.wall.label]
        # strict mode: a marked tuple lies on this side
        assert any(sel[qc.index[h.marked_tuple(f)]] for f in h.labels)
        assert any(h.marked[f][hsp.wall.label] == qc.points[qc.index[h.marked_tuple(f)]][k]
                   for f in h.labels)
