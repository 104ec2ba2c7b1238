import itertools

import pytest
from hypothesis import given, settings

from hftcube.cube import build_q
from hftcube.dual import (InternalContradiction, Ultrafilter, dualize, enumerate_ultrafilters,
                          from_ultrafilter, orientation_consistent, to_ultrafilter, verify_duality)
from hftcube.instances import grid, transverse_gadget
from hftcube.walls import build_pocset
from oracles import count_ultrafilters_by_masks
from strategies import RICH, SMALL, hfts


def test_to_ultrafilter_examples():
    h = grid([2, 3])
    p = build_pocset(h)
    assert to_ultrafilter(p, (0, 0, 0)).sides == (0,) * 5
    t = transverse_gadget(2)
    pt = build_pocset(t)
    uf = to_ultrafilter(pt, t.marked_tuple("a"))
    assert uf.sides == (0, 0, 0, 0)
    assert from_ultrafilter(pt, uf) == t.marked_tuple("a")


def test_from_ultrafilter_examples():
    h = grid([2, 3])
    p = build_pocset(h)
    assert from_ultrafilter(p, Ultrafilter((0,) * 5)) == (0, 0, 0)
    t = transverse_gadget(2)
    pt = build_pocset(t)
    # U at 0: both U walls on side 0; V at 2: both V walls on side 1
    assert from_ultrafilter(pt, Ultrafilter((0, 0, 1, 1))) == (0, 2, 0)


def test_from_ultrafilter_contradiction():
    p = build_pocset(grid([2]))
    # {0} from edge (0,1) and {2} from edge (1,2) share no vertex
    assert not orientation_consistent(p, (0, 1))
    with pytest.raises(InternalContradiction):
        from_ultrafilter(p, Ultrafilter((0, 1)))
    assert orientation_consistent(p, (1, 0))
    assert from_ultrafilter(p, Ultrafilter((1, 0))) == (1,)


@pytest.mark.parametrize("method", ["brute", "bfs"])
def test_dualize_grid(method):
    d = dualize(build_pocset(grid([2, 3])), method=method)
    assert (len(d), len(d.edges), d.dimension) == (12, 17, 2)


def test_dualize_gadget_and_path():
    d = dualize(build_pocset(transverse_gadget(2)))
    assert len(d) == 5 and len(d.edges) == 4 and d.dimension == 1
    d = dualize(build_pocset(grid([6])))
    assert len(d) == 7 and sorted(len(n) for n in d.neighbours) == [1, 1] + [2] * 5


def test_verify_duality_grid():
    rep = verify_duality(build_q(grid([2, 3])))
    assert rep.ok, rep.to_json()


@given(hfts(RICH))
def test_duality_on_fuzz(h):
    qc = build_q(h)
    rep = verify_duality(qc)
    assert rep.ok, rep.to_json()


@given(hfts(RICH))
def test_brute_and_bfs_agree(h):
    p = build_pocset(h)
    if len(p.walls) > 14:
        return
    assert dualize(p, method="brute").cells == dualize(p, method="bfs").cells


@settings(max_examples=30)
@given(hfts(SMALL))
def test_every_orientation_counted(h):
    qc = build_q(h)
    p = build_pocset(h, qc)
    if len(p.walls) > 12:
        return
    assert len(enumerate_ultrafilters(p)) == len(qc) == count_ultrafilters_by_masks(qc, p.walls)


@given(hfts(RICH))
def test_roundtrip(h):
    qc = build_q(h)
    p = build_pocset(h, qc)
    for pt in qc.points:
        uf = to_ultrafilter(p, pt)
        assert orientation_consistent(p, uf.sides)
        assert from_ultrafilter(p, uf) == pt


def test_dual_neighbours_flip_one_wall():
    d = dualize(build_pocset(grid([1, 2])))
    for i, j, w in d.edges:
        diff = [k for k, (a, b) in enumerate(zip(d.cells[i].sides, d.cells[j].sides)) if a != b]
        assert diff == [w]
    assert all(len(c) <= 2 for cell in d.cells for c in d.maximal_cubes_at(cell))
    assert d.to_dot().startswith("graph dual {")
    for a, b in itertools.combinations(range(len(d)), 2):
        assert d.graph_distances()[a, b] == sum(x != y for x, y in zip(d.cells[a].sides, d.cells[b].sides))
