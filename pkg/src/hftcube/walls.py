"""Walls of Q, their half-spaces, and the pocset they form.

A wall is a (domain, tree edge) pair.  Its two half-spaces are the points of
Q whose coordinate in that domain lies on one side of the edge.  Crossing,
nesting and intersection are decided from the labels and relative
projections alone; the point-set versions live in the test oracles.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import networkx as nx
import numpy as np

from .cube import QComplex, build_q
from .hft import EQUAL, NESTED, ORTHOGONAL, RELAXED, TRANSVERSE, Hft, delta_map
from .report import Report
from .tree import half_trees, geodesic


class EmptyHalfSpace(ValueError):
    pass


@dataclass(frozen=True, order=True)
class QWall:
    label: str
    edge: tuple[int, int]

    def __str__(self):
        return f"{self.label}:{self.edge[0]}-{self.edge[1]}"


@dataclass(frozen=True, order=True)
class QHalfSpace:
    wall: QWall
    side: int  # 0: the half-tree holding edge[0]; 1: the one holding edge[1]

    @property
    def complement(self) -> "QHalfSpace":
        return QHalfSpace(self.wall, 1 - self.side)

    def __str__(self):
        return f"{self.wall}/{self.wall.edge[self.side]}"


class _WallTable:
    """Per-hft cache of walls and half-tree memberships."""

    def __init__(self, hft: Hft):
        self.hft = hft
        self.walls: list[QWall] = [QWall(u, e) for u in hft.domains for e in hft.trees[u].edges]
        self.index = {w: i for i, w in enumerate(self.walls)}
        self.sides: list[tuple[frozenset, frozenset]] = []
        self.side_arr: list[np.ndarray] = []
        for w in self.walls:
            tw = half_trees(hft.trees[w.label], w.edge)
            self.sides.append(tw.sides)
            arr = np.zeros(hft.trees[w.label].n, dtype=np.int8)
            arr[list(tw.sides[1])] = 1
            self.side_arr.append(arr)
        self.by_domain = {u: [i for i, w in enumerate(self.walls) if w.label == u] for u in hft.domains}

    def half_tree(self, h: QHalfSpace) -> frozenset:
        return self.sides[self.index[h.wall]][h.side]


def wall_table(hft: Hft) -> _WallTable:
    t = hft.__dict__.get("_walls")
    if t is None:
        t = _WallTable(hft)
        hft.__dict__["_walls"] = t
    return t


def walls_of(hft: Hft) -> list[QWall]:
    return list(wall_table(hft).walls)


def halfspaces_of(hft: Hft) -> list[QHalfSpace]:
    return [QHalfSpace(w, s) for w in walls_of(hft) for s in (0, 1)]


def crosses(qc: QComplex | Hft, w1: QWall, w2: QWall) -> bool:
    hft = qc.hft if isinstance(qc, QComplex) else qc
    return hft.rel(w1.label, w2.label) == ORTHOGONAL


def _image(hft: Hft, inner: str, outer: str, verts) -> int:
    """Where a projection-free subset of the outer tree lands in the inner tree."""
    return delta_map(hft, inner, outer, next(iter(verts)))


def halfspace_meets(hft: Hft, h1: QHalfSpace, h2: QHalfSpace) -> bool:
    u, v = h1.wall.label, h2.wall.label
    t = wall_table(hft)
    s1, s2 = t.half_tree(h1), t.half_tree(h2)
    r = hft.rel(u, v)
    if r == EQUAL:
        return bool(s1 & s2)
    if r == ORTHOGONAL:
        return True
    if r == TRANSVERSE:
        return hft.delta[(v, u)] in s1 or hft.delta[(u, v)] in s2
    if r == NESTED:   # u inside v
        return hft.delta[(u, v)] in s2 or _image(hft, u, v, s2) in s1
    # v inside u
    return hft.delta[(v, u)] in s1 or _image(hft, v, u, s1) in s2


def halfspace_nests(hft: Hft, h1: QHalfSpace, h2: QHalfSpace) -> bool:
    """Whether h1 is contained in h2 (as point sets of Q)."""
    u, v = h1.wall.label, h2.wall.label
    t = wall_table(hft)
    s1, s2 = t.half_tree(h1), t.half_tree(h2)
    r = hft.rel(u, v)
    if r == EQUAL:
        return s1 <= s2
    if r == ORTHOGONAL:
        return False
    if r == TRANSVERSE:
        return hft.delta[(u, v)] in s2 and hft.delta[(v, u)] not in s1
    if r == NESTED:   # u inside v: the far side of v must project off h1
        far = t.half_tree(h2.complement)
        return hft.delta[(u, v)] in s2 and _image(hft, u, v, far) not in s1
    # v inside u
    return hft.delta[(v, u)] not in s1 and _image(hft, v, u, s1) in s2


class Pocset:
    """Half-spaces ordered by inclusion, with complementation.

    Half-space ids are ``2 * wall_index + side``, so the complement of ``i``
    is ``i ^ 1``.
    """

    def __init__(self, hft: Hft, walls: list[QWall] | None = None, qc: QComplex | None = None):
        self.hft = hft
        self.qc = qc
        self.walls: list[QWall] = list(walls_of(hft) if walls is None else walls)
        self.index = {w: i for i, w in enumerate(self.walls)}
        self.halfspaces = [QHalfSpace(w, s) for w in self.walls for s in (0, 1)]
        m = len(self.halfspaces)
        nest = np.zeros((m, m), dtype=bool)
        for i, j in itertools.permutations(range(m), 2):
            if i ^ 1 != j:
                nest[i, j] = halfspace_nests(hft, self.halfspaces[i], self.halfspaces[j])
        nest.setflags(write=False)
        self.nest = nest
        self.warnings: list[str] = []

    def __len__(self):
        return len(self.halfspaces)

    def __repr__(self):
        return f"Pocset({len(self.walls)} walls, width {self.width})"

    @staticmethod
    def complement(i: int) -> int:
        return i ^ 1

    def halfspace_id(self, h: QHalfSpace) -> int:
        return 2 * self.index[h.wall] + h.side

    def comparable_walls(self, a: int, b: int) -> bool:
        n = self.nest
        return any(n[2 * a + s, 2 * b + t] or n[2 * b + t, 2 * a + s] for s in (0, 1) for t in (0, 1))

    @cached_property
    def transverse_graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(len(self.walls)))
        for a, b in itertools.combinations(range(len(self.walls)), 2):
            if not self.comparable_walls(a, b):
                g.add_edge(a, b)
        return g

    @cached_property
    def width(self) -> int:
        if not self.walls:
            return 0
        return max(len(c) for c in nx.find_cliques(self.transverse_graph))

    def check_axioms(self) -> Report:
        rep = Report("pocset-axioms")
        n = self.nest
        m = len(self.halfspaces)
        idx = np.arange(m)
        comp = idx ^ 1
        rep.add("irreflexive", not n[idx, idx].any())
        rep.add("antisymmetric", not (n & n.T).any())
        trans = (n.astype(np.int64) @ n.astype(np.int64)) > 0
        rep.add("transitive", not (trans & ~n & ~np.eye(m, dtype=bool)).any())
        rep.add("complement-incomparable", not n[idx, comp].any())
        rep.add("order-reversing", bool((n == n[np.ix_(comp, comp)].T).all()))
        bad = []
        for a, b in self.transverse_graph.edges:
            if self.hft.rel(self.walls[a].label, self.walls[b].label) != ORTHOGONAL:
                bad.append([str(self.walls[a]), str(self.walls[b])])
        rep.add("transverse-pairs-orthogonal", not bad, {"pairs": bad[:10]} if bad else None)
        rep.info["width"] = self.width
        return rep


def halfspace_nonempty_witness(hft: Hft, h: QHalfSpace):
    """A label whose marked point lies in the half-tree, or None."""
    s = wall_table(hft).half_tree(h)
    for f in hft.labels:
        if hft.marked[f][h.wall.label] in s:
            return f
    return None


def build_pocset(hft: Hft, qc: QComplex | None = None) -> Pocset:
    walls = walls_of(hft)
    if hft.mode == RELAXED and qc is None:
        qc = build_q(hft)
    if qc is not None:
        t = wall_table(hft)
        keep = []
        warnings = []
        carried = set()
        for a, b, k in qc.edges:
            x, y = qc.points[a][k], qc.points[b][k]
            carried.add((k, (min(x, y), max(x, y))))
        for w in walls:
            i = t.index[w]
            k = hft.index[w.label]
            col = t.side_arr[i][qc.coords[:, k]]
            if not (col == 0).any() or not (col == 1).any():
                raise EmptyHalfSpace(f"a half-space of wall {w} contains no point of Q")
            if (k, w.edge) not in carried:
                warnings.append(f"wall {w} has an empty carrier; excluded")
                continue
            keep.append(w)
        p = Pocset(hft, keep, qc)
        p.warnings = warnings
        return p
    for h in halfspaces_of(hft):
        if halfspace_nonempty_witness(hft, h) is None:
            raise EmptyHalfSpace(f"half-space {h} holds no marked point")
    return Pocset(hft, walls)


def pocset_for(qc: QComplex) -> Pocset:
    """The pocset of a built complex, computed once and kept on it."""
    p = qc.__dict__.get("_pocset")
    if p is None:
        p = build_pocset(qc.hft, qc)
        qc.__dict__["_pocset"] = p
    return p


def separating_walls(qc: QComplex, p, q) -> set[QWall]:
    qc.require(p)
    qc.require(q)
    out = set()
    for k, u in enumerate(qc.hft.domains):
        path = geodesic(qc.hft.trees[u], p[k], q[k])
        out.update(QWall(u, (min(a, b), max(a, b))) for a, b in zip(path, path[1:]))
    return out


def crossing_graph(qc: QComplex | Hft) -> nx.Graph:
    hft = qc.hft if isinstance(qc, QComplex) else qc
    ws = walls_of(hft)
    g = nx.Graph()
    g.add_nodes_from(ws)
    g.add_edges_from((a, b) for a, b in itertools.combinations(ws, 2) if crosses(hft, a, b))
    return g


def dimension(qc: QComplex) -> int:
    g = crossing_graph(qc)
    if g.number_of_nodes() == 0:
        return 0
    return max(len(c) for c in nx.find_cliques(g))


def wall_table_text(hft: Hft) -> str:
    t = wall_table(hft)
    rows = ["wall\tlabel\tedge\tside0\tside1"]
    for i, w in enumerate(t.walls):
        s0, s1 = t.sides[i]
        rows.append(f"{i}\t{w.label}\t{w.edge[0]}-{w.edge[1]}\t"
                    f"{','.join(map(str, sorted(s0)))}\t{','.join(map(str, sorted(s1)))}")
    return "\n".join(rows) + "\n"
