"""Finite unit-edge simplicial trees.

Vertices are the integers ``0..n-1``.  Trees are immutable; the distance
table and the geodesic parent tables are computed lazily and cached.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np


class TreeError(ValueError):
    pass


def _norm_edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


class SimplicialTree:
    """An unrooted tree with unit edge lengths."""

    __slots__ = ("n", "edges", "adj", "__dict__")

    def __init__(self, n: int, edges: Iterable[Sequence[int]] = ()):
        n = int(n)
        if n < 1:
            raise TreeError("a tree needs at least one vertex")
        norm = set()
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if not (0 <= u < n and 0 <= v < n):
                raise TreeError(f"edge {(u, v)} has a vertex outside 0..{n - 1}")
            if u == v:
                raise TreeError(f"loop at vertex {u}")
            norm.add(_norm_edge(u, v))
        if len(norm) != n - 1:
            raise TreeError(f"{n} vertices need {n - 1} edges, got {len(norm)}")
        adj: list[list[int]] = [[] for _ in range(n)]
        for u, v in norm:
            adj[u].append(v)
            adj[v].append(u)
        self.n = n
        self.edges: tuple[tuple[int, int], ...] = tuple(sorted(norm))
        self.adj: tuple[tuple[int, ...], ...] = tuple(tuple(sorted(a)) for a in adj)
        # n-1 edges plus connectivity means acyclic
        seen = self._bfs_order(0)
        if len(seen) != n:
            raise TreeError("edge set is not connected")

    @classmethod
    def path(cls, length: int) -> "SimplicialTree":
        return cls(length + 1, [(i, i + 1) for i in range(length)])

    @classmethod
    def star(cls, leaves: int) -> "SimplicialTree":
        return cls(leaves + 1, [(0, i) for i in range(1, leaves + 1)])

    @classmethod
    def point(cls) -> "SimplicialTree":
        return cls(1, [])

    def _bfs_order(self, root: int) -> list[int]:
        order = [root]
        seen = {root}
        i = 0
        while i < len(order):
            u = order[i]
            i += 1
            for w in self.adj[u]:
                if w not in seen:
                    seen.add(w)
                    order.append(w)
        return order

    def __eq__(self, other):
        return isinstance(other, SimplicialTree) and self.n == other.n and self.edges == other.edges

    def __hash__(self):
        return hash((self.n, self.edges))

    def __repr__(self):
        return f"SimplicialTree(n={self.n}, edges={list(self.edges)})"

    def check_vertex(self, u) -> int:
        if not isinstance(u, (int, np.integer)) or not 0 <= u < self.n:
            raise TreeError(f"invalid vertex id {u!r} (tree has {self.n} vertices)")
        return int(u)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adj[u] if 0 <= u < self.n else False

    @cached_property
    def parents(self) -> np.ndarray:
        """parents[r, v] is the neighbour of v one step closer to r."""
        par = np.full((self.n, self.n), -1, dtype=np.int64)
        for r in range(self.n):
            par[r, r] = r
            dq = deque([r])
            while dq:
                u = dq.popleft()
                for w in self.adj[u]:
                    if par[r, w] < 0:
                        par[r, w] = u
                        dq.append(w)
        return par

    @cached_property
    def dist(self) -> np.ndarray:
        d = np.zeros((self.n, self.n), dtype=np.int64)
        for r in range(self.n):
            for u in self._bfs_order(r)[1:]:
                d[r, u] = d[r, self.parents[r, u]] + 1
        d.setflags(write=False)
        return d

    @cached_property
    def diameter(self) -> int:
        return int(self.dist.max())

    @cached_property
    def leaves(self) -> tuple[int, ...]:
        if self.n == 1:
            return ()
        return tuple(u for u in range(self.n) if len(self.adj[u]) == 1)

    def distance(self, u: int, v: int) -> int:
        return int(self.dist[self.check_vertex(u), self.check_vertex(v)])

    @cached_property
    def median_table(self) -> np.ndarray:
        """median_table[a, b, c] is the tripod center of a, b, c."""
        n = self.n
        d = self.dist
        med = np.empty((n, n, n), dtype=np.int64)
        # the center minimises the sum of distances; it is unique in a tree
        for a in range(n):
            for b in range(n):
                tot = d[a][:, None] + d[b][:, None] + d  # rows: candidate m, cols: c
                med[a, b, :] = np.argmin(tot, axis=0)
        return med

    def components_without(self, x: int) -> list[frozenset[int]]:
        """Connected components of the tree with vertex x deleted."""
        comps = []
        for start in self.adj[x]:
            seen = {start}
            stack = [start]
            while stack:
                u = stack.pop()
                for w in self.adj[u]:
                    if w != x and w not in seen:
                        seen.add(w)
                        stack.append(w)
            comps.append(frozenset(seen))
        return comps

    def component_index_without(self, x: int) -> np.ndarray:
        """Label each vertex by the neighbour of x it hangs off (x itself gets -1)."""
        lab = np.full(self.n, -1, dtype=np.int64)
        for v in range(self.n):
            if v == x:
                continue
            w = v
            while self.parents[x, w] != x:
                w = self.parents[x, w]
            lab[v] = w
        return lab

    def is_connected_subset(self, verts) -> bool:
        verts = set(verts)
        if not verts:
            return False
        start = next(iter(verts))
        seen = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for w in self.adj[u]:
                if w in verts and w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(verts)

    def hull(self, verts) -> frozenset[int]:
        """Smallest subtree containing the given vertices."""
        verts = list(verts)
        if not verts:
            return frozenset()
        out = {verts[0]}
        for v in verts[1:]:
            out.update(geodesic(self, verts[0], v))
        return frozenset(out)

    def ball(self, verts, radius: int) -> frozenset[int]:
        verts = list(verts)
        if not verts:
            return frozenset()
        near = self.dist[verts].min(axis=0) <= radius
        return frozenset(int(v) for v in np.flatnonzero(near))

    def to_dict(self) -> dict:
        return {"vertices": self.n, "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_dict(cls, d: dict) -> "SimplicialTree":
        return cls(d["vertices"], d["edges"])


@dataclass(frozen=True)
class TreeEdgeWall:
    """The two half-trees cut out by one edge.

    ``sides[0]`` contains ``edge[0]`` and ``sides[1]`` contains ``edge[1]``.
    """

    tree: SimplicialTree
    edge: tuple[int, int]
    sides: tuple[frozenset[int], frozenset[int]]

    def side_of(self, v: int) -> int:
        return 0 if v in self.sides[0] else 1


def geodesic(tree: SimplicialTree, u: int, v: int) -> list[int]:
    u = tree.check_vertex(u)
    v = tree.check_vertex(v)
    par = tree.parents[v]
    out = [u]
    while out[-1] != v:
        out.append(int(par[out[-1]]))
    return out


def tripod_median(tree: SimplicialTree, a: int, b: int, c: int) -> int:
    a, b, c = (tree.check_vertex(x) for x in (a, b, c))
    d = tree.dist
    path = geodesic(tree, a, b)
    k = (d[a, b] + d[a, c] - d[b, c]) // 2
    return path[int(k)]


def half_trees(tree: SimplicialTree, edge: Sequence[int]) -> TreeEdgeWall:
    u, v = _norm_edge(int(edge[0]), int(edge[1]))
    if (u, v) not in tree.edges:
        raise TreeError(f"edge {(u, v)} not in tree")
    d = tree.dist
    near_u = frozenset(int(w) for w in np.flatnonzero(d[u] < d[v]))
    near_v = frozenset(range(tree.n)) - near_u
    return TreeEdgeWall(tree, (u, v), (near_u, near_v))


def collapse_subtrees(tree: SimplicialTree, subtrees) -> tuple[SimplicialTree, list[int]]:
    """Identify each given connected vertex set to a single vertex.

    New ids follow the smallest old vertex of each class, so the map is
    monotone on representatives.
    """
    owner = [-1] * tree.n
    for i, s in enumerate(subtrees):
        s = set(s)
        if not s:
            raise TreeError("empty subtree in collapse")
        for v in s:
            tree.check_vertex(v)
            if owner[v] >= 0:
                raise TreeError(f"collapse sets overlap at vertex {v}")
            owner[v] = i
        if not tree.is_connected_subset(s):
            raise TreeError(f"collapse set {sorted(s)} is not connected")
    rep = {}
    for v in range(tree.n):
        key = ("s", owner[v]) if owner[v] >= 0 else ("v", v)
        if key not in rep:
            rep[key] = len(rep)
    vmap = [rep[("s", owner[v]) if owner[v] >= 0 else ("v", v)] for v in range(tree.n)]
    new_edges = {_norm_edge(vmap[u], vmap[v]) for u, v in tree.edges if vmap[u] != vmap[v]}
    return SimplicialTree(len(rep), new_edges), vmap
