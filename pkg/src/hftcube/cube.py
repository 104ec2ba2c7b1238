"""The consistent set Q: enumeration, l1 metric, medians and intervals.

Points are plain tuples of vertex ids aligned with ``hft.domains``.
"""

from __future__ import annotations

from collections import deque
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .hft import CONTAINS, NESTED, NO_LABEL, TRANSVERSE, Hft, HftError

DEFAULT_Q_BUDGET = 10**6
DEFAULT_ORACLE_BUDGET = 10**7


class BudgetExceeded(RuntimeError):
    pass


class NotInQ(ValueError):
    pass


class _Constraints:
    """The pairwise clauses of consistency, indexed by domain position."""

    def __init__(self, hft: Hft):
        idx = hft.index
        self.trans = []   # (i, di, j, dj): x_i == di or x_j == dj
        self.nest = []    # (i, j, dj, table): x_j == dj or x_i == table[x_j]
        doms = hft.domains
        for a, u in enumerate(doms):
            for v in doms[a + 1:]:
                r = hft.rel(u, v)
                if r == TRANSVERSE:
                    self.trans.append((idx[u], hft.delta[(v, u)], idx[v], hft.delta[(u, v)]))
                elif r == NESTED:
                    self.nest.append((idx[u], idx[v], hft.delta[(u, v)], hft.nested_tables[(u, v)]))
                elif r == CONTAINS:
                    self.nest.append((idx[v], idx[u], hft.delta[(v, u)], hft.nested_tables[(v, u)]))
        self.by_domain: list[list] = [[] for _ in doms]
        for c in self.trans:
            self.by_domain[c[0]].append(("t", c))
            self.by_domain[c[2]].append(("t", c))
        for c in self.nest:
            self.by_domain[c[0]].append(("n", c))
            self.by_domain[c[1]].append(("n", c))

    @staticmethod
    def _nest_ok(c, x) -> bool:
        i, j, dj, table = c
        xj = x[j]
        if xj == dj:
            return True
        t = table[xj]
        if t == NO_LABEL:
            raise HftError("projection undefined on an unmarked component")
        return x[i] == t

    def holds(self, x) -> bool:
        for i, di, j, dj in self.trans:
            if x[i] != di and x[j] != dj:
                return False
        return all(self._nest_ok(c, x) for c in self.nest)

    def holds_at(self, x, k: int) -> bool:
        """Clauses touching domain k only."""
        for kind, c in self.by_domain[k]:
            if kind == "t":
                if x[c[0]] != c[1] and x[c[2]] != c[3]:
                    return False
            elif not self._nest_ok(c, x):
                return False
        return True

    def mask(self, arr: np.ndarray) -> np.ndarray:
        """Vectorised consistency over the rows of an (N, d) array."""
        ok = np.ones(len(arr), dtype=bool)
        for i, di, j, dj in self.trans:
            ok &= (arr[:, i] == di) | (arr[:, j] == dj)
        for i, j, dj, table in self.nest:
            img = table[arr[:, j]]
            if np.any((img == NO_LABEL) & (arr[:, j] != dj)):
                raise HftError("projection undefined on an unmarked component")
            ok &= (arr[:, j] == dj) | (arr[:, i] == img)
        return ok


def constraints(hft: Hft) -> _Constraints:
    c = hft.__dict__.get("_constraints")
    if c is None:
        c = _Constraints(hft)
        hft.__dict__["_constraints"] = c
    return c


def _check_tuple(hft: Hft, tup) -> tuple[int, ...]:
    tup = tuple(tup)
    if len(tup) != len(hft.domains):
        raise ValueError(f"tuple has {len(tup)} coordinates, expected {len(hft.domains)}")
    for u, x in zip(hft.domains, tup):
        hft.trees[u].check_vertex(x)
    return tuple(int(x) for x in tup)


def is_consistent(hft: Hft, tup) -> bool:
    return constraints(hft).holds(_check_tuple(hft, tup))


class QComplex:
    """All consistent tuples of an Hft with single-edge adjacency."""

    def __init__(self, hft: Hft, points: Iterable[Sequence[int]]):
        self.hft = hft
        self.points: list[tuple[int, ...]] = sorted(tuple(int(x) for x in p) for p in points)
        self.index = {p: i for i, p in enumerate(self.points)}
        d = len(hft.domains)
        self.coords = np.array(self.points, dtype=np.int64).reshape(len(self.points), d)
        self.coords.setflags(write=False)
        self.marked_index = {f: self.index.get(hft.marked_tuple(f)) for f in hft.labels}

    def __len__(self):
        return len(self.points)

    def __contains__(self, p):
        return tuple(p) in self.index

    def __repr__(self):
        return f"QComplex({len(self.points)} points, {len(self.edges)} edges)"

    def require(self, p) -> int:
        i = self.index.get(tuple(p))
        if i is None:
            raise NotInQ(f"{tuple(p)} is not a consistent tuple of this complex")
        return i

    def point(self, coords: dict) -> tuple[int, ...]:
        """Build a point from a domain -> vertex mapping; single-vertex domains may be omitted."""
        out = []
        for u in self.hft.domains:
            if u in coords:
                out.append(int(coords[u]))
            elif self.hft.trees[u].n == 1:
                out.append(0)
            else:
                raise KeyError(f"coordinate for domain {u} missing")
        return tuple(out)

    def as_dict(self, p) -> dict:
        return dict(zip(self.hft.domains, p))

    @cached_property
    def adjacency(self) -> list[list[tuple[int, int]]]:
        """adjacency[i] lists (j, domain position) for neighbours j of point i."""
        adj: list[list[tuple[int, int]]] = [[] for _ in self.points]
        trees = [self.hft.trees[u] for u in self.hft.domains]
        for i, p in enumerate(self.points):
            for k, t in enumerate(trees):
                for w in t.adj[p[k]]:
                    if w > p[k]:
                        q = p[:k] + (w,) + p[k + 1:]
                        j = self.index.get(q)
                        if j is not None:
                            adj[i].append((j, k))
                            adj[j].append((i, k))
        for a in adj:
            a.sort()
        return adj

    @cached_property
    def edges(self) -> list[tuple[int, int, int]]:
        """Canonical (i, j, domain position) with i < j."""
        return sorted((i, j, k) for i, a in enumerate(self.adjacency) for j, k in a if i < j)

    @cached_property
    def distance_matrix(self) -> np.ndarray:
        n = len(self.points)
        dm = np.zeros((n, n), dtype=np.int64)
        for k, u in enumerate(self.hft.domains):
            col = self.coords[:, k]
            dm += self.hft.trees[u].dist[np.ix_(col, col)]
        dm.setflags(write=False)
        return dm

    def graph_distances(self) -> np.ndarray:
        """Hop distances in the adjacency graph, by BFS from every point."""
        return bfs_distances([[j for j, _ in a] for a in self.adjacency])

    def to_dot(self, name: str = "Q") -> str:
        doms = self.hft.domains
        lines = [f"graph {name} {{", "  node [shape=circle, fontsize=9];"]
        for i, p in enumerate(self.points):
            lab = ",".join(str(x) for x in p)
            lines.append(f'  {i} [label="{lab}", coords="{lab}"];')
        for i, j, k in self.edges:
            lines.append(f'  {i} -- {j} [label="{doms[k]}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def vertex_table(self) -> str:
        rows = ["index\t" + "\t".join(self.hft.domains)]
        rows += [f"{i}\t" + "\t".join(map(str, p)) for i, p in enumerate(self.points)]
        return "\n".join(rows) + "\n"

    def edge_table(self) -> str:
        rows = ["source\ttarget\tdomain"]
        rows += [f"{i}\t{j}\t{self.hft.domains[k]}" for i, j, k in self.edges]
        return "\n".join(rows) + "\n"


def bfs_distances(nbrs: Sequence[Sequence[int]]) -> np.ndarray:
    n = len(nbrs)
    out = np.full((n, n), -1, dtype=np.int64)
    for s in range(n):
        row = out[s]
        row[s] = 0
        dq = deque([s])
        while dq:
            u = dq.popleft()
            du = row[u] + 1
            for w in nbrs[u]:
                if row[w] < 0:
                    row[w] = du
                    dq.append(w)
    return out


def build_q(hft: Hft, budget: int = DEFAULT_Q_BUDGET) -> QComplex:
    """Flood-fill Q from a marked tuple through single-edge consistent moves."""
    if not hft.labels:
        raise HftError("no labels: nothing to seed the enumeration")
    cons = constraints(hft)
    seed = hft.marked_tuple(hft.labels[0])
    if not cons.holds(seed):
        raise HftError(f"marked tuple of {hft.labels[0]} is not consistent")
    trees = [hft.trees[u] for u in hft.domains]
    seen = {seed}
    dq = deque([seed])
    while dq:
        p = dq.popleft()
        for k, t in enumerate(trees):
            for w in t.adj[p[k]]:
                q = p[:k] + (w,) + p[k + 1:]
                if q in seen or not cons.holds_at(q, k):
                    continue
                seen.add(q)
                if len(seen) > budget:
                    raise BudgetExceeded(f"more than {budget} consistent points")
                dq.append(q)
    return QComplex(hft, seen)


def enumerate_q_naive(hft: Hft, budget: int = DEFAULT_ORACLE_BUDGET, chunk: int = 1 << 17) -> set:
    """Filter the full coordinate product; independent of the flood fill."""
    sizes = [hft.trees[u].n for u in hft.domains]
    total = int(np.prod(sizes, dtype=object))
    if total > budget:
        raise BudgetExceeded(f"coordinate product has {total} tuples (budget {budget})")
    cons = constraints(hft)
    out = set()
    for start in range(0, total, chunk):
        flat = np.arange(start, min(total, start + chunk))
        arr = np.stack(np.unravel_index(flat, sizes), axis=1) if sizes else np.zeros((len(flat), 0), int)
        ok = cons.mask(arr)
        out.update(map(tuple, arr[ok].tolist()))
    return out


def distance(qc: QComplex, p, q) -> int:
    return int(qc.distance_matrix[qc.require(p), qc.require(q)])


def median(qc: QComplex, a, b, c) -> tuple[int, ...]:
    for x in (a, b, c):
        qc.require(x)
    m = tuple(int(qc.hft.trees[u].median_table[a[k], b[k], c[k]])
              for k, u in enumerate(qc.hft.domains))
    qc.require(m)  # closure under medians; failing here means a broken model
    return m


def interval(qc: QComplex, a, b) -> set:
    qc.require(a)
    qc.require(b)
    mask = np.ones(len(qc), dtype=bool)
    for k, u in enumerate(qc.hft.domains):
        d = qc.hft.trees[u].dist
        col = qc.coords[:, k]
        mask &= d[a[k], col] + d[col, b[k]] == d[a[k], b[k]]
    return {qc.points[i] for i in np.flatnonzero(mask)}
