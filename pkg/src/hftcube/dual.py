"""Ultrafilters on the pocset, the dual cube complex, and the maps D and its inverse."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property

import networkx as nx
import numpy as np

from .cube import QComplex, bfs_distances
from .hft import Hft
from .report import Report
from .walls import Pocset, build_pocset, wall_table

BRUTE_FORCE_WALLS = 20
DEFAULT_DUAL_BUDGET = 10**6


class DualBudgetExceeded(RuntimeError):
    pass


class InternalContradiction(RuntimeError):
    pass


@dataclass(frozen=True, order=True)
class Ultrafilter:
    """One side per wall of the pocset, in pocset wall order."""

    sides: tuple[int, ...]

    def halfspace_ids(self) -> list[int]:
        return [2 * i + s for i, s in enumerate(self.sides)]

    def flip(self, i: int) -> "Ultrafilter":
        s = list(self.sides)
        s[i] ^= 1
        return Ultrafilter(tuple(s))


def orientation_consistent(pocset: Pocset, sides) -> bool:
    """Choice is built in; check that no chosen half-space sits inside an unchosen one."""
    chosen = np.array([2 * i + s for i, s in enumerate(sides)], dtype=np.int64)
    if not len(chosen):
        return True
    return not pocset.nest[np.ix_(chosen, chosen ^ 1)].any()


def to_ultrafilter(pocset: Pocset, p) -> Ultrafilter:
    """The map D: for every wall, the side holding p's coordinate."""
    hft = pocset.hft
    t = wall_table(hft)
    sides = []
    for w in pocset.walls:
        k = hft.index[w.label]
        sides.append(int(t.side_arr[t.index[w]][p[k]]))
    return Ultrafilter(tuple(sides))


def orientation_matrix(pocset: Pocset, coords: np.ndarray) -> np.ndarray:
    """Row i is D of the point with coordinates coords[i]."""
    hft = pocset.hft
    t = wall_table(hft)
    out = np.empty((len(coords), len(pocset.walls)), dtype=np.int8)
    for j, w in enumerate(pocset.walls):
        out[:, j] = t.side_arr[t.index[w]][coords[:, hft.index[w.label]]]
    return out


def from_ultrafilter(pocset: Pocset, uf: Ultrafilter) -> tuple[int, ...]:
    """The inverse map: intersect the chosen half-trees in every domain."""
    hft = pocset.hft
    t = wall_table(hft)
    out = []
    for u in hft.domains:
        mask = np.ones(hft.trees[u].n, dtype=bool)
        for w in pocset.walls:
            if w.label == u:
                i = pocset.index[w]
                mask &= t.side_arr[t.index[w]] == uf.sides[i]
        hits = np.flatnonzero(mask)
        if len(hits) != 1:
            raise InternalContradiction(
                f"chosen half-trees in {u} meet in {len(hits)} vertices, expected one")
        out.append(int(hits[0]))
    return tuple(out)


def minimal_walls(pocset: Pocset, uf: Ultrafilter) -> list[int]:
    """Walls whose chosen half-space is minimal among the chosen ones."""
    chosen = np.array(uf.halfspace_ids(), dtype=np.int64)
    if not len(chosen):
        return []
    below = pocset.nest[np.ix_(chosen, chosen)].any(axis=0)
    return [int(i) for i in np.flatnonzero(~below)]


class DualComplex:
    """Zero-cells are consistent orientations; edges flip one minimal half-space."""

    def __init__(self, pocset: Pocset, cells: list[Ultrafilter]):
        self.pocset = pocset
        self.cells = sorted(cells)
        self.index = {c: i for i, c in enumerate(self.cells)}

    def __len__(self):
        return len(self.cells)

    def __repr__(self):
        return f"DualComplex({len(self.cells)} zero-cells, {len(self.edges)} one-cells)"

    @cached_property
    def edges(self) -> list[tuple[int, int, int]]:
        """(i, j, wall index) with i < j for cells differing on exactly one wall."""
        out = []
        for i, c in enumerate(self.cells):
            for w in minimal_walls(self.pocset, c):
                j = self.index.get(c.flip(w))
                if j is not None and i < j:
                    out.append((i, j, w))
        return sorted(out)

    @cached_property
    def neighbours(self) -> list[list[int]]:
        nb: list[list[int]] = [[] for _ in self.cells]
        for i, j, _ in self.edges:
            nb[i].append(j)
            nb[j].append(i)
        return nb

    def graph_distances(self) -> np.ndarray:
        return bfs_distances(self.neighbours)

    def maximal_cubes_at(self, cell: Ultrafilter) -> list[list[int]]:
        """Maximal sets of pairwise transverse walls that can be flipped together at a cell."""
        mins = minimal_walls(self.pocset, cell)
        g = self.pocset.transverse_graph.subgraph(mins)
        return sorted(sorted(c) for c in nx.find_cliques(g)) if mins else [[]]

    @cached_property
    def dimension(self) -> int:
        return max((len(c) for cell in self.cells for c in self.maximal_cubes_at(cell)), default=0)

    def to_dot(self, name: str = "dual") -> str:
        walls = self.pocset.walls
        lines = [f"graph {name} {{", "  node [shape=point];"]
        for i, c in enumerate(self.cells):
            lines.append(f'  {i} [label="{"".join(map(str, c.sides))}"];')
        for i, j, w in self.edges:
            lines.append(f'  {i} -- {j} [wall={w}, label="{walls[w].label}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def enumerate_ultrafilters(pocset: Pocset, limit: int = BRUTE_FORCE_WALLS) -> list[Ultrafilter]:
    """Every consistent orientation, by filtering all 2^n candidates."""
    n = len(pocset.walls)
    if n > limit:
        raise DualBudgetExceeded(f"{n} walls exceed the brute-force limit {limit}")
    codes = np.arange(1 << n, dtype=np.int64)
    # A nested in B forbids choosing A together with the complement of B
    forbidden = set()
    for a, b in zip(*np.nonzero(pocset.nest)):
        wa, sa, wb, sb = a >> 1, a & 1, b >> 1, (b & 1) ^ 1
        forbidden.add(min((wa, sa, wb, sb), (wb, sb, wa, sa)))
    for wa, sa, wb, sb in sorted(forbidden):
        bad = (((codes >> wa) & 1) == sa) & (((codes >> wb) & 1) == sb)
        codes = codes[~bad]
    return sorted(Ultrafilter(tuple(int((c >> i) & 1) for i in range(n))) for c in codes.tolist())


def dualize(pocset: Pocset, seed: Ultrafilter | None = None,
            budget: int = DEFAULT_DUAL_BUDGET, method: str = "auto") -> DualComplex:
    """Build the dual complex.

    ``method`` is ``"brute"`` (all orientations, tiny pocsets only), ``"bfs"``
    (flood from a seed by flipping minimal half-spaces) or ``"auto"``.
    """
    if method == "auto":
        method = "brute" if len(pocset.walls) <= 12 else "bfs"
    if method == "brute":
        return DualComplex(pocset, enumerate_ultrafilters(pocset))
    if seed is None:
        hft = pocset.hft
        seed = to_ultrafilter(pocset, hft.marked_tuple(hft.labels[0]))
    if not orientation_consistent(pocset, seed.sides):
        raise InternalContradiction("seed orientation is not consistent")
    seen = {seed}
    dq = deque([seed])
    while dq:
        c = dq.popleft()
        for w in minimal_walls(pocset, c):
            d = c.flip(w)
            if d not in seen:
                seen.add(d)
                if len(seen) > budget:
                    raise DualBudgetExceeded(f"more than {budget} zero-cells")
                dq.append(d)
    return DualComplex(pocset, list(seen))


# ---------------------------------------------------------------------------
# verification


def _point_codes(qc: QComplex) -> tuple[np.ndarray, np.ndarray]:
    sizes = np.array([qc.hft.trees[u].n for u in qc.hft.domains], dtype=np.int64)
    radix = np.ones(len(sizes), dtype=np.int64)
    for k in range(len(sizes) - 2, -1, -1):
        radix[k] = radix[k + 1] * sizes[k + 1]
    return qc.coords @ radix, radix


def _coord_median(hft: Hft, coords: np.ndarray, a: int, b: int) -> np.ndarray:
    """Coordinate-wise medians of (a, b, c) for every row c."""
    out = np.empty_like(coords)
    for k, u in enumerate(hft.domains):
        out[:, k] = hft.trees[u].median_table[coords[a, k], coords[b, k], coords[:, k]]
    return out


def interval_masks(dist: np.ndarray) -> np.ndarray:
    """masks[a, c, z] says z lies on a geodesic from a to c."""
    n = len(dist)
    out = np.empty((n, n, n), dtype=bool)
    for a in range(n):
        out[a] = dist[a][None, :] + dist == dist[a][:, None]
    return out


def verify_duality(qc: QComplex, dual: DualComplex | None = None,
                   pocset: Pocset | None = None, triple_limit: int = 200,
                   samples: int = 2000, seed: int = 0) -> Report:
    rep = Report("verify-duality")
    pocset = pocset or (dual.pocset if dual is not None else build_pocset(qc.hft, qc))
    dual = dual or dualize(pocset)
    hft = qc.hft
    n = len(qc)
    rep.info["points"] = n
    rep.info["walls"] = len(pocset.walls)
    rep.info["zero_cells"] = len(dual)
    rep.info["one_cells"] = len(dual.edges)

    orient = orientation_matrix(pocset, qc.coords)
    ufs = [Ultrafilter(tuple(row)) for row in orient.tolist()]
    bad = [qc.points[i] for i, u in enumerate(ufs) if not orientation_consistent(pocset, u.sides)]
    rep.add("image-consistent", not bad, {"points": bad[:5]} if bad else None)

    image = [dual.index.get(u) for u in ufs]
    injective = len(set(ufs)) == n
    onto = None not in image and len(set(image)) == len(dual)
    rep.add("bijection", injective and onto and len(dual) == n,
            None if injective and onto else {"injective": injective, "onto": onto,
                                             "q": n, "cells": len(dual)})
    back_bad = []
    for c in dual.cells:
        try:
            p = from_ultrafilter(pocset, c)
        except InternalContradiction as exc:
            back_bad.append(str(exc))
            continue
        if p not in qc.index or ufs[qc.index[p]] != c:
            back_bad.append(list(p))
    rep.add("inverse-roundtrip", not back_bad, {"bad": back_bad[:5]} if back_bad else None)
    if not (injective and onto and len(dual) == n):
        return rep

    perm = np.array(image, dtype=np.int64)          # Q index -> dual index
    dd = dual.graph_distances()[np.ix_(perm, perm)]
    dq = qc.distance_matrix
    mism = np.argwhere(dd != dq)
    rep.add("isometry", len(mism) == 0,
            {"pairs": [[qc.points[i], qc.points[j], int(dq[i, j]), int(dd[i, j])]
                       for i, j in mism[:5]]} if len(mism) else None)

    codes, radix = _point_codes(qc)
    exhaustive = n <= triple_limit
    rep.info["triples"] = "exhaustive" if exhaustive else f"{samples} sampled"
    if exhaustive:
        pairs = [(a, b) for a in range(n) for b in range(a, n)]
    else:
        rng = np.random.default_rng(seed)
        pairs = [tuple(x) for x in rng.integers(0, n, size=(max(1, samples // 50), 2)).tolist()]

    maj_bad = []
    med_bad = []
    masks = interval_masks(dd) if exhaustive else None
    for a, b in pairs:
        med = _coord_median(hft, qc.coords, a, b)
        mcode = med @ radix
        pos = np.searchsorted(codes, mcode)
        pos = np.minimum(pos, n - 1)
        inq = codes[pos] == mcode
        if not inq.all():
            med_bad.append([qc.points[a], qc.points[b], "median outside Q"])
            continue
        oa, ob = orient[a], orient[b]
        maj = (oa & ob) | ((oa | ob) & orient)
        ok = (maj == orient[pos]).all(axis=1)
        if not ok.all():
            c = int(np.flatnonzero(~ok)[0])
            maj_bad.append([qc.points[a], qc.points[b], qc.points[c]])
        if masks is not None:
            cnt = (masks[a, b][None, :] & masks[a] & masks[b]).sum(axis=1)
            if not (cnt == 1).all():
                c = int(np.flatnonzero(cnt != 1)[0])
                med_bad.append([qc.points[a], qc.points[b], qc.points[c], int(cnt[c])])
            else:
                only = np.argmax(masks[a, b][None, :] & masks[a] & masks[b], axis=1)
                if not (only == pos).all():
                    med_bad.append([qc.points[a], qc.points[b], "median mismatch"])
    rep.add("majority-median", not maj_bad, {"triples": maj_bad[:5]} if maj_bad else None)
    if exhaustive:
        rep.add("median-graph", not med_bad, {"triples": med_bad[:5]} if med_bad else None)
    elif med_bad:
        rep.add("median-closure", False, {"triples": med_bad[:5]})

    rep.add("dimension-equals-width", dual.dimension == pocset.width,
            {"dimension": dual.dimension, "width": pocset.width})
    rep.info["dimension"] = dual.dimension
    return rep
