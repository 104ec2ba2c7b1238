"""Cluster collapsing of reduced tree systems, and finite tree trimming."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .hft import STRICT, Hft, HftError, content_hash, dump_document
from .report import Report
from .tree import SimplicialTree, collapse_subtrees, geodesic


class PlanError(ValueError):
    pass


@dataclass
class ReducedTreeSystem:
    """Trees with connected shadow sets for nested pairs and points for transverse ones."""

    domains: list
    relations: dict
    trees: dict
    labels: list
    marked: dict                 # label -> domain -> vertex
    shadows: dict                # (V, U) with V nested in U -> connected vertex set of T_U
    points: dict                 # (V, U) with V transverse to U -> vertex of T_U
    R: int = 0
    r: int = 0
    mode: str = STRICT

    def __post_init__(self):
        if self.R < 0 or self.r < 0:
            raise ValueError("radius and merge separation must be non-negative")
        for (v, u), s in self.shadows.items():
            if not s or not self.trees[u].is_connected_subset(s):
                raise ValueError(f"shadow of {v} in {u} is not a connected vertex set")

    def with_params(self, R: int, r: int) -> "ReducedTreeSystem":
        return ReducedTreeSystem(self.domains, self.relations, self.trees, self.labels,
                                 self.marked, self.shadows, self.points, R, r, self.mode)

    def to_hft(self) -> Hft:
        """Read as an Hft directly; every shadow must already be a single vertex."""
        delta = dict(self.points)
        for (v, u), s in self.shadows.items():
            if len(s) != 1:
                raise ValueError(f"shadow of {v} in {u} has {len(s)} vertices")
            delta[(v, u)] = next(iter(s))
        return Hft(self.domains, self.relations, self.trees, self.labels,
                   self.marked, delta, self.mode)


@dataclass
class QuotientMap:
    """Per-domain vertex maps from the old trees onto the new ones."""

    domains: tuple
    maps: dict                   # domain -> list old vertex -> new vertex
    collapsed: dict = field(default_factory=dict)   # domain -> list of collapsed vertex sets

    def apply(self, p) -> tuple[int, ...]:
        return tuple(self.maps[u][x] for u, x in zip(self.domains, p))

    def apply_array(self, coords: np.ndarray) -> np.ndarray:
        out = np.empty_like(coords)
        for k, u in enumerate(self.domains):
            out[:, k] = np.asarray(self.maps[u])[coords[:, k]]
        return out

    def is_identity(self) -> bool:
        return all(m == list(range(len(m))) for m in self.maps.values())

    def to_document(self, base: Hft) -> dict:
        return {
            "format": "hftcube-instance",
            "version": 1,
            "kind": "quotient-map",
            "base": content_hash(base),
            "maps": [{"domain": u, "map": list(self.maps[u])} for u in self.domains],
        }


def _cluster(tree: SimplicialTree, seeds, R: int, r: int) -> list[frozenset[int]]:
    clusters = [tree.ball(s, R) for s in seeds]
    d = tree.dist
    changed = True
    while changed:
        changed = False
        for i, j in itertools.combinations(range(len(clusters)), 2):
            a, b = clusters[i], clusters[j]
            gap = d[np.ix_(sorted(a), sorted(b))].min()
            if gap <= r:
                merged = tree.hull(a | b)
                clusters = [c for k, c in enumerate(clusters) if k not in (i, j)] + [merged]
                changed = True
                break
    return sorted(clusters, key=min)


def collapse_clusters(rts: ReducedTreeSystem) -> tuple[Hft, QuotientMap]:
    """Collapse neighbourhoods of shadows and marked points, merging close ones."""
    maps, new_trees, collapsed = {}, {}, {}
    for u in rts.domains:
        t = rts.trees[u]
        seeds = [s for (v, w), s in rts.shadows.items() if w == u]
        seeds += [{rts.marked[f][u]} for f in rts.labels]
        clusters = _cluster(t, seeds, rts.R, rts.r)
        new_trees[u], maps[u] = collapse_subtrees(t, clusters)
        collapsed[u] = [c for c in clusters if len(c) > 1]
    delta = {}
    for (v, u), s in rts.shadows.items():
        imgs = {maps[u][x] for x in s}
        if len(imgs) != 1:
            raise HftError(f"shadow of {v} in {u} did not collapse to a point")
        delta[(v, u)] = imgs.pop()
    for (v, u), x in rts.points.items():
        delta[(v, u)] = maps[u][x]
    marked = {f: {u: maps[u][rts.marked[f][u]] for u in rts.domains} for f in rts.labels}
    hft = Hft(rts.domains, rts.relations, new_trees, rts.labels, marked, delta, rts.mode)
    return hft, QuotientMap(tuple(rts.domains), maps, collapsed)


# ---------------------------------------------------------------------------
# trimming


@dataclass
class TrimPlan:
    subtrees: dict               # domain -> list of vertex sets
    budget: int                  # B: max diameter and max count per edge component
    allow_special: bool = False  # permit sets that contain marked or projection points

    @classmethod
    def from_edges(cls, hft: Hft, edges: Mapping[str, list], budget: int,
                   allow_special: bool = False) -> "TrimPlan":
        """Plan whose sets are the connected components of the given edge sets."""
        subs = {}
        for u, es in edges.items():
            parent = {}

            def find(a):
                while parent.setdefault(a, a) != a:
                    a = parent[a]
                return a

            for a, b in es:
                if not hft.trees[u].has_edge(a, b):
                    raise PlanError(f"{(a, b)} is not an edge of {u}")
                parent[find(a)] = find(b)
            groups = {}
            for v in parent:
                groups.setdefault(find(v), set()).add(v)
            subs[u] = sorted((frozenset(g) for g in groups.values()), key=min)
        return cls(subs, budget, allow_special)

    def union(self, other: "TrimPlan") -> "TrimPlan":
        subs = {u: list(s) for u, s in self.subtrees.items()}
        for u, s in other.subtrees.items():
            subs.setdefault(u, []).extend(s)
        return TrimPlan(subs, max(self.budget, other.budget), self.allow_special or other.allow_special)

    def to_document(self, base: Hft) -> dict:
        return {
            "format": "hftcube-instance",
            "version": 1,
            "kind": "trim-plan",
            "base": content_hash(base),
            "budget": self.budget,
            "allow_special": self.allow_special,
            "subtrees": [{"domain": u, "sets": [sorted(s) for s in self.subtrees[u]]}
                         for u in base.domains if self.subtrees.get(u)],
        }

    def dumps(self, base: Hft) -> str:
        return dump_document(self.to_document(base))

    @classmethod
    def from_document(cls, doc: dict, base: Hft | None = None) -> "TrimPlan":
        if doc.get("kind") != "trim-plan":
            raise PlanError("not a trim plan document")
        if base is not None and doc.get("base") != content_hash(base):
            raise PlanError("plan refers to a different base instance")
        subs = {e["domain"]: [frozenset(s) for s in e["sets"]] for e in doc["subtrees"]}
        return cls(subs, int(doc["budget"]), bool(doc.get("allow_special", False)))


def special_vertices(hft: Hft, u: str) -> set[int]:
    pts = {hft.marked[f][u] for f in hft.labels}
    pts |= {x for (v, w), x in hft.delta.items() if w == u}
    return pts


def plan_problems(hft: Hft, plan: TrimPlan) -> list[str]:
    out = []
    for u, sets in plan.subtrees.items():
        if u not in hft.index:
            out.append(f"unknown domain {u}")
            continue
        t = hft.trees[u]
        used: set[int] = set()
        for s in sets:
            s = set(s)
            if not s or not all(0 <= v < t.n for v in s):
                out.append(f"{u}: bad vertex set {sorted(s)}")
                continue
            if used & s:
                out.append(f"{u}: sets overlap at {sorted(used & s)}")
            used |= s
            if not t.is_connected_subset(s):
                out.append(f"{u}: {sorted(s)} is not connected")
                continue
            sl = sorted(s)
            diam = int(t.dist[np.ix_(sl, sl)].max())
            if diam > plan.budget:
                out.append(f"{u}: {sl} has diameter {diam} > {plan.budget}")
        if plan.allow_special:
            if len(sets) > plan.budget:
                out.append(f"{u}: {len(sets)} sets exceed the budget {plan.budget}")
            continue
        special = special_vertices(hft, u)
        hit = sorted(used & special)
        if hit:
            out.append(f"{u}: special vertices {hit} inside collapse sets")
        # edge components: pieces of the tree between special vertices
        rest = [v for v in range(t.n) if v not in special]
        comp = {}
        for v in rest:
            if v in comp:
                continue
            stack, comp[v] = [v], v
            while stack:
                a = stack.pop()
                for b in t.adj[a]:
                    if b not in special and b not in comp:
                        comp[b] = v
                        stack.append(b)
        counts = {}
        for s in sets:
            key = comp.get(min(s))
            counts[key] = counts.get(key, 0) + 1
        over = {k: c for k, c in counts.items() if k is not None and c > plan.budget}
        if over:
            out.append(f"{u}: more than {plan.budget} sets in one edge component")
    return out


def trim(hft: Hft, plan: TrimPlan) -> tuple[Hft, QuotientMap]:
    problems = plan_problems(hft, plan)
    if problems:
        raise PlanError("; ".join(problems))
    maps, trees, collapsed = {}, {}, {}
    for u in hft.domains:
        sets = [set(s) for s in plan.subtrees.get(u, [])]
        trees[u], maps[u] = collapse_subtrees(hft.trees[u], sets)
        collapsed[u] = [frozenset(s) for s in sets if len(s) > 1]
    marked = {f: {u: maps[u][hft.marked[f][u]] for u in hft.domains} for f in hft.labels}
    delta = {(v, u): maps[u][x] for (v, u), x in hft.delta.items()}
    rels = {(u, v): r for u, v, r in hft.relation_items()}
    new = Hft(hft.domains, rels, trees, hft.labels, marked, delta, hft.mode)
    return new, QuotientMap(hft.domains, maps, collapsed)


def _collapsed_edge_counts(tree: SimplicialTree, vmap) -> np.ndarray:
    """cnt[a, b] = number of edges on geodesic(a, b) whose ends share an image."""
    n = tree.n
    cnt = np.zeros((n, n), dtype=np.int64)
    for a in range(n):
        for b in range(a + 1, n):
            path = geodesic(tree, a, b)
            c = sum(1 for s, t in zip(path, path[1:]) if vmap[s] == vmap[t])
            cnt[a, b] = cnt[b, a] = c
    return cnt


def _separating_diameter(tree: SimplicialTree, sets, a: int, b: int) -> int:
    path = geodesic(tree, a, b)
    pe = set(zip(path, path[1:])) | set(zip(path[1:], path))
    tot = 0
    for s in sets:
        if any((x, y) in pe for x in s for y in s):
            sl = sorted(s)
            tot += int(tree.dist[np.ix_(sl, sl)].max())
    return tot


def verify_trim(qc, qc2, qmap: QuotientMap, plan: TrimPlan | None = None,
                median_samples: int = 100, exhaustive_medians: int = 40, seed: int = 0) -> Report:
    """Check that the coordinate-wise map Q -> Q' is onto, drops distance exactly, keeps medians."""

    rep = Report("verify-trim")
    hft, hft2 = qc.hft, qc2.hft
    img = qmap.apply_array(qc.coords)
    idx2 = [qc2.index.get(tuple(row)) for row in img.tolist()]
    missing = [qc.points[i] for i, j in enumerate(idx2) if j is None]
    rep.add("image-in-target", not missing, {"outside": missing[:10]} if missing else None)
    if missing:
        return rep
    idx2 = np.array(idx2, dtype=np.int64)
    hit = set(idx2.tolist())
    unhit = [qc2.points[j] for j in range(len(qc2)) if j not in hit]
    rep.add("surjective", not unhit, {"unreached": unhit[:10]} if unhit else None)

    d1 = qc.distance_matrix
    d2 = qc2.distance_matrix[np.ix_(idx2, idx2)]
    drop = d1 - d2
    expect = np.zeros_like(d1)
    for k, u in enumerate(hft.domains):
        cnt = _collapsed_edge_counts(hft.trees[u], qmap.maps[u])
        col = qc.coords[:, k]
        expect += cnt[np.ix_(col, col)]
    bad = np.argwhere(drop != expect)
    rep.add("drop-equals-collapsed-edges", len(bad) == 0,
            {"pairs": [[qc.points[i], qc.points[j], int(drop[i, j]), int(expect[i, j])]
                       for i, j in bad[:5]]} if len(bad) else None)
    rep.add("drop-non-negative", bool((drop >= 0).all()))
    if plan is not None and len(qc) <= 400:
        worst = None
        for i, j in itertools.combinations(range(len(qc)), 2):
            if drop[i, j] == 0:
                continue
            bound = sum(_separating_diameter(hft.trees[u], plan.subtrees.get(u, []),
                                             qc.points[i][k], qc.points[j][k])
                        for k, u in enumerate(hft.domains))
            if drop[i, j] > bound:
                worst = [qc.points[i], qc.points[j], int(drop[i, j]), bound]
                break
        rep.add("drop-within-collapsed-diameter", worst is None, {"pair": worst} if worst else None)
    rep.info["max_drop"] = int(drop.max()) if len(qc) else 0

    n = len(qc)
    if n <= exhaustive_medians:
        triples = np.array(list(itertools.combinations_with_replacement(range(n), 3)), dtype=np.int64)
    else:
        rng = np.random.default_rng(seed)
        triples = rng.integers(0, n, size=(median_samples, 3))
    med1 = _median_coords(hft, qc.coords, triples)
    med2 = _median_coords(hft2, qc2.coords, idx2[triples])
    ok = (qmap.apply_array(med1) == med2).all(axis=1)
    rep.add("medians-preserved", bool(ok.all()),
            {"triples_checked": len(triples)} if ok.all() else
            {"bad": [[qc.points[t] for t in triples[i]] for i in np.flatnonzero(~ok)[:3]]})
    rep.info["triples_checked"] = int(len(triples))
    return rep


def _median_coords(hft: Hft, coords: np.ndarray, triples: np.ndarray) -> np.ndarray:
    out = np.empty((len(triples), coords.shape[1]), dtype=np.int64)
    for k, u in enumerate(hft.domains):
        a, b, c = (coords[triples[:, i], k] for i in range(3))
        out[:, k] = hft.trees[u].median_table[a, b, c]
    return out
