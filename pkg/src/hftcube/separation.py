"""Separated hyperplanes, 0-separated chain distance, filling pairs and firewalls."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from .cube import QComplex, build_q
from .hft import NESTED, ORTHOGONAL, RELAXED, TRANSVERSE, Hft, HftError, validate
from .paths import nr_order
from .report import Report
from .tree import SimplicialTree
from .walls import Pocset, QWall, crosses, pocset_for, walls_of

DEFAULT_SUBSET_BUDGET = 10**6


class SeparationError(ValueError):
    pass


class SubsetBudgetExceeded(RuntimeError):
    pass


def _lies_in(pocset: Pocset, a: int, h: int) -> bool:
    """Wall a sits inside half-space h (one of a's half-spaces is nested in h)."""
    return bool(pocset.nest[2 * a, h] or pocset.nest[2 * a + 1, h])


def separates(pocset: Pocset, h: int, a: int, b: int) -> bool:
    """Wall h has walls a and b on opposite sides (all indices are pocset walls)."""
    return any(_lies_in(pocset, a, 2 * h + s) and _lies_in(pocset, b, 2 * h + 1 - s) for s in (0, 1))


def _facing_triple(pocset: Pocset, a: int, b: int, c: int) -> bool:
    hft = pocset.hft
    ws = pocset.walls
    if any(crosses(hft, ws[x], ws[y]) for x, y in ((a, b), (a, c), (b, c))):
        return False
    return not (separates(pocset, a, b, c) or separates(pocset, b, a, c) or separates(pocset, c, a, b))


def walls_crossing_both(qc: QComplex, w1: QWall, w2: QWall) -> list[QWall]:
    hft = qc.hft
    return [w for w in pocset_for(qc).walls if crosses(hft, w, w1) and crosses(hft, w, w2)]


def is_L_separated(qc: QComplex, w1: QWall, w2: QWall, L: int,
                   budget: int = DEFAULT_SUBSET_BUDGET) -> bool:
    """No facing-triple-free family of walls crossing both has more than L members.

    For L = 0 this is the absence of a wall crossing both.  For larger L the
    search looks for a facing-triple-free subset of size L + 1; being
    facing-triple-free passes to subsets, so that decides the question.
    """
    if L < 0:
        raise ValueError("L must be non-negative")
    pocset = pocset_for(qc)
    for w in (w1, w2):
        if w not in pocset.index:
            raise SeparationError(f"wall {w} is not a wall of this complex")
    if w1 == w2 or crosses(qc.hft, w1, w2):
        raise SeparationError(f"walls {w1} and {w2} are not disjoint")
    both = [pocset.index[w] for w in walls_crossing_both(qc, w1, w2)]
    if len(both) <= L:
        return True
    if L <= 1:
        return False  # any one or two walls are facing-triple-free
    if comb(len(both), L + 1) > budget:
        raise SubsetBudgetExceeded(f"{comb(len(both), L + 1)} subsets of size {L + 1} to check")
    for sub in itertools.combinations(both, L + 1):
        if not any(_facing_triple(pocset, a, b, c) for a, b, c in itertools.combinations(sub, 3)):
            return False
    return True


def is_zero_separated(qc: QComplex, w1: QWall, w2: QWall) -> bool:
    return is_L_separated(qc, w1, w2, 0)


@dataclass
class SepChain:
    walls: list[QWall]

    def __len__(self):
        return len(self.walls)

    def to_document(self, hft: Hft) -> list:
        idx = {w: i for i, w in enumerate(walls_of(hft))}
        return [{"wall": idx[w], "label": w.label, "edge": list(w.edge)} for w in self.walls]


def zero_sep_chain(qc: QComplex, p, q) -> SepChain:
    """A longest chain of separating walls of (p, q), pairwise 0-separated.

    Longest path over the order from p to q, with an arc between ordered
    walls that are 0-separated.  Checking consecutive members is enough: a
    wall crossing the first and the last member of an ordered triple must
    cross the middle one as well.
    """
    p, q = tuple(p), tuple(q)
    if p == q:
        qc.require(p)
        return SepChain([])
    order = nr_order(qc, p, q)
    n = len(order.walls)
    ok = np.zeros((n, n), dtype=bool)
    for i, j in zip(*np.nonzero(order.less)):
        a, b = order.walls[i], order.walls[j]
        ok[i, j] = not walls_crossing_both(qc, a, b)
    # topological order: count predecessors
    rank = order.less.sum(axis=0)
    topo = sorted(range(n), key=lambda i: (rank[i], i))
    best = [1] * n
    prev = [-1] * n
    for j in topo:
        for i in topo:
            if ok[i, j] and best[i] + 1 > best[j]:
                best[j] = best[i] + 1
                prev[j] = i
    end = max(range(n), key=lambda i: (best[i], -i))
    chain = []
    while end != -1:
        chain.append(order.walls[end])
        end = prev[end]
    return SepChain(chain[::-1])


def zero_sep_distance(qc: QComplex, p, q) -> int:
    return len(zero_sep_chain(qc, p, q))


def is_filling(hft: Hft, u: str, v: str, threshold: int = 1) -> bool:
    """No domain with tree diameter >= threshold is orthogonal to both u and v."""
    for z in hft.domains:
        if hft.trees[z].diameter >= threshold and hft.orthogonal(z, u) and hft.orthogonal(z, v):
            return False
    return True


# ---------------------------------------------------------------------------
# firewall


@dataclass
class FirewallHft:
    hft: Hft
    base: Hft
    base_of: dict  # firewall domain -> the base domain it guards
    threshold: int = 0


def firewall_name(u: str) -> str:
    return f"V[{u}]"


def firewall(hft: Hft, threshold: int = 0) -> FirewallHft:
    """Add a unit-interval domain V[U] under the top for every non-top U.

    V[U] is orthogonal to every domain not filling with U, transverse to the
    others (seen at U's own point there, or at the first label's point when
    U has none), and orthogonal to V[W] exactly when U is orthogonal to W.
    Both labels sit at 0 in the new trees, so the result is checked in
    relaxed mode.
    """
    if len(hft.labels) != 2:
        raise HftError("firewall needs exactly two labels")
    top = hft.top
    if top is None:
        raise HftError("firewall needs a unique maximal domain")
    x = hft.labels[0]
    base_doms = [u for u in hft.domains if u != top]
    names = {u: firewall_name(u) for u in base_doms}
    clash = set(names.values()) & set(hft.domains)
    if clash:
        raise HftError(f"firewall domain names already in use: {sorted(clash)}")

    doms = list(hft.domains) + [names[u] for u in base_doms]
    rel = {(u, v): r for u, v, r in hft.relation_items()}
    trees = dict(hft.trees)
    marked = {f: dict(hft.marked[f]) for f in hft.labels}
    delta = dict(hft.delta)
    for u in base_doms:
        vu = names[u]
        trees[vu] = SimplicialTree.path(1)
        for f in hft.labels:
            marked[f][vu] = 0
        rel[(vu, top)] = NESTED
        delta[(vu, top)] = hft.delta[(u, top)]
        for w in base_doms:
            if not is_filling(hft, u, w, threshold):
                rel[(vu, w)] = ORTHOGONAL
            else:
                rel[(vu, w)] = TRANSVERSE
                delta[(vu, w)] = hft.delta.get((u, w), hft.marked[x][w])
                delta[(w, vu)] = 0
    for u, w in itertools.combinations(base_doms, 2):
        a, b = names[u], names[w]
        if hft.orthogonal(u, w):
            rel[(a, b)] = ORTHOGONAL
        else:
            rel[(a, b)] = TRANSVERSE
            delta[(a, b)] = 0
            delta[(b, a)] = 0
    out = Hft(doms, rel, trees, hft.labels, marked, delta, RELAXED)
    rep = validate(out)
    if not rep.ok:
        raise HftError("firewall failed relaxed validation: "
                       + ", ".join(c.name for c in rep.failures))
    return FirewallHft(out, hft, {names[u]: u for u in base_doms}, threshold)


def verify_firewall(qc: QComplex, base_of: dict | None = None, threshold: int = 0) -> Report:
    """Disjoint wall pairs: 0-separated exactly when their labels are filling.

    With `base_of` (firewall domain -> base domain) the two structural facts
    are checked as well: walls of the top cross nothing, and each firewall
    wall crosses every wall whose label does not fill with its base domain.
    """
    hft = qc.hft
    pocset = pocset_for(qc)
    ws = pocset.walls
    rep = Report("firewall")
    bad, crossing_filling = [], []
    fill = {}
    for u, v in itertools.combinations_with_replacement(hft.domains, 2):
        fill[(u, v)] = fill[(v, u)] = is_filling(hft, u, v, threshold)
    # walls crossing a wall of label u: all walls with labels orthogonal to u
    ortho_walls = {u: [w for w in ws if hft.orthogonal(w.label, u)] for u in hft.domains}
    disjoint = 0
    for a, b in itertools.combinations(ws, 2):
        f = fill[(a.label, b.label)]
        if crosses(hft, a, b):
            if f:
                crossing_filling.append([str(a), str(b)])
            continue
        disjoint += 1
        zero = not any(hft.orthogonal(w.label, b.label) for w in ortho_walls[a.label])
        if zero != f:
            bad.append({"walls": [str(a), str(b)], "zero_separated": zero, "filling": f})
    rep.add("zero-separated-iff-filling", not bad, {"pairs": bad[:10], "count": len(bad)} if bad else None)
    rep.info["disjoint_pairs"] = disjoint
    rep.info["crossing_filling_pairs"] = len(crossing_filling)
    if crossing_filling:
        rep.warnings.append(f"{len(crossing_filling)} crossing wall pairs have filling labels "
                            f"(excluded), e.g. {crossing_filling[0]}")
    if base_of is not None:
        top = hft.top
        top_cross = [str(w) for w in ws if w.label == top and ortho_walls[top]]
        rep.add("top-walls-cross-nothing", not top_cross, {"walls": top_cross} if top_cross else None)
        miss = []
        for a in ws:
            if a.label not in base_of:
                continue
            u = base_of[a.label]
            for b in ws:
                if b.label not in base_of and b.label != top:
                    if not fill[(u, b.label)] and not crosses(hft, a, b):
                        miss.append([str(a), str(b)])
        rep.add("firewall-walls-cross-non-filling", not miss, {"pairs": miss[:10]} if miss else None)
    return rep


def build_firewall_q(hft: Hft, threshold: int = 0, budget: int | None = None) -> tuple[FirewallHft, QComplex]:
    fw = firewall(hft, threshold)
    qc = build_q(fw.hft) if budget is None else build_q(fw.hft, budget)
    return fw, qc


def top_distance(hft: Hft, a: str, b: str, top: str | None = None) -> int:
    """Distance in the top tree between the marked points of labels a and b."""
    top = top or hft.top
    return int(hft.trees[top].dist[hft.marked[a][top], hft.marked[b][top]])


def sep_table(words, threshold: int = 0) -> list[dict]:
    """Rows (word, top-tree distance, 0-separated chain distance) on firewall models."""
    from .instances import tree_of_flats_hft
    rows = []
    for word in words:
        h = tree_of_flats_hft(word)
        fw, qc = build_firewall_q(h, threshold)
        x, y = h.labels
        px = qc.points[qc.marked_index[x]]
        py = qc.points[qc.marked_index[y]]
        rows.append({"word": word, "top_distance": top_distance(h, x, y),
                     "zero_sep_distance": zero_sep_distance(qc, px, py),
                     "walls": len(pocset_for(qc).walls), "points": len(qc)})
    return rows
