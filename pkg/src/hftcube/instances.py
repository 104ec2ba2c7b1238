"""Instance generators: grids, two-domain gadgets, tree-of-flats prefixes, fuzz."""

from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass

from .hft import NESTED, ORTHOGONAL, STRICT, TRANSVERSE, Hft, projection_consistency, validate
from .quotients import ReducedTreeSystem
from .tree import SimplicialTree

TOP = "S"


class GenerationError(RuntimeError):
    pass


def grid(lengths) -> Hft:
    """Product of intervals, labels x and y at opposite corners.

    With two or more factors the axes sit under a one-vertex top domain, so
    the family has a unique maximal domain without changing Q.
    """
    lengths = [int(n) for n in lengths]
    if not lengths or min(lengths) < 0:
        raise ValueError("grid needs at least one non-negative length")
    if len(lengths) == 1:
        t = SimplicialTree.path(lengths[0])
        return Hft([TOP], {}, {TOP: t}, ["x", "y"],
                   {"x": {TOP: 0}, "y": {TOP: lengths[0]}}, {})
    axes = [_axis_name(i) for i in range(len(lengths))]
    doms = axes + [TOP]
    trees = {a: SimplicialTree.path(n) for a, n in zip(axes, lengths)}
    trees[TOP] = SimplicialTree.point()
    rel = {(a, TOP): NESTED for a in axes}
    rel.update({(a, b): ORTHOGONAL for a, b in itertools.combinations(axes, 2)})
    marked = {"x": {u: 0 for u in doms},
              "y": {**{a: n for a, n in zip(axes, lengths)}, TOP: 0}}
    delta = {(a, TOP): 0 for a in axes}
    return Hft(doms, rel, trees, ["x", "y"], marked, delta)


def _axis_name(i: int) -> str:
    return "abcdefghijklmnopqr"[i] if i < 18 else f"ax{i}"


def transverse_gadget(n: int) -> Hft:
    """Two transverse paths U, V of length n under a one-vertex top."""
    if n < 1:
        raise ValueError("gadget length must be at least 1")
    doms = ["U", "V", TOP]
    trees = {"U": SimplicialTree.path(n), "V": SimplicialTree.path(n), TOP: SimplicialTree.point()}
    rel = {("U", "V"): TRANSVERSE, ("U", TOP): NESTED, ("V", TOP): NESTED}
    marked = {"a": {"U": 0, "V": 0, TOP: 0}, "b": {"U": n, "V": n, TOP: 0}}
    delta = {("V", "U"): 0, ("U", "V"): n, ("U", TOP): 0, ("V", TOP): 0}
    return Hft(doms, rel, trees, ["a", "b"], marked, delta)


def nested_gadget(n: int) -> Hft:
    """U nested in V, both paths of length n, projection point at the middle of V."""
    if n < 1:
        raise ValueError("gadget length must be at least 1")
    doms = ["U", "V"]
    trees = {"U": SimplicialTree.path(n), "V": SimplicialTree.path(n)}
    marked = {"a": {"U": 0, "V": 0}, "b": {"U": n, "V": n}}
    return Hft(doms, {("U", "V"): NESTED}, trees, ["a", "b"], marked, {("U", "V"): n // 2})


# ---------------------------------------------------------------------------
# tree of flats


_TOKEN = re.compile(r"([abc])(\d*)")


def parse_word(word: str) -> str:
    """Expand exponents: 'a2b2c' -> 'aabbc'.  Spaces are ignored."""
    word = word.replace(" ", "").replace("^", "")
    out = []
    pos = 0
    for m in _TOKEN.finditer(word):
        if m.start() != pos:
            break
        out.append(m.group(1) * (int(m.group(2)) if m.group(2) else 1))
        pos = m.end()
    if pos != len(word) or not word:
        raise ValueError(f"not a word over a, b, c: {word!r}")
    return "".join(out)


def gamma_word(blocks: int) -> str:
    """The first `blocks` blocks of a b c a^2 b^2 c a^3 b^3 c ..."""
    return "".join("a" * k + "b" * k + "c" for k in range(1, blocks + 1))


def tree_of_flats_prefix(word: str, R: int = 0, r: int = 0) -> ReducedTreeSystem:
    """Exact tree system for the hull of the identity and a word in Z^2 * Z.

    The top tree is a path with one vertex per c-free block; each block with
    nonzero displacement gives an orthogonal pair of axis domains whose
    shadow in the top tree is the block's vertex.  Axes of different blocks
    are transverse and project to the exit (earlier block) or entry (later
    block) corner.
    """
    letters = parse_word(word)
    blocks = letters.split("c")
    m = len(blocks) - 1
    top = "T"
    doms = [top]
    trees = {top: SimplicialTree.path(m)}
    x = {top: 0}
    y = {top: m}
    rel = {}
    shadows = {}
    flats = []  # (block position, [axis names])
    for i, blk in enumerate(blocks):
        na, nb = blk.count("a"), blk.count("b")
        if na == 0 and nb == 0:
            continue
        names = [f"a{i + 1}", f"b{i + 1}"]
        for nm, ln in zip(names, (na, nb)):
            doms.append(nm)
            trees[nm] = SimplicialTree.path(ln)
            x[nm] = 0
            y[nm] = ln
            rel[(nm, top)] = NESTED
            shadows[(nm, top)] = frozenset({i})
        rel[tuple(names)] = ORTHOGONAL
        flats.append(names)
    points = {}
    for (fi, early), (fj, late) in itertools.combinations(enumerate(flats), 2):
        for e in early:
            for l in late:
                rel[(e, l)] = TRANSVERSE
                points[(l, e)] = y[e]
                points[(e, l)] = 0
    return ReducedTreeSystem(
        domains=doms, relations=rel, trees=trees, labels=["x", "y"],
        marked={"x": x, "y": y}, shadows=shadows, points=points, R=R, r=r,
    )


def tree_of_flats_hft(word: str) -> Hft:
    return tree_of_flats_prefix(word).to_hft()


def c_edge_plan(rts_or_hft) -> dict:
    """All edges of the top tree, as collapse sets (one set per run of c-edges)."""
    t = rts_or_hft.trees["T"]
    return {"T": [set(range(t.n))]} if t.n > 1 else {}


# ---------------------------------------------------------------------------
# fuzzing


@dataclass(frozen=True)
class Caps:
    domains: int = 4
    vertices: int = 6
    labels: int = 2
    p_orthogonal: float = 0.4


def _random_tree(rng: random.Random, n: int) -> SimplicialTree:
    return SimplicialTree(n, [(k, rng.randrange(k)) for k in range(1, n)])


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, a):
        self.parent.setdefault(a, a)
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def random_hft(seed: int, caps: Caps = Caps(), attempts: int = 50) -> Hft:
    """Deterministic random family that passes strict validation.

    Relative projections and nested maps are sampled first; the labels are
    then drawn as consistent tuples, and every tree is cut down to the hull
    of its marked points so that leaves and complementary components end up
    marked.
    """
    rng = random.Random(seed)
    for _ in range(attempts):
        h = _try_random(rng, caps)
        if h is not None:
            return h
    raise GenerationError(f"seed {seed}: no valid family after {attempts} attempts")


def _try_random(rng: random.Random, caps: Caps):
    n = rng.randint(1, max(1, caps.domains))
    doms = [TOP] + [f"D{i}" for i in range(1, n)]
    parent = [None] + [rng.randrange(i) for i in range(1, n)]
    anc = [set() for _ in range(n)]
    for i in range(1, n):
        anc[i] = anc[parent[i]] | {parent[i]}
    depth = [len(a) for a in anc]

    rel: dict[tuple[int, int], str] = {}
    for i in range(n):
        for a in anc[i]:
            rel[(i, a)] = NESTED
    free = [(i, j) for i, j in itertools.combinations(range(n), 2)
            if i not in anc[j] and j not in anc[i]]
    free.sort(key=lambda p: (depth[p[0]] + depth[p[1]], p))

    def orth(a, b):
        return rel.get((a, b)) == ORTHOGONAL or rel.get((b, a)) == ORTHOGONAL

    for i, j in free:
        forced = any(orth(a, b) for a in anc[i] | {i} for b in anc[j] | {j}
                     if (a, b) != (i, j))
        rel[(i, j)] = ORTHOGONAL if forced or rng.random() < caps.p_orthogonal else TRANSVERSE

    def r(a, b):
        if (a, b) in rel:
            return rel[(a, b)]
        x = rel.get((b, a))
        return {NESTED: "contains"}.get(x, x)

    trees = [_random_tree(rng, rng.randint(1, max(1, caps.vertices))) for _ in range(n)]

    # relative projection points, tied together by the coherence rule
    pairs = [(v, u) for v in range(n) for u in range(n) if v != u and r(v, u) in (NESTED, TRANSVERSE)]
    # points in a common target that must agree: the coherence rule, plus
    # the nested-chain, nested-transverse and orthogonal agreement rules
    near = (NESTED, TRANSVERSE)
    uf = _UnionFind()
    for w in range(n):
        for u, v in itertools.permutations(range(n), 2):
            if w in (u, v):
                continue
            ruv, ruw, rvw = r(u, v), r(u, w), r(v, w)
            if ruv == ORTHOGONAL and ruw in near and rvw in near:
                uf.union((u, w), (v, w))
            elif ruv == NESTED and rvw == NESTED:
                uf.union((u, w), (v, w))
            elif ruv == NESTED and rvw == TRANSVERSE and ruw in near:
                uf.union((u, w), (v, w))
    base = {p: rng.randrange(trees[p[1]].n) for p in pairs}
    dpt = {p: base[uf.find(p)] for p in pairs}

    # nested maps: one target per complementary component
    nmap = {}
    for v, u in pairs:
        if r(v, u) == NESTED:
            comp = trees[u].component_index_without(dpt[(v, u)])
            tgt = {}
            for c in sorted(set(comp.tolist()) - {-1}):
                tgt[c] = rng.randrange(trees[v].n)
            nmap[(v, u)] = (comp, tgt)

    def ok_with(x, k):
        for j in range(n):
            if j == k or x[j] is None:
                continue
            rr = r(k, j)
            if rr == TRANSVERSE:
                if x[k] != dpt[(j, k)] and x[j] != dpt[(k, j)]:
                    return False
            elif rr == NESTED:  # k inside j
                if x[j] != dpt[(k, j)]:
                    comp, tgt = nmap[(k, j)]
                    if x[k] != tgt[int(comp[x[j]])]:
                        return False
            elif rr == "contains":
                if x[k] != dpt[(j, k)]:
                    comp, tgt = nmap[(j, k)]
                    if x[j] != tgt[int(comp[x[k]])]:
                        return False
        return True

    def sample():
        x = [None] * n
        budget = [2000]

        def go(k):
            if k == n:
                return True
            vals = list(range(trees[k].n))
            rng.shuffle(vals)
            for val in vals:
                budget[0] -= 1
                if budget[0] < 0:
                    return False
                x[k] = val
                if ok_with(x, k) and go(k + 1):
                    return True
            x[k] = None
            return False

        return tuple(x) if go(0) else None

    nlab = max(1, caps.labels)
    tuples = [sample() for _ in range(nlab)]
    if any(t is None for t in tuples):
        return None

    # cut every tree down to the hull of its marked points
    new_trees, relabel, gate = {}, [], []
    for k in range(n):
        hull = sorted(trees[k].hull({t[k] for t in tuples}))
        ren = {v: i for i, v in enumerate(hull)}
        sub = [(ren[a], ren[b]) for a, b in trees[k].edges if a in ren and b in ren]
        new_trees[doms[k]] = SimplicialTree(len(hull), sub)
        relabel.append(ren)
        # nearest hull vertex for every old vertex
        d = trees[k].dist
        gate.append({v: min(hull, key=lambda h: (d[v, h], h)) for v in range(trees[k].n)})

    labels = [f"f{i}" for i in range(nlab)] if nlab != 2 else ["x", "y"]
    marked = {f: {doms[k]: relabel[k][t[k]] for k in range(n)} for f, t in zip(labels, tuples)}
    delta = {(doms[v], doms[u]): relabel[u][gate[u][x]] for (v, u), x in dpt.items()}
    relations = {(doms[a], doms[b]): rr for (a, b), rr in rel.items()}
    hft = Hft(doms, relations, new_trees, labels, marked, delta, STRICT)
    if not validate(hft).ok or projection_consistency(hft):
        return None
    return hft
