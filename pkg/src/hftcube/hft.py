"""Hierarchical families of trees: data model, validator and file format.

A family has a finite list of domains, one relation per unordered pair of
distinct domains, a unit-edge tree per domain, a set of labels each placing
one marked vertex in every tree, and relative-projection vertices
``delta[(V, U)]`` in the tree of ``U`` whenever ``V`` is nested in or
transverse to ``U``.  The projection from the tree of ``U`` to the tree of a
nested ``V`` is never stored; it is read off the marked points.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from functools import cached_property
from typing import Iterable, Mapping

import networkx as nx
import numpy as np

from .report import Report
from .tree import SimplicialTree, TreeError

NESTED = "nested"          # first domain nested in the second
CONTAINS = "contains"      # second domain nested in the first
TRANSVERSE = "transverse"
ORTHOGONAL = "orthogonal"
EQUAL = "equal"

STRICT = "strict"
RELAXED = "relaxed"

FORMAT_NAME = "hftcube-instance"
FORMAT_VERSION = 1

_FLIP = {NESTED: CONTAINS, CONTAINS: NESTED, TRANSVERSE: TRANSVERSE, ORTHOGONAL: ORTHOGONAL}

# table codes used by the nested projection tables
AT_DELTA = -1
NO_LABEL = -2


class HftError(ValueError):
    pass


class _Undefined:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "UNDEFINED"

    def __bool__(self):
        return False


UNDEFINED = _Undefined()


class Hft:
    """A finite hierarchical family of trees.

    Structural well-formedness (known domains, valid vertex ids, one
    relation per pair) is enforced here; the axioms are checked by
    :func:`validate`.
    """

    def __init__(
        self,
        domains: Iterable[str],
        relations: Mapping[tuple[str, str], str],
        trees: Mapping[str, SimplicialTree],
        labels: Iterable[str],
        marked: Mapping[str, Mapping[str, int]],
        delta: Mapping[tuple[str, str], int],
        mode: str = STRICT,
    ):
        self.domains: tuple[str, ...] = tuple(domains)
        if len(set(self.domains)) != len(self.domains):
            raise HftError("duplicate domain ids")
        self.index = {u: i for i, u in enumerate(self.domains)}
        if mode not in (STRICT, RELAXED):
            raise HftError(f"unknown mode {mode!r}")
        self.mode = mode

        rel: dict[tuple[str, str], str] = {}
        for (u, v), r in relations.items():
            self._need(u)
            self._need(v)
            if u == v:
                raise HftError(f"relation given between {u} and itself")
            if r not in _FLIP:
                raise HftError(f"unknown relation {r!r}")
            if self.index[u] > self.index[v]:
                u, v, r = v, u, _FLIP[r]
            if (u, v) in rel and rel[(u, v)] != r:
                raise HftError(f"conflicting relations for {u}, {v}")
            rel[(u, v)] = r
        self._rel = rel

        self.trees: dict[str, SimplicialTree] = {}
        for u in self.domains:
            if u not in trees:
                raise HftError(f"no tree for domain {u}")
            self.trees[u] = trees[u]
        for u in trees:
            self._need(u)

        self.labels: tuple[str, ...] = tuple(labels)
        if len(set(self.labels)) != len(self.labels):
            raise HftError("duplicate labels")
        self.marked: dict[str, dict[str, int]] = {}
        for f in self.labels:
            if f not in marked:
                raise HftError(f"label {f} has no marked points")
            pts = {}
            for u in self.domains:
                if u not in marked[f]:
                    raise HftError(f"label {f} has no marked point in {u}")
                pts[u] = self._vertex(u, marked[f][u])
            self.marked[f] = pts

        self.delta: dict[tuple[str, str], int] = {}
        for (v, u), x in delta.items():
            self._need(v)
            self._need(u)
            self.delta[(v, u)] = self._vertex(u, x)

    def _need(self, u):
        if u not in self.index:
            raise HftError(f"unknown domain {u!r}")

    def _vertex(self, u, x) -> int:
        try:
            return self.trees[u].check_vertex(x)
        except TreeError as exc:
            raise HftError(f"domain {u}: {exc}") from None

    # relations ---------------------------------------------------------

    def rel(self, u: str, v: str) -> str | None:
        """Relation of u to v; NESTED means u is nested in v."""
        if u == v:
            return EQUAL
        if self.index[u] < self.index[v]:
            return self._rel.get((u, v))
        r = self._rel.get((v, u))
        return None if r is None else _FLIP[r]

    def nested(self, v: str, u: str) -> bool:
        return self.rel(v, u) == NESTED

    def transverse(self, u: str, v: str) -> bool:
        return self.rel(u, v) == TRANSVERSE

    def orthogonal(self, u: str, v: str) -> bool:
        return self.rel(u, v) == ORTHOGONAL

    def relation_items(self):
        """Canonical (u, v, relation) triples with u before v in domain order."""
        for i, u in enumerate(self.domains):
            for v in self.domains[i + 1:]:
                r = self._rel.get((u, v))
                if r is not None:
                    yield u, v, r

    @cached_property
    def top(self) -> str | None:
        """The unique domain every other domain nests into, if there is one."""
        maxima = [u for u in self.domains
                  if not any(self.rel(u, w) == NESTED for w in self.domains)]
        return maxima[0] if len(maxima) == 1 else None

    @cached_property
    def width(self) -> int:
        g = nx.Graph()
        g.add_nodes_from(self.domains)
        g.add_edges_from((u, v) for u, v, r in self.relation_items() if r == ORTHOGONAL)
        return max((len(c) for c in nx.find_cliques(g)), default=0)

    # projections -------------------------------------------------------

    def _nested_table(self, v: str, u: str) -> np.ndarray:
        tu = self.trees[u]
        d = self.delta.get((v, u))
        if d is None:
            raise HftError(f"no relative projection for {v} in {u}")
        comp = tu.component_index_without(d)
        table = np.full(tu.n, NO_LABEL, dtype=np.int64)
        table[d] = AT_DELTA
        for f in self.labels:
            x = self.marked[f][u]
            if x == d:
                continue
            hit = comp == comp[x]
            if table[x] == NO_LABEL:
                table[hit] = self.marked[f][v]
        return table

    @cached_property
    def nested_tables(self) -> dict[tuple[str, str], np.ndarray]:
        out = {}
        for v in self.domains:
            for u in self.domains:
                if self.rel(v, u) == NESTED and (v, u) in self.delta:
                    t = self._nested_table(v, u)
                    t.setflags(write=False)
                    out[(v, u)] = t
        return out

    # misc --------------------------------------------------------------

    def marked_tuple(self, f: str) -> tuple[int, ...]:
        return tuple(self.marked[f][u] for u in self.domains)

    def with_mode(self, mode: str) -> "Hft":
        return Hft(self.domains, dict(self._rel), self.trees, self.labels,
                   self.marked, self.delta, mode)

    def __eq__(self, other):
        return isinstance(other, Hft) and to_dict(self) == to_dict(other)

    def __hash__(self):
        return hash(dumps(self))

    def __repr__(self):
        sizes = ",".join(f"{u}:{self.trees[u].n}" for u in self.domains)
        return f"Hft(domains=[{sizes}], labels={list(self.labels)}, mode={self.mode})"


def delta_map(hft: Hft, v: str, u: str, x: int):
    """Image in the tree of ``v`` of vertex ``x`` of the tree of ``u`` (v nested in u).

    Returns :data:`UNDEFINED` at the relative projection point itself.
    """
    if not hft.nested(v, u):
        raise HftError(f"{v} is not nested in {u}")
    x = hft._vertex(u, x)
    val = int(hft.nested_tables[(v, u)][x])
    if val == AT_DELTA:
        return UNDEFINED
    if val == NO_LABEL:
        raise HftError(f"component of vertex {x} in {u} carries no marked point")
    return val


# ---------------------------------------------------------------------------
# validation


def _needs_delta(hft: Hft, v: str, u: str) -> bool:
    r = hft.rel(v, u)
    return r in (NESTED, TRANSVERSE)


def validate(hft: Hft) -> Report:
    rep = Report("validate")
    doms = hft.domains
    rep.info["mode"] = hft.mode
    rep.info["domains"] = len(doms)
    rep.info["labels"] = len(hft.labels)

    missing = [[u, v] for u, v in itertools.combinations(doms, 2) if hft.rel(u, v) is None]
    rep.add("relation-totality", not missing, {"missing": missing} if missing else None)

    bad_trans = []
    for u, v, w in itertools.permutations(doms, 3):
        if hft.nested(u, v) and hft.nested(v, w) and not hft.nested(u, w):
            bad_trans.append([u, v, w])
    top = hft.top
    po_ok = not bad_trans and top is not None
    detail = {}
    if bad_trans:
        detail["intransitive"] = bad_trans[:10]
    if top is None:
        detail["maximal"] = [u for u in doms if not any(hft.nested(u, w) for w in doms)]
    rep.add("nesting-order", po_ok, detail or None)
    rep.info["top"] = top

    if not hft.labels:
        rep.add("labels-present", False, "no labels")

    if hft.mode == STRICT:
        unmarked = []
        for u in doms:
            pts = {hft.marked[f][u] for f in hft.labels}
            unmarked += [[u, leaf] for leaf in hft.trees[u].leaves if leaf not in pts]
        rep.add("leaf-marking", not unmarked, {"unmarked_leaves": unmarked} if unmarked else None)

    wrong = []
    for v in doms:
        for u in doms:
            if u == v:
                continue
            want = _needs_delta(hft, v, u)
            have = (v, u) in hft.delta
            if want != have:
                wrong.append([v, u, "missing" if want else "unexpected"])
    rep.add("delta-placement", not wrong, {"pairs": wrong} if wrong else None)
    if wrong:
        rep.info["width"] = hft.width
        return rep

    unmarked_comp = []
    underived = []
    for (v, u), x in sorted(hft.delta.items(), key=lambda kv: (hft.index[kv[0][1]], hft.index[kv[0][0]])):
        pts = {hft.marked[f][u] for f in hft.labels}
        for comp in hft.trees[u].components_without(x):
            if not comp & pts:
                item = [v, u, sorted(comp)]
                if hft.nested(v, u):
                    underived.append(item)
                unmarked_comp.append(item)
    if hft.mode == STRICT:
        rep.add("component-marking", not unmarked_comp,
                {"unmarked": unmarked_comp} if unmarked_comp else None)
    else:
        rep.add("nested-derivability", not underived,
                {"unmarked": underived} if underived else None)

    incoherent = []
    for u, v, w in itertools.permutations(doms, 3):
        if hft.orthogonal(u, v) and hft.nested(v, w) and hft.rel(u, w) in (NESTED, TRANSVERSE):
            if hft.delta[(u, w)] != hft.delta[(v, w)]:
                incoherent.append([u, v, w])
    rep.add("delta-coherence", not incoherent, {"triples": incoherent} if incoherent else None)

    bgi = []
    for (v, u), x in hft.delta.items():
        if not hft.nested(v, u):
            continue
        comp = hft.trees[u].component_index_without(x)
        for f, g in itertools.combinations(hft.labels, 2):
            fu, gu = hft.marked[f][u], hft.marked[g][u]
            if fu == x or gu == x or comp[fu] != comp[gu]:
                continue
            if hft.marked[f][v] != hft.marked[g][v]:
                bgi.append({"inner": v, "outer": u, "labels": [f, g]})
    rep.add("bgi-coherence", not bgi, {"violations": bgi} if bgi else None)

    if not bgi and not underived:
        from .cube import is_consistent  # local: cube depends on this module

        bad = [f for f in hft.labels if not is_consistent(hft, hft.marked_tuple(f))]
        rep.add("marked-tuples-consistent", not bad, {"labels": bad} if bad else None)

    for u, v, w in itertools.permutations(doms, 3):
        if hft.nested(v, w) and hft.orthogonal(w, u) and not hft.orthogonal(v, u):
            rep.warnings.append(f"closure: {v} nested in {w}, {w} orthogonal to {u}, but {v} not orthogonal to {u}")
    if not bgi and not underived:
        viol = projection_consistency(hft)
        rep.info["projection_consistency"] = "ok" if not viol else f"{len(viol)} violations"
        rep.warnings += [f"{rule}: {' '.join(trip)}" for rule, trip in viol[:20]]

    rep.info["width"] = hft.width
    return rep


def projection_consistency(hft: Hft) -> list[tuple[str, tuple[str, str, str]]]:
    """Exact agreement rules between relative projections.

    These are not part of the axiom list checked by :func:`validate`, but
    without them Q can be disconnected and orthogonal half-spaces can fail
    to meet.  Each rule is returned with a witnessing triple.

    - nested-chain: u in v in w gives equal points in w.
    - nested-transverse: u in v, v transverse to w, u nested in or transverse
      to w gives equal points in w.
    - orthogonal: u orthogonal to v, both nested in or transverse to w, gives
      equal points in w.
    - transverse-in-container: u transverse to v, both nested in w, with
      distinct points in w; the projection of u's point into v is u's point in v.
    - transverse-over-nested: v nested in u, w transverse to both; where w's
      point in u projects into v, it is w's point in v.
    - transverse-triple: u, v, w pairwise transverse; if w sees u and v at
      different points then u sees v and w at the same point.
    """
    out = []
    near = (NESTED, TRANSVERSE)
    for u, v, w in itertools.permutations(hft.domains, 3):
        duw = hft.delta.get((u, w))
        dvw = hft.delta.get((v, w))
        if hft.nested(u, v) and hft.nested(v, w) and duw != dvw:
            out.append(("nested-chain", (u, v, w)))
        if hft.nested(u, v) and hft.transverse(v, w) and hft.rel(u, w) in near and duw != dvw:
            out.append(("nested-transverse", (u, v, w)))
        if (hft.orthogonal(u, v) and hft.rel(u, w) in near and hft.rel(v, w) in near
                and duw != dvw and hft.index[u] < hft.index[v]):
            out.append(("orthogonal", (u, v, w)))
        if hft.transverse(u, v) and hft.nested(v, w) and hft.nested(u, w) and duw != dvw:
            if delta_map(hft, v, w, duw) != hft.delta[(u, v)]:
                out.append(("transverse-in-container", (u, v, w)))
        if hft.nested(v, u) and hft.transverse(w, u) and hft.transverse(w, v):
            m = delta_map(hft, v, u, hft.delta[(w, u)])
            if m is not UNDEFINED and m != hft.delta[(w, v)]:
                out.append(("transverse-over-nested", (u, v, w)))
        if (hft.transverse(u, v) and hft.transverse(v, w) and hft.transverse(u, w)
                and duw != dvw and hft.delta[(v, u)] != hft.delta[(w, u)]):
            out.append(("transverse-triple", (u, v, w)))
    return out


# ---------------------------------------------------------------------------
# file format


def to_dict(hft: Hft) -> dict:
    rels = []
    for u, v, r in hft.relation_items():
        if r == CONTAINS:
            rels.append([v, u, NESTED])
        else:
            rels.append([u, v, r])
    order = sorted(hft.delta, key=lambda p: (hft.index[p[1]], hft.index[p[0]]))
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "kind": "hft",
        "mode": hft.mode,
        "domains": list(hft.domains),
        "relations": rels,
        "trees": [{"domain": u, **hft.trees[u].to_dict()} for u in hft.domains],
        "labels": list(hft.labels),
        "marked": [{"label": f, "points": [hft.marked[f][u] for u in hft.domains]}
                   for f in hft.labels],
        "delta": [[v, u, hft.delta[(v, u)]] for v, u in order],
    }


def from_dict(d: dict) -> Hft:
    if d.get("format") != FORMAT_NAME or d.get("kind", "hft") != "hft":
        raise HftError("not an hft instance document")
    domains = d["domains"]
    rels = {}
    for u, v, r in d["relations"]:
        if (u, v) in rels or (v, u) in rels:
            raise HftError(f"relation listed twice for {u}, {v}")
        rels[(u, v)] = r
    trees = {t["domain"]: SimplicialTree.from_dict(t) for t in d["trees"]}
    marked = {}
    for m in d["marked"]:
        pts = m["points"]
        if len(pts) != len(domains):
            raise HftError(f"label {m['label']}: expected {len(domains)} points")
        marked[m["label"]] = dict(zip(domains, pts))
    delta = {(v, u): x for v, u, x in d["delta"]}
    return Hft(domains, rels, trees, d["labels"], marked, delta, d.get("mode", STRICT))


def dump_document(doc: dict) -> str:
    """JSON with one top-level key per line and compact values, for stable diffs."""
    lines = ["{"]
    keys = list(doc)
    for i, k in enumerate(keys):
        v = doc[k]
        if isinstance(v, list) and v and isinstance(v[0], (list, dict)):
            body = ",\n".join("    " + json.dumps(x, separators=(", ", ": ")) for x in v)
            text = "[\n" + body + "\n  ]"
        else:
            text = json.dumps(v, separators=(", ", ": "))
        lines.append(f"  {json.dumps(k)}: {text}" + ("," if i < len(keys) - 1 else ""))
    lines.append("}")
    return "\n".join(lines) + "\n"


def dumps(hft: Hft) -> str:
    return dump_document(to_dict(hft))


def loads(text: str) -> Hft:
    return from_dict(json.loads(text))


def content_hash(hft: Hft) -> str:
    return hashlib.sha256(dumps(hft).encode()).hexdigest()


def save(hft: Hft, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(hft))


def load(path) -> Hft:
    with open(path) as fh:
        return loads(fh.read())
