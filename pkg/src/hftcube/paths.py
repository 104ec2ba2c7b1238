"""Normal cube paths between points of Q, and per-domain geodesic checks."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .cube import QComplex, distance
from .report import Report
from .tree import geodesic
from .walls import QHalfSpace, QWall, crosses, pocset_for, separating_walls, wall_table


def _side(hft, w: QWall, x: int) -> int:
    t = wall_table(hft)
    return int(t.side_arr[t.index[w]][x])


@dataclass
class NrOrder:
    """Separating walls of (p, q) ordered by distance from p.

    ``less[i, j]`` says wall i comes strictly before wall j: the side of
    wall i holding p sits inside the side of wall j holding p.
    """

    walls: list[QWall]
    less: np.ndarray

    def before(self, a: QWall, b: QWall) -> bool:
        i, j = self.walls.index(a), self.walls.index(b)
        return bool(self.less[i, j])

    def comparable(self, i: int, j: int) -> bool:
        return bool(self.less[i, j] or self.less[j, i])

    def minimal(self, alive=None) -> list[int]:
        idx = np.arange(len(self.walls)) if alive is None else np.asarray(alive, dtype=np.int64)
        if not len(idx):
            return []
        sub = self.less[np.ix_(idx, idx)]
        return [int(idx[k]) for k in np.flatnonzero(~sub.any(axis=0))]


def nr_order(qc: QComplex, p, q) -> NrOrder:
    qc.require(p)
    qc.require(q)
    hft = qc.hft
    walls = sorted(separating_walls(qc, p, q))
    pocset = pocset_for(qc)
    near = np.array([pocset.halfspace_id(QHalfSpace(w, _side(hft, w, p[hft.index[w.label]])))
                     for w in walls], dtype=np.int64)
    if not len(walls):
        return NrOrder([], np.zeros((0, 0), dtype=bool))
    return NrOrder(walls, pocset.nest[np.ix_(near, near)].copy())


@dataclass
class NormalPath:
    qc: QComplex
    points: list[tuple[int, ...]]
    steps: list[tuple[QWall, ...]] = field(default_factory=list)

    @property
    def length(self) -> int:
        return sum(len(s) for s in self.steps)

    def to_document(self) -> dict:
        widx = {w: i for i, w in enumerate(wall_table(self.qc.hft).walls)}
        return {
            "points": [self.qc.index[p] for p in self.points],
            "steps": [[widx[w] for w in s] for s in self.steps],
        }


class PathError(RuntimeError):
    pass


def normal_cube_path(qc: QComplex, p, q) -> NormalPath:
    """Flip all minimal separating walls at once until q is reached."""
    p, q = tuple(p), tuple(q)
    order = nr_order(qc, p, q)
    hft = qc.hft
    alive = list(range(len(order.walls)))
    z = p
    path = NormalPath(qc, [z])
    while alive:
        mins = order.minimal(alive)
        new = list(z)
        for i in mins:
            w = order.walls[i]
            k = hft.index[w.label]
            a, b = w.edge
            if z[k] not in (a, b) or new[k] != z[k]:
                raise PathError(f"minimal wall {w} is not adjacent to {z}")
            new[k] = b if z[k] == a else a
        z = tuple(new)
        if z not in qc:
            raise PathError(f"step left Q at {z}")
        path.points.append(z)
        path.steps.append(tuple(order.walls[i] for i in mins))
        gone = set(mins)
        alive = [i for i in alive if i not in gone]
    if z != q:
        raise PathError("flipping every separating wall did not reach the target")
    return path


def _dedup(seq):
    out = [seq[0]]
    for x in seq[1:]:
        if x != out[-1]:
            out.append(x)
    return out


def check_domain_geodesic(path, u: str, qc: QComplex | None = None) -> bool:
    """The u-coordinates, repeats removed, walk the tree geodesic with no backtracking.

    `path` is a NormalPath or any sequence of points (then pass `qc`).
    """
    if isinstance(path, NormalPath):
        qc, pts = path.qc, path.points
    else:
        pts = list(path)
        if qc is None:
            raise ValueError("a bare point sequence needs qc")
    if not pts:
        return True
    k = qc.hft.index[u]
    seq = _dedup([pt[k] for pt in pts])
    return seq == geodesic(qc.hft.trees[u], seq[0], seq[-1])


def verify_normal_path(path: NormalPath) -> Report:
    qc = path.qc
    hft = qc.hft
    p, q = path.points[0], path.points[-1]
    rep = Report("normal-cube-path")
    rep.add("points-in-Q", all(z in qc for z in path.points))
    d = distance(qc, p, q)
    rep.add("length-equals-distance", path.length == d, {"length": path.length, "distance": d})
    crossed = [w for s in path.steps for w in s]
    rep.add("crosses-separating-walls", sorted(crossed) == sorted(separating_walls(qc, p, q)))
    bad = [[str(w) for w in s] for s in path.steps
           if not all(crosses(hft, a, b) for a, b in itertools.combinations(s, 2))]
    rep.add("steps-pairwise-crossing", not bad, {"steps": bad[:5]} if bad else None)
    off = [u for u in hft.domains if not check_domain_geodesic(path, u)]
    rep.add("domain-geodesics", not off, {"domains": off} if off else None)
    rep.info["points"] = len(path.points)
    rep.info["length"] = path.length
    return rep
