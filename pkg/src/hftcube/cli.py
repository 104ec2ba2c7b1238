"""Command-line front end.

Every subcommand builds one Report.  A short text summary goes to stdout
(or the JSON report with --json); --out DIR receives report.json plus any
tables (tab-separated) and figures the subcommand produces.  Exit status is
0 on pass, 1 on failure or exceeded budget, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .cube import (DEFAULT_ORACLE_BUDGET, DEFAULT_Q_BUDGET, BudgetExceeded, NotInQ, build_q,
                   distance, enumerate_q_naive, interval, median)
from .dual import DualBudgetExceeded, dualize, verify_duality
from .hft import RELAXED, STRICT, HftError, dumps, load, validate
from .instances import (Caps, GenerationError, c_edge_plan, gamma_word, grid, nested_gadget,
                        random_hft, transverse_gadget, tree_of_flats_prefix)
from .paths import normal_cube_path, verify_normal_path
from .quotients import PlanError, TrimPlan, collapse_clusters, plan_problems, trim, verify_trim
from .report import Report
from .separation import build_firewall_q, sep_table, verify_firewall, zero_sep_chain
from .walls import EmptyHalfSpace, build_pocset, dimension, pocset_for, wall_table_text

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# instance sources


def parse_gen(spec: str):
    """Generator spec -> (hft, reduced tree system or None).

    grid:2,3  transverse:N  nested:N  flats:WORD  gamma:K  random:SEED[:D,V,L]
    """
    kind, _, arg = spec.partition(":")
    try:
        if kind == "grid":
            return grid([int(x) for x in arg.split(",")]), None
        if kind == "transverse":
            return transverse_gadget(int(arg)), None
        if kind == "nested":
            return nested_gadget(int(arg)), None
        if kind in ("flats", "gamma"):
            word = arg if kind == "flats" else gamma_word(int(arg))
            rts = tree_of_flats_prefix(word)
            return rts.to_hft(), rts
        if kind == "random":
            seed, _, caps = arg.partition(":")
            c = Caps(*[int(x) for x in caps.split(",")]) if caps else Caps()
            return random_hft(int(seed), c), None
    except (ValueError, TypeError) as exc:
        raise UsageError(f"bad generator spec {spec!r}: {exc}") from None
    raise UsageError(f"unknown generator kind {kind!r}")


def _source(args):
    if args.instance:
        try:
            return load(args.instance), None
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot read instance {args.instance}: {exc}") from None
    if args.gen:
        return parse_gen(args.gen)
    raise UsageError("give --instance FILE or --gen SPEC")


def _hft(args):
    hft, rts = _source(args)
    if args.mode:
        hft = hft.with_mode(args.mode)
    return hft, rts


def _point(qc, text: str):
    hft = qc.hft
    if text in hft.labels:
        return hft.marked_tuple(text)
    try:
        p = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"{text!r} is neither a label nor a coordinate list") from None
    if len(p) != len(hft.domains):
        raise UsageError(f"point {text!r} needs {len(hft.domains)} coordinates")
    return p


def _ends(qc, args):
    labels = qc.hft.labels
    a = _point(qc, args.source) if args.source else qc.hft.marked_tuple(labels[0])
    b = _point(qc, args.target) if args.target else qc.hft.marked_tuple(labels[-1])
    return a, b


# ---------------------------------------------------------------------------
# output helpers


class Output:
    def __init__(self, args):
        self.dir = Path(args.out) if args.out else None
        self.dot = args.dot
        if self.dir:
            self.dir.mkdir(parents=True, exist_ok=True)

    def table(self, name: str, header, rows):
        if not self.dir:
            return
        with open(self.dir / name, "w", newline="") as fh:
            w = csv.writer(fh, delimiter="\t", lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)

    def text(self, name: str, content: str):
        if self.dir:
            (self.dir / name).write_text(content)

    def figure(self, name: str, fn, *a, **kw):
        if self.dir:
            fn(*a, self.dir / name, **kw)

    def graph(self, content: str):
        if self.dot:
            Path(self.dot).write_text(content)


def _build(hft, args):
    return build_q(hft, args.budget_q)


# ---------------------------------------------------------------------------
# subcommands; each returns (report, text summary)


def cmd_validate(args, out):
    hft, _ = _hft(args)
    rep = validate(hft)
    return rep, str(rep)


def cmd_build(args, out):
    from .plotting import plot_q
    hft, _ = _hft(args)
    qc = _build(hft, args)
    rep = Report("build")
    rep.info.update(points=len(qc), edges=len(qc.edges), dimension=dimension(qc))
    reach = (qc.graph_distances()[0] >= 0).all() if len(qc) else True
    rep.add("connected", bool(reach))
    size = int(np.prod([hft.trees[u].n for u in hft.domains], dtype=object))
    if size <= args.budget_oracle:
        naive = enumerate_q_naive(hft, args.budget_oracle)
        rep.add("naive-oracle-agrees", naive == set(qc.points), {"naive": len(naive)})
    else:
        rep.warnings.append(f"naive oracle skipped: {size} tuples exceed the oracle budget")
    out.text("vertices.tsv", qc.vertex_table())
    out.text("edges.tsv", qc.edge_table())
    out.figure("q.png", plot_q, qc)
    out.graph(qc.to_dot())
    return rep, f"{rep}\npoints {len(qc)}  edges {len(qc.edges)}"


def cmd_dualize(args, out):
    hft, _ = _hft(args)
    qc = _build(hft, args)
    pocset = build_pocset(hft, qc)
    rep = pocset.check_axioms()
    rep.title = "dualize"
    rep.warnings += pocset.warnings
    dual = dualize(pocset, method=args.method)
    dim = dual.dimension
    rep.add("dimension-equals-width", dim == pocset.width, {"dimension": dim, "width": pocset.width})
    rep.info.update(walls=len(pocset.walls), zero_cells=len(dual), one_cells=len(dual.edges),
                    dimension=dim)
    out.text("walls.tsv", wall_table_text(hft))
    out.graph(dual.to_dot())
    return rep, f"{rep}\nzero-cells {len(dual)}  one-cells {len(dual.edges)}  dimension {dim}"


def cmd_verify_duality(args, out):
    hft, _ = _hft(args)
    qc = _build(hft, args)
    pocset = build_pocset(hft, qc)
    dual = dualize(pocset, method=args.method)
    rep = verify_duality(qc, dual, pocset, seed=args.seed)
    out.graph(dual.to_dot())
    return rep, str(rep)


def cmd_median(args, out):
    hft, _ = _hft(args)
    qc = _build(hft, args)
    pts = [_point(qc, t) for t in args.points]
    for p in pts:
        if p not in qc:
            raise NotInQ(f"{p} is not in Q")
    m = median(qc, *pts)
    rep = Report("median")
    rep.info["median"] = list(m)
    rep.add("in-Q", m in qc)
    a, b, c = pts
    meet = interval(qc, a, b) & interval(qc, a, c) & interval(qc, b, c)
    rep.add("intervals-meet-in-median", meet == {m}, {"meet": sorted(meet)[:5]} if meet != {m} else None)
    return rep, f"{rep}\nmedian {','.join(map(str, m))}"


def cmd_path(args, out):
    from .plotting import plot_q
    hft, _ = _hft(args)
    qc = _build(hft, args)
    a, b = _ends(qc, args)
    path = normal_cube_path(qc, a, b)
    rep = verify_normal_path(path)
    rep.info["path"] = [list(p) for p in path.points]
    rep.info.update(path.to_document())
    out.table("path.tsv", ["step", "point", "flipped"],
              [[i, ",".join(map(str, p)), " ".join(map(str, path.steps[i - 1])) if i else ""]
               for i, p in enumerate(path.points)])
    out.figure("path.png", plot_q, qc, highlight=path.points, title="normal cube path")
    lines = [" -> ".join("(" + ",".join(map(str, p)) + ")" for p in path.points)]
    return rep, f"{rep}\n{lines[0]}"


def _trim_plan(args, hft, rts):
    if args.plan:
        try:
            doc = json.loads(Path(args.plan).read_text())
            return TrimPlan.from_document(doc, hft)
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot read plan {args.plan}: {exc}") from None
    if rts is not None:
        sets = c_edge_plan(rts)
        budget = max((hft.trees[u].diameter for u in sets), default=0)
        return TrimPlan(sets, budget, allow_special=True)
    raise UsageError("trim needs --plan FILE (or a flats/gamma generator for the c-edge plan)")


def cmd_trim(args, out):
    hft, rts = _hft(args)
    plan = _trim_plan(args, hft, rts)
    probs = plan_problems(hft, plan)
    if probs:
        raise PlanError("; ".join(probs))
    hft2, qmap = trim(hft, plan)
    qc, qc2 = _build(hft, args), _build(hft2, args)
    rep = verify_trim(qc, qc2, qmap, plan, seed=args.seed)
    rep.title = "trim"
    v = validate(hft2)
    rep.add("trimmed-validates", v.ok, None if v.ok else [c.name for c in v.failures()])
    _end_drop(rep, qc, qc2, qmap)
    out.text("trimmed.json", dumps(hft2))
    out.text("quotient.json", json.dumps(qmap.to_document(hft), indent=1) + "\n")
    return rep, f"{rep}\nend-to-end drop {rep.info.get('end_to_end_drop')}"


def _end_drop(rep, qc, qc2, qmap):
    h = qc.hft
    if len(h.labels) >= 2:
        a, b = h.marked_tuple(h.labels[0]), h.marked_tuple(h.labels[-1])
        rep.info["end_to_end_drop"] = distance(qc, a, b) - distance(qc2, qmap.apply(a), qmap.apply(b))


def cmd_collapse(args, out):
    hft, rts = _hft(args)
    if rts is None:
        raise UsageError("collapse needs a flats:WORD or gamma:K generator")
    hft2, qmap = collapse_clusters(rts.with_params(args.R, args.r))
    qc, qc2 = _build(hft, args), _build(hft2, args)
    rep = verify_trim(qc, qc2, qmap, seed=args.seed)
    rep.title = "collapse"
    v = validate(hft2)
    rep.add("collapsed-validates", v.ok, None if v.ok else [c.name for c in v.failures()])
    _end_drop(rep, qc, qc2, qmap)
    rep.info["collapsed_top_vertices"] = hft2.trees[hft2.top].n if hft2.top else None
    out.text("collapsed.json", dumps(hft2))
    return rep, f"{rep}\nend-to-end drop {rep.info.get('end_to_end_drop')}"


def cmd_firewall(args, out):
    hft, _ = _hft(args)
    fw, qc = build_firewall_q(hft, args.threshold, args.budget_q)
    rep = verify_firewall(qc, fw.base_of, args.threshold)
    v = validate(fw.hft)
    rep.add("relaxed-validation", v.ok)
    rep.info.update(domains=len(fw.hft.domains), points=len(qc), walls=len(pocset_for(qc).walls))
    out.text("firewall.json", dumps(fw.hft))
    return rep, str(rep)


def cmd_sep_distance(args, out):
    from .plotting import plot_sep_table
    if args.table:
        rows = sep_table([gamma_word(k) for k in range(1, args.table + 1)], args.threshold)
        rep = Report("sep-table")
        rep.info["rows"] = [{k: r[k] for k in ("top_distance", "zero_sep_distance", "walls", "points")}
                            for r in rows]
        cols = ["blocks", "top_distance", "zero_sep_distance", "walls", "points"]
        body = [[i + 1, r["top_distance"], r["zero_sep_distance"], r["walls"], r["points"]]
                for i, r in enumerate(rows)]
        out.table("sep_table.tsv", cols, body)
        out.figure("sep_table.png", plot_sep_table, rows)
        text = "\n".join("\t".join(map(str, r)) for r in [cols] + body)
        return rep, text
    hft, _ = _hft(args)
    if args.firewall:
        _, qc = build_firewall_q(hft, args.threshold, args.budget_q)
    else:
        qc = _build(hft, args)
    a, b = _ends(qc, args)
    chain = zero_sep_chain(qc, a, b)
    rep = Report("sep-distance")
    rep.info["distance"] = len(chain)
    rep.info["chain"] = chain.to_document(qc.hft)
    return rep, str(len(chain))


def cmd_fuzz(args, out):
    caps = Caps(*[int(x) for x in args.caps.split(",")])
    rep = Report("fuzz")
    invalid, mismatched, skipped, failed_gen = [], [], 0, []
    rows = []
    for seed in range(args.seed, args.seed + args.count):
        try:
            h = random_hft(seed, caps)
        except GenerationError:
            failed_gen.append(seed)
            continue
        if not validate(h).ok:
            invalid.append(seed)
            continue
        size = int(np.prod([h.trees[u].n for u in h.domains], dtype=object))
        if size > args.budget_oracle:
            skipped += 1
            continue
        q = build_q(h, args.budget_q)
        same = set(q.points) == enumerate_q_naive(h, args.budget_oracle)
        if not same:
            mismatched.append(seed)
        rows.append([seed, len(h.domains), len(q), int(same)])
    rep.add("all-valid", not invalid, {"seeds": invalid[:20]} if invalid else None)
    rep.add("oracle-agrees", not mismatched, {"seeds": mismatched[:20]} if mismatched else None)
    rep.info.update(seeds=args.count, compared=len(rows), skipped=skipped, generation_failures=failed_gen)
    out.table("fuzz.tsv", ["seed", "domains", "points", "oracle_agrees"], rows)
    return rep, f"{rep}\ncompared {len(rows)}  skipped {skipped}"


BENCH_SPECS = ["grid:2,2", "grid:4,4", "grid:3,3,3", "grid:4,4,4", "gamma:2", "gamma:4", "gamma:6"]


def cmd_bench(args, out):
    from .plotting import plot_bench
    rep = Report("bench")
    rows = []
    for spec in BENCH_SPECS:
        h, _ = parse_gen(spec)
        t0 = time.perf_counter()
        qc = build_q(h, args.budget_q)
        t1 = time.perf_counter()
        dual = dualize(build_pocset(h, qc), method="bfs")
        t2 = time.perf_counter()
        rows.append({"spec": spec, "points": len(qc), "zero_cells": len(dual),
                     "build_seconds": round(t1 - t0, 4), "dual_seconds": round(t2 - t1, 4)})
    rep.add("dual-size-matches", all(r["points"] == r["zero_cells"] for r in rows))
    rep.info["rows"] = rows
    out.table("bench.tsv", list(rows[0]), [list(r.values()) for r in rows])
    out.figure("bench.png", plot_bench, rows)
    text = "\n".join(f"{r['spec']:<14}{r['points']:>7}{r['build_seconds']:>10}{r['dual_seconds']:>10}"
                     for r in rows)
    return rep, text


COMMANDS = {
    "validate": (cmd_validate, "check the axioms of an instance"),
    "build": (cmd_build, "enumerate Q and its edges"),
    "dualize": (cmd_dualize, "build the pocset and its dual complex"),
    "verify-duality": (cmd_verify_duality, "check that Q and the dual complex agree"),
    "median": (cmd_median, "median of three points"),
    "path": (cmd_path, "normal cube path between two points"),
    "trim": (cmd_trim, "collapse planned subtrees and check the induced map"),
    "collapse": (cmd_collapse, "cluster-collapse a tree-of-flats system"),
    "firewall": (cmd_firewall, "add firewall domains and check 0-separation"),
    "sep-distance": (cmd_sep_distance, "longest 0-separated chain between two points"),
    "fuzz": (cmd_fuzz, "random instances against the naive oracle"),
    "bench": (cmd_bench, "timings for build and dualize"),
}


def _positive(text):
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _natural(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--instance", metavar="FILE")
    src.add_argument("--gen", metavar="SPEC", help="grid:2,3 transverse:N nested:N flats:WORD gamma:K random:SEED[:D,V,L]")
    common.add_argument("--mode", choices=[STRICT, RELAXED])
    common.add_argument("--budget-q", type=_positive, default=DEFAULT_Q_BUDGET)
    common.add_argument("--budget-oracle", type=_positive, default=DEFAULT_ORACLE_BUDGET)
    common.add_argument("--threads", type=_positive, default=1,
                        help="accepted for compatibility; work runs on one thread")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", metavar="DIR")
    common.add_argument("--dot", metavar="FILE")
    common.add_argument("--json", action="store_true", help="print the JSON report instead of a summary")

    p = argparse.ArgumentParser(prog="hftcube", description="Exact cubical models of hierarchical families of trees.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    subs = {name: sub.add_parser(name, parents=[common], help=h) for name, (_, h) in COMMANDS.items()}
    for name in ("dualize", "verify-duality"):
        subs[name].add_argument("--method", choices=["auto", "brute", "bfs"], default="auto")
    subs["median"].add_argument("--points", nargs=3, required=True, metavar="P",
                                help="labels or comma-separated coordinates")
    for name in ("path", "sep-distance"):
        subs[name].add_argument("--from", dest="source", metavar="P")
        subs[name].add_argument("--to", dest="target", metavar="P")
    subs["trim"].add_argument("--plan", metavar="FILE")
    subs["collapse"].add_argument("--R", type=_natural, default=0, help="neighbourhood radius")
    subs["collapse"].add_argument("--r", type=_natural, default=1, help="merge separation")
    for name in ("firewall", "sep-distance"):
        subs[name].add_argument("--threshold", type=_natural, default=0,
                                help="minimum tree diameter counted when testing filling")
    subs["sep-distance"].add_argument("--firewall", action="store_true")
    subs["sep-distance"].add_argument("--table", type=_positive, metavar="K",
                                      help="table over tree-of-flats prefixes with 1..K blocks")
    subs["fuzz"].add_argument("--count", type=_positive, default=100)
    subs["fuzz"].add_argument("--caps", default="4,6,2", help="domains,vertices,labels")
    return p


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fn = COMMANDS[args.command][0]
    try:
        out = Output(args)
        rep, text = fn(args, out)
    except UsageError as exc:
        print(f"hftcube: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BudgetExceeded, DualBudgetExceeded) as exc:
        rep, text = Report(args.command), f"budget exceeded: {exc}"
        rep.add("within-budget", False, str(exc))
    except (HftError, PlanError, EmptyHalfSpace, NotInQ, GenerationError) as exc:
        rep, text = Report(args.command), f"error: {exc}"
        rep.add("input-accepted", False, str(exc))
    if out.dir:
        (out.dir / "report.json").write_text(rep.to_json())
    print(rep.to_json() if args.json else text, end="" if args.json else "\n")
    return EXIT_PASS if rep.ok else EXIT_FAIL


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
