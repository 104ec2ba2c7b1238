"""Figures for CLI reports.  Everything renders off-screen to files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import networkx as nx  # noqa: E402


def _layout(qc):
    g = nx.Graph()
    g.add_nodes_from(range(len(qc)))
    g.add_edges_from((i, j) for i, j, _ in qc.edges)
    return g, nx.spring_layout(g, seed=0)


def plot_q(qc, path, highlight=None, title: str | None = None):
    """Draw the 1-skeleton of Q; `highlight` is a sequence of points to trace."""
    g, pos = _layout(qc)
    doms = qc.hft.domains
    fig, ax = plt.subplots(figsize=(6, 6))
    cmap = plt.get_cmap("tab10")
    for i, j, k in qc.edges:
        (x0, y0), (x1, y1) = pos[i], pos[j]
        ax.plot([x0, x1], [y0, y1], color=cmap(k % 10), lw=1, zorder=1)
    xs = [pos[i][0] for i in g.nodes]
    ys = [pos[i][1] for i in g.nodes]
    ax.scatter(xs, ys, s=12, color="black", zorder=2)
    marked = [i for i in qc.marked_index.values() if i is not None]
    ax.scatter([pos[i][0] for i in marked], [pos[i][1] for i in marked], s=50,
               facecolor="none", edgecolor="red", zorder=3)
    if highlight:
        idx = [qc.index[tuple(p)] for p in highlight]
        ax.plot([pos[i][0] for i in idx], [pos[i][1] for i in idx], color="red", lw=2.5,
                alpha=0.6, zorder=4)
    handles = [plt.Line2D([], [], color=cmap(k % 10), label=u) for k, u in enumerate(doms)
               if qc.hft.trees[u].n > 1][:10]
    if handles:
        ax.legend(handles=handles, fontsize=7, loc="best")
    ax.set_axis_off()
    ax.set_title(title or f"Q: {len(qc)} points, {len(qc.edges)} edges")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)


def plot_sep_table(rows, path, bounds=None):
    """0-separated chain distance against top-tree distance."""
    fig, ax = plt.subplots(figsize=(5, 4))
    dt = [r["top_distance"] for r in rows]
    zs = [r["zero_sep_distance"] for r in rows]
    ax.plot(dt, zs, "o-", label="chain distance")
    if bounds:
        c1, c2, c3, c4 = bounds
        ax.plot(dt, [c1 * d - c2 for d in dt], "--", color="gray", label="lower bound")
        ax.plot(dt, [c3 * d + c4 for d in dt], ":", color="gray", label="upper bound")
    ax.set_xlabel("top-tree distance")
    ax.set_ylabel("0-separated chain length")
    ax.legend(fontsize=8)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)


def plot_bench(rows, path):
    fig, ax = plt.subplots(figsize=(5, 4))
    for stage in ("build_seconds", "dual_seconds"):
        pts = sorted((r["points"], r[stage]) for r in rows if stage in r)
        if pts:
            ax.plot([p for p, _ in pts], [t for _, t in pts], "o-", label=stage.split("_")[0])
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("|Q|")
    ax.set_ylabel("seconds")
    ax.legend(fontsize=8)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
