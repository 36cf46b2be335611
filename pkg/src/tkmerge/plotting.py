"""Static SVG figures written next to the CSV outputs (matplotlib, Agg backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed ids and no date stamp, so reruns give the same file
matplotlib.rcParams["svg.hashsalt"] = "tkmerge"
_META = {"Date": None, "Creator": None}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_META)
    plt.close(fig)


def scatter(path, x, labels, title: str = "") -> None:
    """First two columns coloured by label; trimmed points (0) drawn as grey crosses."""
    x = np.asarray(x, dtype=float)
    labels = np.asarray(labels)
    ys = x[:, 1] if x.shape[1] > 1 else np.zeros(len(x))
    fig, ax = plt.subplots(figsize=(5, 4.5))
    out = labels == 0
    if out.any():
        ax.scatter(x[out, 0], ys[out], marker="+", s=12, c="0.6", linewidths=0.6, label="trimmed")
    cmap = plt.get_cmap("tab10")
    for i, g in enumerate(np.unique(labels[~out])):
        m = labels == g
        ax.scatter(x[m, 0], ys[m], s=4, color=cmap(i % 10), label=str(g))
    ax.set_title(title)
    ax.legend(markerscale=3, fontsize=7, loc="best")
    _save(fig, path)


def dendrogram(path, dend, component_to_group=None, title: str = "") -> None:
    """Merge tree of the fitted components, leaves ordered so branches do not cross."""
    k = dend.leaf_count
    if k < 2:
        return
    order = _leaf_order(dend)
    xpos = {leaf: i for i, leaf in enumerate(order)}
    ypos = {leaf: 0.0 for leaf in range(k)}
    fig, ax = plt.subplots(figsize=(max(4, 0.35 * k + 2), 3.5))
    for m in dend.merges:
        xl, xr = xpos[m.left], xpos[m.right]
        ax.plot([xl, xl, xr, xr], [ypos[m.left], m.height, m.height, ypos[m.right]], color="0.2", lw=1)
        xpos[m.new], ypos[m.new] = (xl + xr) / 2, m.height
    names = [str(leaf + 1) if component_to_group is None else f"{leaf + 1}:{component_to_group[leaf]}"
             for leaf in order]
    ax.set_xticks(range(k), names, fontsize=7, rotation=90)
    ax.set_ylabel(f"{dend.linkage} linkage height")
    ax.set_title(title)
    _save(fig, path)


def _leaf_order(dend):
    children = {m.new: (m.left, m.right) for m in dend.merges}
    root = dend.merges[-1].new
    out, stack = [], [root]
    while stack:
        node = stack.pop()
        if node in children:
            left, right = children[node]
            stack.extend([right, left])
        else:
            out.append(node)
    return out


def monitor_trace(path, trace) -> None:
    """Consecutive-level scores against the smaller alpha of each pair, best level marked."""
    a = np.asarray(trace.alphas)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(a[1:], trace.scores, "o-", label="ARI, jointly kept")
    ax.plot(a[1:], trace.unrestricted, "s--", ms=4, label="ARI, trimmed as class")
    ax.axvline(trace.best_alpha, color="0.5", ls=":", label=f"chosen alpha = {trace.best_alpha:.2f}")
    ax.set_xlabel("alpha")
    ax.set_ylabel("ARI with next larger alpha")
    ax.invert_xaxis()
    ax.legend(fontsize=7)
    _save(fig, path)


def method_summary(path, summary, value: str = "ari", title: str = "") -> None:
    """Median with median +/- Sn bars per method."""
    names = [e["method"] for e in summary]
    med = np.array([e[f"{value}_median"] for e in summary], dtype=float)
    sn = np.array([e[f"{value}_sn"] for e in summary], dtype=float)
    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    ax.errorbar(range(len(names)), med, yerr=sn, fmt="o", capsize=4)
    ax.set_xticks(range(len(names)), names)
    ax.set_ylabel("ARI" if value == "ari" else "seconds")
    ax.set_title(title)
    _save(fig, path)


def bench_curves(path, table) -> None:
    """Median seconds against sample size, one line per method."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for method in dict.fromkeys(e["method"] for e in table):
        rows = [e for e in table if e["method"] == method]
        ax.plot([e["n"] for e in rows], [e["seconds_median"] for e in rows], "o-", label=method)
    ax.set_xlabel("n")
    ax.set_ylabel("median seconds")
    ax.legend(fontsize=7)
    _save(fig, path)
