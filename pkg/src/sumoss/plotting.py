"""Figures written next to the CSV outputs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

LABELS = {"sumoss": "SuMo-SS", "baseline": "baseline (exact positions)", "random": "random"}
COLORS = {"sumoss": "tab:red", "baseline": "tab:blue", "random": "tab:gray"}

# no Software/date metadata, so reruns write identical bytes
_PNG_META = {"Software": None}

plt.rcParams.update(
    {
        "font.size": 10,
        "axes.labelsize": 10,
        "legend.fontsize": 8,
        "xtick.labelsize": 8,
        "ytick.labelsize": 8,
        "svg.hashsalt": "sumoss",
    }
)


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path, dpi=120, bbox_inches="tight", metadata=_PNG_META)
    plt.close(fig)
    return path


def plot_mean_curves(result, path, title: str | None = None) -> Path:
    """Mean MI(A_n) against n for every method of a comparison."""
    fig, ax = plt.subplots(figsize=(4.5, 3.4))
    for m in result.methods:
        if not result.runs[m]:
            continue
        curve = result.mean_curve(m)
        ax.plot(np.arange(1, len(curve) + 1), curve, marker="o", ms=3, color=COLORS.get(m), label=LABELS.get(m, m))
    ax.set_xlabel("number of sensors n")
    ax.set_ylabel("MI(A_n)")
    ax.grid(alpha=0.3)
    ax.legend(loc="upper left")
    if title:
        ax.set_title(title, fontsize=9)
    return _save(fig, path)


def plot_delta_tables(result, path) -> Path:
    """One heat map of Delta_n over (w1, w2) per checkpoint."""
    checkpoints = sorted(result.spec.checkpoints)
    w1s, w2s = list(result.spec.w1_values), list(result.spec.w2_values)
    tables = [result.delta_table(n) for n in checkpoints]
    lim = max(1e-9, max(float(np.max(np.abs(t))) for t in tables))
    fig, axes = plt.subplots(1, len(checkpoints), figsize=(3.2 * len(checkpoints), 3.0), squeeze=False)
    for ax, n, table in zip(axes[0], checkpoints, tables):
        im = ax.imshow(table, cmap="RdBu_r", vmin=-lim, vmax=lim, origin="lower")
        ax.set_xticks(range(len(w2s)), [f"{w:g}" for w in w2s], rotation=90)
        ax.set_yticks(range(len(w1s)), [f"{w:g}" for w in w1s])
        ax.set_xlabel("w2")
        ax.set_ylabel("w1")
        ax.set_title(f"Delta_{n}  ({int(np.sum(table > 0))}/{table.size} > 0)", fontsize=9)
    fig.colorbar(im, ax=axes[0].tolist(), shrink=0.8)
    return _save(fig, path)


def plot_mission(log, path) -> Path:
    """Candidates, drop targets, true landings and the loading position of one mission."""
    cfg = log.config
    V = cfg.area.candidates()
    x0, y0, x1, y1 = V.bounds
    fig, ax = plt.subplots(figsize=(4.2, 4.2))
    ax.add_patch(plt.Rectangle((x0, y0), x1 - x0, y1 - y0, fill=False, ec="tab:green", lw=1.2))
    ax.scatter(*V.positions.T, marker="s", s=30, facecolor="none", edgecolor="0.5", label="candidates")
    lp = cfg.deviation.loading_pos
    ax.scatter([lp.x], [lp.y], marker="o", s=50, color="k", label="loading position")
    for s in log.steps:
        ax.plot([s.target[0], s.landing[0]], [s.target[1], s.landing[1]], color="0.6", lw=0.8)
        ax.scatter([s.landing[0]], [s.landing[1]], marker="x", color="tab:red", s=30)
        ax.annotate(str(s.n), s.landing, textcoords="offset points", xytext=(3, 3), fontsize=7, color="tab:blue")
    ax.scatter([], [], marker="x", color="tab:red", label="landings")
    ax.set_aspect("equal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_title(f"{LABELS.get(log.method, log.method)}, seed {log.seed}, MI = {log.curve()[-1]:.3f}", fontsize=9)
    ax.legend(loc="upper left", bbox_to_anchor=(1.02, 1.0), fontsize=7)
    return _save(fig, path)
