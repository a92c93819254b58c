"""Matplotlib rendering for the compare and bench reports.

Figures are an opt-in sidecar (``--plot-dir``): the JSON/CSV data remains
the primary output, the PNGs just make the histogram overlays and timing
bars readable at a glance.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def _safe_name(feature: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_" else "_" for ch in feature)


def plot_compare(results: list[dict], out_dir) -> list[str]:
    """One overlaid-histogram PNG per compared feature."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for res in results:
        edges = res["bin_edges"]
        centers = [(a + b) / 2.0 for a, b in zip(edges, edges[1:])]
        width = (edges[-1] - edges[0]) / max(len(centers), 1) or 1.0
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        ax.bar(centers, res["hist_a"], width=width * 0.9, alpha=0.55, label="table A")
        ax.bar(centers, res["hist_b"], width=width * 0.9, alpha=0.55, label="table B")
        ax.set_title(f"{res['feature']}\nL1 distance {res['l1_distance']:.3g}")
        ax.set_xlabel("value")
        ax.set_ylabel("fraction of objects")
        ax.legend(frameon=False)
        fig.tight_layout()
        path = out / f"compare_{_safe_name(res['feature'])}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(str(path))
    return written


def plot_bench(result: dict, out_dir) -> str:
    """Bar chart of batched vs per-object wall times."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    names = ["batched", "per-object oracle"]
    times = [result["batched_ms"], result["per_object_ms"]]
    bars = ax.bar(names, times, color=["tab:orange", "tab:blue"])
    for bar, value in zip(bars, times):
        ax.annotate(f"{value:.0f} ms", (bar.get_x() + bar.get_width() / 2, value),
                    ha="center", va="bottom", fontsize=9)
    ax.set_ylabel("median wall time (ms)")
    ax.set_title(f"speedup {result['speedup']:.2f}x over {result['objects']} objects")
    fig.tight_layout()
    path = out / "bench_timing.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return str(path)
