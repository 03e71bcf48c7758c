"""Figure rendering for the CLI report path.

Sweeps get latency-vs-injection-rate and throughput-vs-rate curves; a
single run gets a latency summary.  Files land next to the CSV output.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def render_figures(rows, outdir: str) -> list[str]:
    os.makedirs(outdir, exist_ok=True)
    written = []
    if len(rows) > 1:
        rates = [r.rate for r in rows]
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for field, label in (("avg_latency", "average"),
                             ("p95_latency", "95th percentile"),
                             ("max_latency", "maximum")):
            ys = [getattr(r, field) for r in rows]
            ax.plot(rates, ys, marker="o", label=label)
        ax.set_xlabel("injection rate (flits/node/cycle)")
        ax.set_ylabel("latency (cycles)")
        ax.set_yscale("log")
        ax.legend()
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        path = os.path.join(outdir, "latency_vs_rate.png")
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)

        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.plot(rates, [r.throughput for r in rows], marker="s", color="tab:green")
        ax.plot(rates, rates, linestyle="--", color="gray", label="offered load")
        ax.set_xlabel("injection rate (flits/node/cycle)")
        ax.set_ylabel("delivered throughput (flits/node/cycle)")
        ax.legend()
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        path = os.path.join(outdir, "throughput_vs_rate.png")
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)
    else:
        row = rows[0]
        fig, ax = plt.subplots(figsize=(4.5, 3.5))
        labels, values = [], []
        for field, label in (("avg_latency", "avg"),
                             ("p95_latency", "p95"),
                             ("max_latency", "max")):
            v = getattr(row, field)
            if v is not None:
                labels.append(label)
                values.append(v)
        ax.bar(labels, values, color="tab:blue")
        ax.set_ylabel("latency (cycles)")
        ax.set_title(f"{row.topology} {row.nodes} nodes, "
                     f"{row.pattern} @ {row.rate:g}")
        fig.tight_layout()
        path = os.path.join(outdir, "latency_summary.png")
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)
    return written
