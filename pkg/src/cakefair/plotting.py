"""Figure rendering for the bench report path (headless, files only)."""

from __future__ import annotations

from fractions import Fraction

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def render_bench_figure(rows, out_path, title=None):
    """Envy and its mesh bound against K, one line per instance, log-log."""
    by_instance = {}
    for row in rows:
        by_instance.setdefault(row["instance"], []).append(row)

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for name, series in by_instance.items():
        series = sorted(series, key=lambda r: r["mesh_k"])
        ks = [r["mesh_k"] for r in series]
        envies = [float(Fraction(r["envy"])) for r in series]
        bounds = [float(Fraction(r["envy_bound"])) for r in series]
        line, = ax.plot(ks, [max(e, 1e-12) for e in envies], "o-", label=f"{name} envy")
        ax.plot(ks, bounds, "--", color=line.get_color(), alpha=0.6,
                label=f"{name} bound")
    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.set_xlabel("mesh K")
    ax.set_ylabel("max envy")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path
