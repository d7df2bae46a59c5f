"""Static SVG rendering of sweep curves."""
from __future__ import annotations

from pathlib import Path

import matplotlib
import numpy as np
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

from .sweep import CurveTable

AXIS_LABELS = {
    "d_d": "destination distance $D_D$ (m)",
    "d_e": "eavesdropper distance $D_E$ (m)",
    "d_e_min": "minimum eavesdropper distance $D_{E,min}$ (m)",
    "r_th": "entrusted-user QoS $R_{th}$ (bits/s/Hz)",
    "r_th_d": "destination target $R_{th,D}$ (bits/s/Hz)",
    "eta": r"bandwidth ratio $\eta$",
}
MARKERS = "osD^v<>ph*"
LINESTYLES = ("-", "--", ":", "-.")


def build_figure(table: CurveTable, title: str | None = None) -> Figure:
    if not table.rows:
        raise ValueError("cannot plot an empty table")
    fig = Figure(figsize=(6.0, 4.2))
    ax = fig.add_subplot()
    for i, method in enumerate(table.methods):
        x, y, se = table.curve(method)
        ax.errorbar(x, y, yerr=np.nan_to_num(se), marker=MARKERS[i % len(MARKERS)],
                    linestyle=LINESTYLES[(i // len(MARKERS)) % len(LINESTYLES)],
                    capsize=3, markersize=5, linewidth=1.3, label=method)
    ax.set_xlabel(AXIS_LABELS.get(table.sweep_var, table.sweep_var))
    ax.set_ylabel("secrecy rate (bits/s/Hz)")
    ax.grid(True, alpha=0.3)
    ax.legend(frameon=False, fontsize="small")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return fig


def render_plot(table: CurveTable, path, title: str | None = None) -> None:
    """Write ``table`` as an SVG; identical tables give identical bytes."""
    fig = build_figure(table, title)
    FigureCanvasSVG(fig)
    with matplotlib.rc_context({"svg.hashsalt": "hybridsec", "svg.fonttype": "path"}):
        fig.savefig(Path(path), format="svg", metadata={"Date": None})
