"""Figures for the ``report`` command: matplotlib PNGs plus gnuplot scripts over the same CSV data."""

from __future__ import annotations

import math
from pathlib import Path
from typing import List, Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .geometry import BoxCountTable  # noqa: E402
from .graph import SampledGraph  # noqa: E402

MAX_PLOTTED_POINTS = 1 << 14


def _thin(graph: SampledGraph, limit: int = MAX_PLOTTED_POINTS):
    step = max(1, len(graph) // limit)
    return graph.param[::step], graph.value[::step]


def plot_slice(graph: SampledGraph, path: Path, title: str = "") -> Path:
    x, y = _thin(graph)
    fig, ax = plt.subplots(figsize=(7, 4))
    if graph.continuous:
        ax.plot(x, y, lw=0.3, color="black")
    else:
        ax.plot(x, y, ",", color="black")
    ax.set_xlabel("unstable parameter")
    ax.set_ylabel("graph value")
    ax.set_title(title or graph.description)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_box_counts(table: BoxCountTable, path: Path, predicted: Optional[float] = None) -> Path:
    js = np.array(table.scales, dtype=float)
    logn = np.log(np.array(table.counts, dtype=float))
    fitted = np.isin(table.scales, table.fitted_scales)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(js[fitted] * math.log(2), logn[fitted], "o", color="black", label="fitted scales")
    ax.plot(js[~fitted] * math.log(2), logn[~fitted], "o", mfc="none", color="gray", label="other scales")
    xs = np.array(table.window, dtype=float) * math.log(2)
    ax.plot(xs, table.intercept + table.slope * xs, "-", color="tab:red",
            label=f"slope {table.slope:.4f} +/- {table.stderr:.4f}")
    if predicted is not None:
        mid_x = xs.mean()
        mid_y = table.intercept + table.slope * mid_x
        ax.plot(xs, mid_y + predicted * (xs - mid_x), "--", color="tab:blue", label=f"predicted {predicted:.4f}")
    ax.set_xlabel("j log 2")
    ax.set_ylabel("log N")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def gnuplot_slice_script(csv_name: str, png_name: str) -> str:
    return (f"set terminal pngcairo size 1050,600\nset output '{png_name}'\n"
            "set datafile separator ','\nset key off\n"
            f"plot '{csv_name}' using 1:4 every ::1 with lines lw 0.3 lc rgb 'black'\n")


def gnuplot_box_script(csv_name: str, png_name: str, table: BoxCountTable) -> str:
    lo, hi = table.window
    return (f"set terminal pngcairo size 750,600\nset output '{png_name}'\n"
            "set datafile separator ','\nset xlabel 'j log 2'\nset ylabel 'log N'\n"
            f"fit_line(x) = {table.intercept:.12g} + {table.slope:.12g} * x\n"
            f"plot '{csv_name}' using ($1*log(2)):(log($3)) every ::1 with points pt 7 title 'counts', \\\n"
            f"     [{lo * math.log(2):.6g}:{hi * math.log(2):.6g}] fit_line(x) title 'fit'\n")


def render_report_figures(out_dir: Path, graph: SampledGraph, table: BoxCountTable,
                          predicted: Optional[float], slice_csv: str, box_csv: str, title: str = "") -> List[Path]:
    out_dir = Path(out_dir)
    written = [plot_slice(graph, out_dir / "slice.png", title),
               plot_box_counts(table, out_dir / "boxcount.png", predicted)]
    for name, text in (("slice.gp", gnuplot_slice_script(slice_csv, "slice_gnuplot.png")),
                       ("boxcount.gp", gnuplot_box_script(box_csv, "boxcount_gnuplot.png", table))):
        (out_dir / name).write_text(text)
        written.append(out_dir / name)
    return written
