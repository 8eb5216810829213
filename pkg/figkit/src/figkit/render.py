"""Matplotlib rendering for sweep CSVs: consensus probability vs the chosen
axis (one errorbar series per grouping value), and the two-panel probability /
variance layout with the 0.5*delta guide line.

Output is deterministic: a bundled style, a fixed SVG hash salt, and no date
metadata. Every render writes both an SVG and a PNG next to each other.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .spec import FigureError, FigureSpec, Table, load_table

STYLE = {
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 120,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 10,
    "legend.fontsize": 9,
    "errorbar.capsize": 3.0,
    "svg.hashsalt": "figkit",
}

_MARKERS = ("o", "s", "^", "d", "v", "p", "*", "x")


def _series_groups(table: Table, spec: FigureSpec) -> list[tuple[str, list[dict]]]:
    if spec.series is None:
        return [("", list(table.rows))]
    groups: dict = {}
    for row in table.rows:
        groups.setdefault(row[spec.series], []).append(row)
    def sort_key(value):
        return (0, value) if isinstance(value, float) else (1, str(value))
    return [
        (f"{spec.series}={value:g}" if isinstance(value, float) else f"{spec.series}={value}", groups[value])
        for value in sorted(groups, key=sort_key)
    ]


def _errorbar_series(ax, table: Table, spec: FigureSpec) -> None:
    for pos, (label, rows) in enumerate(_series_groups(table, spec)):
        rows = sorted(rows, key=lambda r: r[spec.x])
        ax.errorbar(
            [r[spec.x] for r in rows],
            [r["p_c"] for r in rows],
            yerr=[r["ci_half_width"] for r in rows],
            marker=_MARKERS[pos % len(_MARKERS)],
            label=label or None,
        )
    ax.set_xlabel(spec.x)
    ax.set_ylabel("consensus probability")
    ax.set_ylim(-0.05, 1.05)
    if spec.series is not None:
        ax.legend()


def build_figure(spec: FigureSpec):
    """The matplotlib Figure for a spec; render() saves it to disk."""
    table = load_table(spec)
    with plt.rc_context(STYLE):
        if spec.style == "lines":
            fig, ax = plt.subplots()
            _errorbar_series(ax, table, spec)
            if spec.title:
                ax.set_title(spec.title)
            fig.tight_layout()
            return fig
        deltas = sorted(set(table.column("delta")))
        if len(deltas) != 1:
            raise FigureError(
                f"loss panel needs one grid step per csv, found deltas {deltas}"
            )
        delta = deltas[0]
        fig, (top, bottom) = plt.subplots(2, 1, sharex=True, figsize=(6.0, 5.5))
        _errorbar_series(top, table, spec)
        top.set_xlabel("")
        for label, rows in _series_groups(table, spec):
            rows = sorted(rows, key=lambda r: r[spec.x])
            bottom.plot(
                [r[spec.x] for r in rows],
                [r["mean_final_variance"] for r in rows],
                marker="o",
                label=label or None,
            )
        bottom.axhline(
            0.5 * delta, linestyle="--", color="crimson", label="0.5 * delta"
        )
        bottom.set_xlabel(spec.x)
        bottom.set_ylabel("final opinion variance")
        bottom.legend()
        if spec.title:
            top.set_title(spec.title)
        fig.tight_layout()
        return fig


def _sibling(path: str) -> str:
    root, ext = os.path.splitext(path)
    other = ".png" if ext.lower() == ".svg" else ".svg"
    return root + other


def render(spec: FigureSpec) -> list[str]:
    """Write the figure as both SVG and PNG; returns the paths written."""
    fig = build_figure(spec)
    out_paths = [spec.out, _sibling(spec.out)]
    try:
        # the hash salt must be active at save time for stable SVG ids
        with plt.rc_context(STYLE):
            for path in out_paths:
                if path.lower().endswith(".svg"):
                    fig.savefig(path, metadata={"Date": None})
                else:
                    fig.savefig(path)
    finally:
        plt.close(fig)
    return out_paths
