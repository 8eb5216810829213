"""Figure specifications and sweep-CSV ingestion.

A spec names the input CSV(s), the x-axis column, an optional series-grouping
column, a style, and the output image path. The CSVs follow the sweep schema:
every figure plots p_c with ci_half_width error bars, and the loss panel adds
the mean final variance with its 0.5*delta guide line.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

STYLES = ("lines", "loss_panel")

REQUIRED_COLUMNS = ("p_c", "ci_half_width")


class FigureError(ValueError):
    pass


@dataclass(frozen=True)
class FigureSpec:
    csv_paths: tuple[str, ...]
    x: str
    out: str
    series: str | None = None
    style: str = "lines"
    title: str | None = None

    def __post_init__(self):
        if not self.csv_paths:
            raise FigureError("spec needs at least one csv path")
        if self.style not in STYLES:
            raise FigureError(f"unknown style {self.style!r}; pick from {STYLES}")


def load_spec(path: str) -> FigureSpec:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FigureError(f"{path}: not valid JSON ({exc})") from exc
    known = {"csv", "x", "out", "series", "style", "title"}
    unknown = set(raw) - known
    if unknown:
        raise FigureError(f"{path}: unknown spec keys {sorted(unknown)}")
    for key in ("csv", "x", "out"):
        if key not in raw:
            raise FigureError(f"{path}: spec needs {key!r}")
    paths = raw["csv"] if isinstance(raw["csv"], list) else [raw["csv"]]
    return FigureSpec(
        csv_paths=tuple(paths),
        x=raw["x"],
        out=raw["out"],
        series=raw.get("series"),
        style=raw.get("style", "lines"),
        title=raw.get("title"),
    )


@dataclass
class Table:
    """Rows from one or more sweep CSVs, with shared and validated columns."""

    columns: tuple[str, ...]
    rows: list[dict] = field(default_factory=list)

    def column(self, name: str) -> list:
        return [row[name] for row in self.rows]


def _convert(value: str):
    try:
        return float(value)
    except ValueError:
        return value


def load_table(spec: FigureSpec) -> Table:
    table: Table | None = None
    for path in spec.csv_paths:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise FigureError(f"{path}: empty csv")
            columns = tuple(reader.fieldnames)
            if table is None:
                table = Table(columns)
            elif table.columns != columns:
                raise FigureError(f"{path}: csv header differs from the first input")
            for raw in reader:
                table.rows.append({k: _convert(v) for k, v in raw.items()})
    assert table is not None
    needed = [spec.x, *REQUIRED_COLUMNS]
    if spec.series is not None:
        needed.append(spec.series)
    if spec.style == "loss_panel":
        needed.extend(["mean_final_variance", "delta"])
    for name in needed:
        if name not in table.columns:
            raise FigureError(
                f"column {name!r} not in the csv header; got {list(table.columns)}"
            )
    if not table.rows:
        raise FigureError("no data rows to plot")
    return table
