"""CSV parsing and figure rendering."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

#: exact header line -> schema name
SCHEMAS = {
    "t,n_thermal,negativity": "lines-by-occupancy",
    "t,negativity": "single-line",
    "delta,abscissa,stable": "stability-line",
    "delta,nbar,stable,neg_m1m2,neg_m1ca,neg_m1cb": "sweep-surface",
}

_SURFACE_PANELS = (
    ("neg_m1m2", "(a) mirror 1 - mirror 2"),
    ("neg_m1ca", "(b) mirror 1 - cavity a"),
    ("neg_m1cb", "(c) mirror 1 - cavity b"),
)


class SchemaError(ValueError):
    """The CSV header is not one of the published schemas."""


@dataclass(frozen=True)
class FigureSpec:
    """What to draw: input table, figure kind, labels, output image."""

    csv_path: str
    kind: str  # "lines" or "surface"
    out_path: str
    xlabel: Optional[str] = None
    ylabel: Optional[str] = None
    title: Optional[str] = None


def _cell(value: str) -> float:
    if value == "":
        return np.nan
    if value == "true":
        return 1.0
    if value == "false":
        return 0.0
    return float(value)


def read_table(csv_path):
    """Parse a CSV file into (schema name, column dict of float arrays).

    Empty cells and flagged rows come back as NaN so they render as gaps.
    """
    path = Path(csv_path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        header_line = ",".join(header)
        schema = SCHEMAS.get(header_line)
        if schema is None:
            raise SchemaError(f"{path}: unrecognized header {header_line!r}")
        rows = [[_cell(v) for v in row] for row in reader if row]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    data = np.array(rows, dtype=float)
    if data.shape[1] != len(header):
        raise SchemaError(f"{path}: ragged rows")
    return schema, {name: data[:, k] for k, name in enumerate(header)}


def _pivot(x, y, values):
    """Arrange sweep rows onto the (x, y) grid, NaN where absent."""
    xs = np.unique(x)
    ys = np.unique(y)
    grid = np.full((len(ys), len(xs)), np.nan)
    xi = np.searchsorted(xs, x)
    yi = np.searchsorted(ys, y)
    grid[yi, xi] = values
    return xs, ys, grid


def _render_lines(schema, cols, spec, fig):
    ax = fig.subplots()
    if schema == "lines-by-occupancy":
        for nth in np.unique(cols["n_thermal"]):
            mask = cols["n_thermal"] == nth
            ax.plot(cols["t"][mask], cols["negativity"][mask], label=f"n_thermal = {nth:g}")
        ax.legend()
        ax.set_xlabel(spec.xlabel or "t")
        ax.set_ylabel(spec.ylabel or "logarithmic negativity")
    elif schema == "single-line":
        ax.plot(cols["t"], cols["negativity"])
        ax.set_xlabel(spec.xlabel or "t")
        ax.set_ylabel(spec.ylabel or "logarithmic negativity")
    else:  # stability-line
        stable = cols["stable"] == 1.0
        y = np.where(stable, cols["abscissa"], np.nan)  # flagged rows become gaps
        ax.plot(cols["delta"], y)
        ax.axhline(0.0, linewidth=0.6, color="0.5")
        ax.set_xlabel(spec.xlabel or "delta")
        ax.set_ylabel(spec.ylabel or "spectral abscissa")
    if spec.title:
        ax.set_title(spec.title)


def _render_surface(cols, spec, fig):
    axes = fig.subplots(1, 3, sharey=True)
    stable = cols["stable"] == 1.0
    for ax, (column, panel_title) in zip(axes, _SURFACE_PANELS):
        values = np.where(stable, cols[column], np.nan)
        xs, ys, grid = _pivot(cols["delta"], cols["nbar"], values)
        mesh = ax.pcolormesh(xs, ys, np.ma.masked_invalid(grid), shading="nearest")
        fig.colorbar(mesh, ax=ax, location="bottom")
        ax.set_title(panel_title)
        ax.set_xlabel(spec.xlabel or "delta")
    axes[0].set_ylabel(spec.ylabel or "nbar")
    if spec.title:
        fig.suptitle(spec.title)


def render(spec: FigureSpec):
    """Draw the figure and write it to spec.out_path; returns the Figure.

    The renderer never alters data: line vertices and heatmap cells carry
    the CSV values bit for bit, with flagged or missing entries as gaps.
    """
    schema, cols = read_table(spec.csv_path)
    if spec.kind not in ("lines", "surface"):
        raise SchemaError(f"unknown figure kind {spec.kind!r}")
    if (spec.kind == "surface") != (schema == "sweep-surface"):
        raise SchemaError(
            f"kind {spec.kind!r} does not apply to a {schema!r} table"
        )
    width = 10.0 if spec.kind == "surface" else 6.4
    fig = plt.figure(figsize=(width, 4.2), dpi=130)
    try:
        if spec.kind == "lines":
            _render_lines(schema, cols, spec, fig)
        else:
            _render_surface(cols, spec, fig)
        fig.tight_layout()
        fig.savefig(spec.out_path)
    except BaseException:
        plt.close(fig)
        raise
    return fig
