"""Render simulation sweep CSV files into figures.

figkit consumes the published CSV schemas of the optomech command line
(negativity-over-time tables and detuning/occupancy sweep tables) and
nothing else: it never imports the simulator. Two figure kinds are
supported, line plots over time (or detuning) and per-pairing heatmap
panels over the (detuning, occupancy) plane.
"""

from .render import SCHEMAS, FigureSpec, SchemaError, read_table, render

__version__ = "0.1.0"
