import csv
import time
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np
import pytest

from figkit import FigureSpec, SchemaError, read_table, render
from figkit.cli import main

DATA = Path(__file__).parent / "data"


def spec_for(name, kind, out, **labels):
    return FigureSpec(csv_path=str(DATA / name), kind=kind, out_path=str(out), **labels)


def csv_columns(name):
    with (DATA / name).open(newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    return header, body


# --- parsing


def test_read_table_detects_schemas():
    assert read_table(DATA / "fig1.csv")[0] == "lines-by-occupancy"
    assert read_table(DATA / "fig2.csv")[0] == "single-line"
    assert read_table(DATA / "fig3.csv")[0] == "sweep-surface"
    assert read_table(DATA / "stability.csv")[0] == "stability-line"


def test_read_table_rejects_unknown_header(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    with pytest.raises(SchemaError, match="unrecognized"):
        read_table(bad)


def test_read_table_rejects_empty(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("t,negativity\n")
    with pytest.raises(SchemaError, match="no data"):
        read_table(empty)


def test_flagged_cells_become_nan():
    _, cols = read_table(DATA / "fig3.csv")
    assert np.isnan(cols["neg_m1m2"][2])
    assert cols["stable"][2] == 0.0


# --- line rendering and read-back


def test_occupancy_curves_match_csv(tmp_path):
    fig = render(spec_for("fig1.csv", "lines", tmp_path / "fig1.png"))
    ax = fig.axes[0]
    assert len(ax.lines) == 2
    header, body = csv_columns("fig1.csv")
    for line in ax.lines:
        label = line.get_label()
        nth = float(label.split("=")[1])
        expected = [
            (float(r[0]), float(r[2])) for r in body if float(r[1]) == nth
        ]
        assert np.array_equal(line.get_xydata(), np.array(expected))
    assert (tmp_path / "fig1.png").exists()
    plt.close(fig)


def test_single_curve_matches_csv(tmp_path):
    fig = render(spec_for("fig2.csv", "lines", tmp_path / "fig2.png"))
    (line,) = fig.axes[0].lines
    _, body = csv_columns("fig2.csv")
    expected = np.array([(float(r[0]), float(r[1])) for r in body])
    assert np.array_equal(line.get_xydata(), expected)
    plt.close(fig)


def test_stability_rows_render_with_gap(tmp_path):
    fig = render(spec_for("stability.csv", "lines", tmp_path / "stab.png"))
    data_line = fig.axes[0].lines[0]
    y = data_line.get_ydata()
    assert np.isnan(y[0])  # flagged detuning leaves a gap
    assert y[1] == -0.005
    plt.close(fig)


def test_all_zero_curve_is_fine(tmp_path):
    fig = render(spec_for("allzero.csv", "lines", tmp_path / "zero.png"))
    assert np.all(fig.axes[0].lines[0].get_ydata() == 0.0)
    plt.close(fig)


# --- surface rendering and read-back


def test_surface_panels_match_csv(tmp_path):
    fig = render(spec_for("fig3.csv", "surface", tmp_path / "fig3.png"))
    header, body = csv_columns("fig3.csv")
    deltas = sorted({float(r[0]) for r in body})
    nbars = sorted({float(r[1]) for r in body})
    panel_axes = fig.axes[:3]
    for k, ax in enumerate(panel_axes):
        mesh = ax.collections[0]
        grid = np.ma.getdata(mesh.get_array())
        mask = np.ma.getmaskarray(mesh.get_array())
        assert grid.shape == (len(nbars), len(deltas))
        for row in body:
            i = nbars.index(float(row[1]))
            j = deltas.index(float(row[0]))
            if row[2] == "false":
                assert mask[i, j]
            else:
                assert grid[i, j] == float(row[3 + k])
    assert [ax.get_title()[:3] for ax in panel_axes] == ["(a)", "(b)", "(c)"]
    plt.close(fig)


def test_kind_schema_mismatch(tmp_path):
    with pytest.raises(SchemaError, match="does not apply"):
        render(spec_for("fig1.csv", "surface", tmp_path / "x.png"))
    with pytest.raises(SchemaError, match="does not apply"):
        render(spec_for("fig3.csv", "lines", tmp_path / "x.png"))


# --- determinism and CLI


def test_identical_inputs_give_identical_bytes(tmp_path):
    a, b = tmp_path / "a.png", tmp_path / "b.png"
    plt.close(render(spec_for("fig1.csv", "lines", a)))
    plt.close(render(spec_for("fig1.csv", "lines", b)))
    assert a.read_bytes() == b.read_bytes()


def test_cli_renders(tmp_path):
    out = tmp_path / "out.png"
    code = main(["--csv", str(DATA / "fig2.csv"), "--kind", "lines", "--out", str(out)])
    assert code == 0 and out.exists()


def test_cli_reports_schema_error(tmp_path, capsys):
    code = main(
        ["--csv", str(DATA / "fig1.csv"), "--kind", "surface", "--out", str(tmp_path / "x.png")]
    )
    assert code == 1
    assert "error" in capsys.readouterr().err


def test_acceptance_criterion_10(tmp_path):
    # renders all three figure styles from golden tables without altering
    # the data, within the time budget
    start = time.perf_counter()
    for name, kind in (("fig1.csv", "lines"), ("fig2.csv", "lines"), ("fig3.csv", "surface")):
        out = tmp_path / (name + ".png")
        fig = render(spec_for(name, kind, out))
        assert out.exists() and out.stat().st_size > 0
        plt.close(fig)
    test_occupancy_curves_match_csv(tmp_path)
    test_single_curve_matches_csv(tmp_path)
    test_surface_panels_match_csv(tmp_path)
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0
    print(f"\n[criterion 10] golden-table rendering round-trip: PASS ({elapsed:.1f}s)")
