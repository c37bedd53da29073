"""Plot emitter checks: structure, validation, and failure atomicity."""

import xml.etree.ElementTree as ET

import pytest

from wdrcm.errors import FormatError
from wdrcm.svgplot import PLOT_KINDS, emit_plot


def _write_csv(path, header, rows):
    lines = [",".join(header)] + [",".join(str(c) for c in r) for r in rows]
    path.write_text("\n".join(lines) + "\n")
    return str(path)


def test_sweep_plot_structure(tmp_path):
    csv = _write_csv(
        tmp_path / "sweep.csv",
        ["beta", "largest_fraction", "seed"],
        [[0.5, 0.1, 1], [0.5, 0.3, 2], [1.0, 0.6, 3], [2.0, 0.9, 4]],
    )
    out = emit_plot(csv, "sweep", str(tmp_path / "sweep.svg"))
    text = open(out).read()
    root = ET.fromstring(text)
    assert root.tag.endswith("svg")
    assert 'class="curve"' in text
    # per-beta means become one point each
    assert text.count("<circle") == 3


def test_finite_graph_plot(tmp_path):
    csv = _write_csv(
        tmp_path / "finite.csv",
        ["L_or_n", "largest_fraction"],
        [[1000, 0.5], [1000, 0.7], [10000, 0.4], [100000, 0.3]],
    )
    out = emit_plot(csv, "finite-graph")
    assert out == str(tmp_path / "finite.svg")
    ET.fromstring(open(out).read())


def test_delta_eff_plot_one_fit_per_group(tmp_path):
    header = ["kernel", "gamma", "delta", "n", "I_value"]
    csv = _write_csv(
        tmp_path / "delta_eff_curve.csv",
        header,
        [
            ["min", 0.5, 3.0, 100, 1e-3],
            ["min", 0.5, 3.0, 1000, 1e-5],
            ["min", 0.5, 3.0, 10000, 1e-7],
        ],
    )
    text = open(emit_plot(csv, "delta-eff", str(tmp_path / "a.svg"))).read()
    assert text.count('class="fit"') == 1
    two = _write_csv(
        tmp_path / "two.csv",
        header,
        [
            ["min", 0.5, 3.0, 100, 1e-3],
            ["min", 0.5, 3.0, 1000, 1e-5],
            ["constant", 0.0, 3.0, 100, 2e-3],
            ["constant", 0.0, 3.0, 1000, 2e-5],
        ],
    )
    text2 = open(emit_plot(two, "delta-eff", str(tmp_path / "b.svg"))).read()
    assert text2.count('class="fit"') == 2
    ET.fromstring(text2)


def test_degree_tail_plot(tmp_path):
    csv = _write_csv(
        tmp_path / "degree_hist.csv",
        ["degree", "count"],
        [[0, 5], [1, 10], [2, 7], [5, 2], [11, 1]],
    )
    out = emit_plot(csv, "degree-tail", str(tmp_path / "tail.svg"))
    ET.fromstring(open(out).read())


def test_missing_column_names_the_column(tmp_path):
    csv = _write_csv(tmp_path / "bad.csv", ["beta", "seed"], [[0.5, 1]])
    out = tmp_path / "bad.svg"
    with pytest.raises(FormatError, match="largest_fraction"):
        emit_plot(csv, "sweep", str(out))
    # nothing is written on a failed emit
    assert not out.exists()


def test_empty_csv_rejected(tmp_path):
    csv = _write_csv(tmp_path / "empty.csv", ["beta", "largest_fraction"], [])
    out = tmp_path / "empty.svg"
    with pytest.raises(FormatError, match="no data rows"):
        emit_plot(csv, "sweep", str(out))
    assert not out.exists()


def test_unknown_kind_rejected(tmp_path):
    csv = _write_csv(tmp_path / "x.csv", ["beta", "largest_fraction"], [[1, 1]])
    with pytest.raises(FormatError):
        emit_plot(csv, "pie-chart", str(tmp_path / "x.svg"))
    assert sorted(PLOT_KINDS) == ["degree-tail", "delta-eff", "finite-graph", "sweep"]


def test_deterministic_output(tmp_path):
    csv = _write_csv(
        tmp_path / "d.csv",
        ["beta", "largest_fraction"],
        [[0.5, 0.25], [1.0, 0.5]],
    )
    a = open(emit_plot(csv, "sweep", str(tmp_path / "d1.svg"))).read()
    b = open(emit_plot(csv, "sweep", str(tmp_path / "d2.svg"))).read()
    assert a == b
