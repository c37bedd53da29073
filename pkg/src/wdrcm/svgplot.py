"""Deterministic SVG plot emission from experiment CSVs.

No external renderer: plots are assembled as text with fixed geometry and
fixed float formatting, so identical input bytes give identical output bytes.
"""

from __future__ import annotations

import csv
import math
import os

from .errors import FormatError

_WIDTH = 640.0
_HEIGHT = 480.0
_ML, _MR, _MT, _MB = 70.0, 20.0, 30.0, 50.0

PLOT_KINDS = ("sweep", "finite-graph", "delta-eff", "degree-tail")

_REQUIRED = {
    "sweep": ("beta", "largest_fraction"),
    "finite-graph": ("L_or_n", "largest_fraction"),
    "delta-eff": ("kernel", "gamma", "delta", "n", "I_value"),
    "degree-tail": ("degree", "count"),
}


def _fmt(x):
    return format(float(x), ".6g")


def _read_rows(path, required):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in required:
            if col not in header:
                raise FormatError(f"missing column '{col}'")
        rows = [row for row in reader]
    if not rows:
        raise FormatError("no data rows")
    return rows


def _scale(lo, hi):
    if hi <= lo:
        hi = lo + 1.0
    return lo, hi


def _xpix(v, lo, hi):
    return _ML + (v - lo) / (hi - lo) * (_WIDTH - _ML - _MR)


def _ypix(v, lo, hi):
    return _HEIGHT - _MB - (v - lo) / (hi - lo) * (_HEIGHT - _MT - _MB)


def _ticks(lo, hi, count=5):
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def _axes(parts, xlo, xhi, ylo, yhi, xlabel, ylabel, xlog=False, ylog=False):
    x0, x1 = _ML, _WIDTH - _MR
    y0, y1 = _HEIGHT - _MB, _MT
    parts.append(f'<line x1="{_fmt(x0)}" y1="{_fmt(y0)}" x2="{_fmt(x1)}" '
                 f'y2="{_fmt(y0)}" stroke="black"/>')
    parts.append(f'<line x1="{_fmt(x0)}" y1="{_fmt(y0)}" x2="{_fmt(x0)}" '
                 f'y2="{_fmt(y1)}" stroke="black"/>')
    for tv in _ticks(xlo, xhi):
        px = _xpix(tv, xlo, xhi)
        label = _fmt(10.0 ** tv) if xlog else _fmt(tv)
        parts.append(f'<line x1="{_fmt(px)}" y1="{_fmt(y0)}" x2="{_fmt(px)}" '
                     f'y2="{_fmt(y0 + 5)}" stroke="black"/>')
        parts.append(f'<text x="{_fmt(px)}" y="{_fmt(y0 + 18)}" font-size="11" '
                     f'text-anchor="middle">{label}</text>')
    for tv in _ticks(ylo, yhi):
        py = _ypix(tv, ylo, yhi)
        label = _fmt(10.0 ** tv) if ylog else _fmt(tv)
        parts.append(f'<line x1="{_fmt(x0 - 5)}" y1="{_fmt(py)}" x2="{_fmt(x0)}" '
                     f'y2="{_fmt(py)}" stroke="black"/>')
        parts.append(f'<text x="{_fmt(x0 - 8)}" y="{_fmt(py + 4)}" font-size="11" '
                     f'text-anchor="end">{label}</text>')
    parts.append(f'<text x="{_fmt((x0 + x1) / 2)}" y="{_fmt(_HEIGHT - 12)}" '
                 f'font-size="12" text-anchor="middle">{xlabel}</text>')
    parts.append(f'<text x="{_fmt(16.0)}" y="{_fmt((y0 + y1) / 2)}" font-size="12" '
                 f'text-anchor="middle" transform="rotate(-90 16 '
                 f'{_fmt((y0 + y1) / 2)})">{ylabel}</text>')


def _polyline(parts, pts, xlo, xhi, ylo, yhi, color, cls="curve"):
    coords = " ".join(f"{_fmt(_xpix(x, xlo, xhi))},{_fmt(_ypix(y, ylo, yhi))}"
                      for x, y in pts)
    parts.append(f'<polyline class="{cls}" points="{coords}" fill="none" '
                 f'stroke="{color}" stroke-width="1.5"/>')


def _dots(parts, pts, xlo, xhi, ylo, yhi, color):
    for x, y in pts:
        parts.append(f'<circle cx="{_fmt(_xpix(x, xlo, xhi))}" '
                     f'cy="{_fmt(_ypix(y, ylo, yhi))}" r="3" fill="{color}"/>')


_COLORS = ("#1f6f8b", "#c05746", "#5b8c5a", "#7d5ba6", "#b08b2e", "#557", "#a55")


def _document(parts):
    body = "\n".join(parts)
    return ('<svg xmlns="http://www.w3.org/2000/svg" '
            f'width="{_fmt(_WIDTH)}" height="{_fmt(_HEIGHT)}" '
            f'viewBox="0 0 {_fmt(_WIDTH)} {_fmt(_HEIGHT)}">\n'
            f'<rect width="{_fmt(_WIDTH)}" height="{_fmt(_HEIGHT)}" fill="white"/>\n'
            f"{body}\n</svg>\n")


def _group_means(rows, key_col, val_col):
    acc = {}
    for row in rows:
        k = float(row[key_col])
        acc.setdefault(k, []).append(float(row[val_col]))
    return sorted((k, sum(v) / len(v)) for k, v in acc.items())


def _render_sweep(rows):
    pts = _group_means(rows, "beta", "largest_fraction")
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    xlo, xhi = _scale(min(xs), max(xs))
    ylo, yhi = _scale(0.0, max(1.0, max(ys)))
    parts = []
    _axes(parts, xlo, xhi, ylo, yhi, "beta", "mean largest fraction")
    _polyline(parts, pts, xlo, xhi, ylo, yhi, _COLORS[0])
    _dots(parts, pts, xlo, xhi, ylo, yhi, _COLORS[0])
    return _document(parts)


def _render_finite(rows):
    pts = _group_means(rows, "L_or_n", "largest_fraction")
    pts = [(math.log10(x), y) for x, y in pts if x > 0]
    if not pts:
        raise FormatError("no positive sizes to plot")
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    xlo, xhi = _scale(min(xs), max(xs))
    ylo, yhi = _scale(0.0, max(1.0, max(ys)))
    parts = []
    _axes(parts, xlo, xhi, ylo, yhi, "n", "mean largest fraction", xlog=True)
    _polyline(parts, pts, xlo, xhi, ylo, yhi, _COLORS[1])
    _dots(parts, pts, xlo, xhi, ylo, yhi, _COLORS[1])
    return _document(parts)


def _render_delta_eff(rows):
    groups = {}
    for row in rows:
        key = (row["kernel"], row["gamma"], row["delta"])
        n = float(row["n"])
        val = float(row["I_value"])
        if n > 0 and val > 0:
            groups.setdefault(key, []).append((math.log10(n), math.log10(val)))
    groups = {k: sorted(v) for k, v in groups.items() if len(v) >= 2}
    if not groups:
        raise FormatError("need at least two positive (n, I_value) points")
    allx = [x for pts in groups.values() for x, _ in pts]
    ally = [y for pts in groups.values() for _, y in pts]
    xlo, xhi = _scale(min(allx), max(allx))
    ylo, yhi = _scale(min(ally), max(ally))
    parts = []
    _axes(parts, xlo, xhi, ylo, yhi, "n", "I(n)", xlog=True, ylog=True)
    for gi, key in enumerate(sorted(groups)):
        pts = groups[key]
        color = _COLORS[gi % len(_COLORS)]
        _dots(parts, pts, xlo, xhi, ylo, yhi, color)
        # least-squares line in log-log coordinates, one segment per group
        n_pts = len(pts)
        mx = sum(x for x, _ in pts) / n_pts
        my = sum(y for _, y in pts) / n_pts
        sxx = sum((x - mx) ** 2 for x, _ in pts)
        sxy = sum((x - mx) * (y - my) for x, y in pts)
        slope = sxy / sxx if sxx > 0 else 0.0
        xa, xb = pts[0][0], pts[-1][0]
        seg = [(xa, my + slope * (xa - mx)), (xb, my + slope * (xb - mx))]
        _polyline(parts, seg, xlo, xhi, ylo, yhi, color, cls="fit")
        parts.append(f'<text x="{_fmt(_WIDTH - _MR - 4)}" '
                     f'y="{_fmt(_MT + 14 + 14 * gi)}" font-size="11" '
                     f'text-anchor="end" fill="{color}">'
                     f'{key[0]} g={key[1]} d={key[2]}: slope {_fmt(slope)}</text>')
    return _document(parts)


def _render_degree_tail(rows):
    hist = {}
    for row in rows:
        d = int(float(row["degree"]))
        c = float(row["count"])
        if c > 0:
            hist[d] = hist.get(d, 0.0) + c
    degs = sorted(d for d in hist if d > 0)
    if len(degs) < 2:
        raise FormatError("need at least two positive-degree bins")
    total = sum(hist[d] for d in hist)
    tail = 0.0
    ccdf = {}
    for d in reversed(degs):
        tail += hist[d]
        ccdf[d] = tail / total
    pts = [(math.log10(d), math.log10(ccdf[d])) for d in degs if ccdf[d] > 0]
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    xlo, xhi = _scale(min(xs), max(xs))
    ylo, yhi = _scale(min(ys), max(ys))
    parts = []
    _axes(parts, xlo, xhi, ylo, yhi, "degree", "P(D >= k)", xlog=True, ylog=True)
    _polyline(parts, pts, xlo, xhi, ylo, yhi, _COLORS[2])
    return _document(parts)


_RENDERERS = {
    "sweep": _render_sweep,
    "finite-graph": _render_finite,
    "delta-eff": _render_delta_eff,
    "degree-tail": _render_degree_tail,
}


def emit_plot(csv_path, kind, out_path=None):
    """Render csv_path as a deterministic SVG; returns the output path.

    Raises FormatError naming the first missing column, or on empty data,
    in which case no file is written.
    """
    if kind not in _RENDERERS:
        raise FormatError(f"unknown plot kind '{kind}'")
    rows = _read_rows(csv_path, _REQUIRED[kind])
    svg = _RENDERERS[kind](rows)
    if out_path is None:
        out_path = os.path.splitext(csv_path)[0] + ".svg"
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(svg)
    return out_path
