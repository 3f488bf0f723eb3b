"""File writers: CSV tables, Graphviz chain diagrams and SVG heatmaps."""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import SweepGrid, is_unsafe_state
from .egt import StationaryDistribution, TransitionMatrix

SAFE_FILL = "blue"
UNSAFE_FILL = "orange"

# (position, hex) stops; sequential for frequencies on [0, 1], diverging for welfare.
SEQUENTIAL_STOPS = ((0.0, "#f7fbff"), (0.5, "#6baed6"), (1.0, "#08306b"))
DIVERGING_STOPS = ((0.0, "#b2182b"), (0.5, "#f7f7f7"), (1.0, "#2166ac"))


def num(x: float) -> str:
    """Shortest round-trip text of a double, independent of locale."""
    return repr(float(x))


def metadata_lines(config_items: list, extra: dict | None = None) -> list:
    lines = [f"regmarket {__version__}"]
    lines += [f"{k} = {v}" for k, v in config_items]
    for k, v in (extra or {}).items():
        lines.append(f"{k}: {v}")
    return lines


def _xml_comment(lines: list) -> str:
    body = "\n".join(line.replace("--", "- -") for line in lines)
    return f"<!--\n{body}\n-->\n"


def write_text(path: Path, text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def _csv_text(header: list, rows: list, meta: list) -> str:
    buf = io.StringIO()
    for line in meta:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def chain_csv(P: TransitionMatrix, v: StationaryDistribution, meta: list) -> str:
    rows = [["stationary", str(st), "", num(v[st])] for st in v.labels]
    for i, src in enumerate(P.labels):
        for j, dst in enumerate(P.labels):
            rows.append(["transition", str(src), str(dst), num(P.matrix[i, j])])
    return _csv_text(["record", "state", "to", "value"], rows, meta)


def chain_dot(P: TransitionMatrix, v: StationaryDistribution, meta: list) -> str:
    out = [f"// {line}" for line in meta]
    out.append("digraph chain {")
    out.append("  node [shape=circle, style=filled, fontcolor=black];")
    for st in v.labels:
        fill = UNSAFE_FILL if is_unsafe_state(st) else SAFE_FILL
        out.append(f'  "{st}" [label="{st}\\n{100 * v[st]:.2f}%", fillcolor={fill}];')
    for i, src in enumerate(P.labels):
        for j, dst in enumerate(P.labels):
            if i != j and P.matrix[i, j] > 0:
                out.append(f'  "{src}" -> "{dst}" [label="{P.matrix[i, j]:.4g}"];')
    out.append("}")
    return "\n".join(out) + "\n"


def sweep_csv(grid: SweepGrid, metrics: tuple, meta: list) -> str:
    header = [grid.axis1.name, grid.axis2.name, *metrics]
    rows = []
    for i, j, x, y in grid.coords():
        cell = grid.cells[i][j]
        rows.append([num(x), num(y), *(num(cell.metric(m)) for m in metrics)])
    return _csv_text(header, rows, meta)


def _lerp_color(stops, t: float) -> str:
    t = min(max(t, 0.0), 1.0)
    for (t0, c0), (t1, c1) in zip(stops, stops[1:]):
        if t <= t1:
            f = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
            a = [int(c0[k : k + 2], 16) for k in (1, 3, 5)]
            b = [int(c1[k : k + 2], 16) for k in (1, 3, 5)]
            return "#" + "".join(f"{round(x + f * (y - x)):02x}" for x, y in zip(a, b))
    return stops[-1][1]


def _scale(metric: str, values: np.ndarray):
    if metric == "delta_welfare":
        span = float(np.max(np.abs(values))) or 1.0
        return DIVERGING_STOPS, (-span, span)
    return SEQUENTIAL_STOPS, (0.0, 1.0)


def heatmap_svg(grid: SweepGrid, metric: str, meta: list, overlay_thresholds: bool = True) -> str:
    """Static SVG 1.1 heatmap of one metric over the sweep grid.

    ``axis1`` runs along x, ``axis2`` along y.  On (s, p_r) grids the
    no-market risk-dominance and social-efficiency boundaries
    ``p_r = 1 - 1/(3s)`` and ``p_r = 1 - 1/s`` are drawn as polylines.
    """
    values = grid.metric(metric)
    stops, (vmin, vmax) = _scale(metric, values)
    n1, n2 = grid.shape
    left, top, size = 70, 30, 400
    cw, ch = size / n1, size / n2
    x0, x1 = grid.axis1.lo, grid.axis1.hi
    y0, y1 = grid.axis2.lo, grid.axis2.hi

    def px(x):
        return left + (x - x0) / ((x1 - x0) or 1.0) * size

    def py(y):
        return top + size - (y - y0) / ((y1 - y0) or 1.0) * size

    scale_meta = [
        f"metric: {metric}",
        f"color range: [{num(vmin)}, {num(vmax)}]",
        "color stops: " + ", ".join(f"{t}={c}" for t, c in stops),
    ]
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>\n',
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{left + size + 110}" height="{top + size + 60}">\n',
        _xml_comment(meta + scale_meta),
    ]
    for i in range(n1):
        for j in range(n2):
            t = (values[i, j] - vmin) / ((vmax - vmin) or 1.0)
            parts.append(
                f'<rect x="{left + i * cw:.3f}" y="{top + size - (j + 1) * ch:.3f}" '
                f'width="{cw:.3f}" height="{ch:.3f}" fill="{_lerp_color(stops, t)}"/>\n'
            )
    parts.append(
        f'<rect x="{left}" y="{top}" width="{size}" height="{size}" fill="none" stroke="black"/>\n'
    )
    for k in range(5):
        xv = x0 + k * (x1 - x0) / 4
        yv = y0 + k * (y1 - y0) / 4
        parts.append(
            f'<line x1="{px(xv):.2f}" y1="{top + size}" x2="{px(xv):.2f}" y2="{top + size + 5}" stroke="black"/>\n'
            f'<text x="{px(xv):.2f}" y="{top + size + 18}" font-size="11" text-anchor="middle">{xv:.3g}</text>\n'
            f'<line x1="{left - 5}" y1="{py(yv):.2f}" x2="{left}" y2="{py(yv):.2f}" stroke="black"/>\n'
            f'<text x="{left - 8}" y="{py(yv) + 4:.2f}" font-size="11" text-anchor="end">{yv:.3g}</text>\n'
        )
    parts.append(
        f'<text x="{left + size / 2}" y="{top + size + 40}" font-size="13" text-anchor="middle">{grid.axis1.name}</text>\n'
        f'<text x="{left - 45}" y="{top + size / 2}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 {left - 45} {top + size / 2})">{grid.axis2.name}</text>\n'
        f'<text x="{left + size / 2}" y="{top - 10}" font-size="14" text-anchor="middle">{metric} ({grid.scheme.value})</text>\n'
    )
    if overlay_thresholds and (grid.axis1.name, grid.axis2.name) == ("s", "p_r"):
        xs = np.linspace(x0, x1, 100)
        for denom in (3.0, 1.0):
            pts = " ".join(
                f"{px(s):.2f},{py(min(max(1 - 1 / (denom * s), y0), y1)):.2f}" for s in xs
            )
            parts.append(f'<polyline points="{pts}" fill="none" stroke="black" stroke-width="1.5"/>\n')
    bar_x = left + size + 20
    for k in range(50):
        t = 1 - k / 49
        parts.append(
            f'<rect x="{bar_x}" y="{top + k * size / 50:.2f}" width="15" height="{size / 50 + 0.5:.2f}" '
            f'fill="{_lerp_color(stops, t)}"/>\n'
        )
    parts.append(
        f'<text x="{bar_x + 20}" y="{top + 10}" font-size="11">{vmax:.3g}</text>\n'
        f'<text x="{bar_x + 20}" y="{top + size}" font-size="11">{vmin:.3g}</text>\n'
        "</svg>\n"
    )
    return "".join(parts)
