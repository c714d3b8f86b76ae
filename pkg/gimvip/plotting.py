"""
Pure-text SVG 1.1 line charts with a logarithmic y axis.
"""

import logging
import math
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union
from xml.sax.saxutils import escape

from .trajectory import Trajectory

logger = logging.getLogger(__name__)

WIDTH = 640
HEIGHT = 400
MARGIN_LEFT = 70
MARGIN_RIGHT = 20
MARGIN_TOP = 40
MARGIN_BOTTOM = 50
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")

Series = Tuple[Sequence[float], Sequence[float]]


def _positive(xs: Sequence[float], ys: Sequence[float]) -> List[Tuple[float, float]]:
    return [(float(x), float(y)) for x, y in zip(xs, ys) if y > 0 and math.isfinite(y)]


def _span(lo: float, hi: float) -> Tuple[float, float]:
    if hi > lo:
        return lo, hi
    return lo - 0.5, hi + 0.5


def render_svg(series: Dict[str, Series], title: str = "", x_label: str = "t") -> str:
    """Render named (x, y) series; y values <= 0 cannot be shown on a log axis and are dropped."""
    points = {name: _positive(xs, ys) for name, (xs, ys) in series.items()}
    every = [pt for pts in points.values() for pt in pts]
    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    if every:
        x_lo, x_hi = _span(min(p[0] for p in every), max(p[0] for p in every))
        y_lo, y_hi = _span(
            math.floor(math.log10(min(p[1] for p in every))),
            math.ceil(math.log10(max(p[1] for p in every))),
        )
    else:
        x_lo, x_hi, y_lo, y_hi = 0.0, 1.0, 0.0, 1.0

    def sx(x: float) -> float:
        return MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y: float) -> float:
        return MARGIN_TOP + (y_hi - math.log10(y)) / (y_hi - y_lo) * plot_h

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="24" text-anchor="middle" font-size="14">'
        f"{escape(title)}</text>",
        f'<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="black"/>',
    ]
    for decade in range(int(y_lo), int(y_hi) + 1):
        y = MARGIN_TOP + (y_hi - decade) / (y_hi - y_lo) * plot_h
        out.append(
            f'<line x1="{MARGIN_LEFT}" y1="{y:.2f}" x2="{MARGIN_LEFT + plot_w}" y2="{y:.2f}" '
            'stroke="#dddddd"/>'
        )
        out.append(
            f'<text x="{MARGIN_LEFT - 6}" y="{y + 4:.2f}" text-anchor="end" font-size="11">'
            f"1e{decade}</text>"
        )
    for x in (x_lo, x_hi):
        out.append(
            f'<text x="{sx(x):.2f}" y="{HEIGHT - MARGIN_BOTTOM + 16}" text-anchor="middle" '
            f'font-size="11">{x:.4g}</text>'
        )
    out.append(
        f'<text x="{MARGIN_LEFT + plot_w / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle" '
        f'font-size="12">{escape(x_label)}</text>'
    )

    for i, (name, pts) in enumerate(points.items()):
        color = COLORS[i % len(COLORS)]
        if len(pts) == 1:
            x, y = pts[0]
            out.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" fill="{color}"/>')
        elif pts:
            coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
            out.append(f'<polyline fill="none" stroke="{color}" points="{coords}"/>')
        legend_y = MARGIN_TOP + 16 + 16 * i
        out.append(
            f'<text x="{MARGIN_LEFT + plot_w - 8}" y="{legend_y}" text-anchor="end" '
            f'font-size="11" fill="{color}">{escape(name)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def trajectory_svg(traj: Trajectory, title: str = "") -> str:
    """Residual norm, and V when present, against the index column."""
    times = [s.t for s in traj.samples]
    series: Dict[str, Series] = {"xi_norm": (times, [s.xi_norm for s in traj.samples])}
    if any(s.v_lyap is not None for s in traj.samples):
        series["V"] = (
            [s.t for s in traj.samples if s.v_lyap is not None],
            [s.v_lyap for s in traj.samples if s.v_lyap is not None],
        )
    return render_svg(series, title=title)


def write_svg(path: Union[str, Path], text: str) -> Path:
    path = Path(path)
    path.write_text(text, encoding="utf-8")
    logger.info(f"Wrote {path}")
    return path
