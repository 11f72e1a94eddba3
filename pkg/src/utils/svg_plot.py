"""
Minimal SVG line plots for curve files.

Produces a single polyline with a frame, tick labels at both ends of each
axis and axis titles. Output depends only on the data, so repeated runs are
byte-identical.
"""

import math
from pathlib import Path
from typing import Sequence, Tuple, Union
from xml.sax.saxutils import escape

from src.app.core.errors import DomainError

WIDTH, HEIGHT = 640, 420
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 90, 30, 40, 60


def _span(lo: float, hi: float) -> Tuple[float, float]:
    if hi > lo:
        return lo, hi
    pad = abs(lo) * 0.05 or 1.0
    return lo - pad, hi + pad


def render_svg(
    points: Sequence[Tuple[float, float]],
    title: str,
    x_label: str,
    y_label: str,
    log_x: bool = False,
) -> str:
    """SVG document with one polyline through `points`."""
    if not points:
        raise DomainError("cannot plot an empty curve")
    xs = [float(x) for x, _ in points]
    ys = [float(y) for _, y in points]
    if not all(math.isfinite(v) for v in xs + ys):
        raise DomainError("plot data must be finite")
    if log_x:
        if min(xs) <= 0:
            raise DomainError("log-x plots need positive x values")
        xs = [math.log10(x) for x in xs]

    x_lo, x_hi = _span(min(xs), max(xs))
    y_lo, y_hi = _span(min(ys), max(ys))
    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def px(x: float) -> float:
        return MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return MARGIN_TOP + (y_hi - y) / (y_hi - y_lo) * plot_h

    polyline = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
    x_tick = (lambda v: f"{10 ** v:.3g}") if log_x else (lambda v: f"{v:.3g}")
    bottom = MARGIN_TOP + plot_h
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="black"/>',
        f'<polyline fill="none" stroke="#1f5fa8" stroke-width="1.5" points="{polyline}"/>',
        f'<text x="{WIDTH / 2:.1f}" y="{MARGIN_TOP - 14}" text-anchor="middle" '
        f'font-size="15">{escape(title)}</text>',
        f'<text x="{MARGIN_LEFT}" y="{bottom + 18}" text-anchor="start" '
        f'font-size="11">{x_tick(x_lo)}</text>',
        f'<text x="{MARGIN_LEFT + plot_w}" y="{bottom + 18}" text-anchor="end" '
        f'font-size="11">{x_tick(x_hi)}</text>',
        f'<text x="{MARGIN_LEFT + plot_w / 2:.1f}" y="{HEIGHT - 14}" text-anchor="middle" '
        f'font-size="13">{escape(x_label)}{" (log)" if log_x else ""}</text>',
        f'<text x="{MARGIN_LEFT - 6}" y="{bottom}" text-anchor="end" '
        f'font-size="11">{y_lo:.3g}</text>',
        f'<text x="{MARGIN_LEFT - 6}" y="{MARGIN_TOP + 10}" text-anchor="end" '
        f'font-size="11">{y_hi:.3g}</text>',
        f'<text x="20" y="{MARGIN_TOP + plot_h / 2:.1f}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 20 {MARGIN_TOP + plot_h / 2:.1f})">{escape(y_label)}</text>',
        "</svg>",
    ]
    return "\n".join(lines) + "\n"


def write_svg(
    path: Union[str, Path],
    points: Sequence[Tuple[float, float]],
    title: str,
    x_label: str,
    y_label: str,
    log_x: bool = False,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_svg(points, title, x_label, y_label, log_x), encoding="utf-8")
    return path
