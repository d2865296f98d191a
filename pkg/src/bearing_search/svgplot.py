"""Minimal, deterministic SVG line and scatter plots.

Output depends only on the data: coordinates are printed with fixed
precision and elements are emitted in a fixed order, so identical inputs give
byte-identical files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 480
MARGIN = (70, 30, 40, 55)  # left, right, top, bottom
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _fmt(v: float) -> str:
    s = f"{v:.2f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def nice_ticks(lo: float, hi: float, target: int = 6) -> List[float]:
    """Round tick positions covering ``[lo, hi]`` (1-2-5 steps)."""
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 5, 10) if m * mag >= raw)
    first = math.ceil(lo / step - 1e-9)
    ticks = []
    i = first
    while i * step <= hi + 1e-9 * step:
        ticks.append(round(i * step, 12) + 0.0)
        i += 1
    return ticks


def _span(values: Sequence[float]) -> Tuple[float, float]:
    vals = [v for v in values if math.isfinite(v)]
    if not vals:
        return 0.0, 1.0
    lo, hi = min(vals), max(vals)
    if hi - lo < 1e-12:
        pad = max(abs(lo) * 0.05, 0.5)
        return lo - pad, hi + pad
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


@dataclass
class Figure:
    title: str
    xlabel: str
    ylabel: str
    equal_aspect: bool = False
    _lines: List[tuple] = field(default_factory=list)
    _points: List[tuple] = field(default_factory=list)

    def line(self, xs, ys, label: str, css: str) -> None:
        self._lines.append((list(xs), list(ys), label, css))

    def scatter(self, xs, ys, label: str, css: str, radius: float = 2.0, marker: str = "circle") -> None:
        self._points.append((list(xs), list(ys), label, css, radius, marker))

    def _bounds(self):
        xs = [x for s in self._lines + self._points for x in s[0]]
        ys = [y for s in self._lines + self._points for y in s[1]]
        (x0, x1), (y0, y1) = _span(xs), _span(ys)
        if self.equal_aspect:
            pw = WIDTH - MARGIN[0] - MARGIN[1]
            ph = HEIGHT - MARGIN[2] - MARGIN[3]
            scale = max((x1 - x0) / pw, (y1 - y0) / ph)
            cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
            x0, x1 = cx - 0.5 * scale * pw, cx + 0.5 * scale * pw
            y0, y1 = cy - 0.5 * scale * ph, cy + 0.5 * scale * ph
        return x0, x1, y0, y1

    def render(self) -> str:
        x0, x1, y0, y1 = self._bounds()
        left, right, top, bottom = MARGIN
        pw, ph = WIDTH - left - right, HEIGHT - top - bottom

        def sx(x):
            return left + (x - x0) / (x1 - x0) * pw

        def sy(y):
            return top + (y1 - y) / (y1 - y0) * ph

        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
            f"<title>{escape(self.title)}</title>",
            f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<g class="axes" stroke="#444" fill="none">'
            f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}"/></g>',
        ]
        ticks = ['<g class="ticks" fill="#444">']
        for t in nice_ticks(x0, x1):
            ticks.append(f'<text x="{_fmt(sx(t))}" y="{top + ph + 16}" text-anchor="middle">{_fmt(t)}</text>')
        for t in nice_ticks(y0, y1):
            ticks.append(f'<text x="{left - 6}" y="{_fmt(sy(t) + 4)}" text-anchor="end">{_fmt(t)}</text>')
        ticks.append("</g>")
        out.extend(ticks)
        out.append(
            f'<text x="{left + pw / 2:.0f}" y="{HEIGHT - 12}" text-anchor="middle">{escape(self.xlabel)}</text>'
        )
        out.append(
            f'<text x="16" y="{top + ph / 2:.0f}" text-anchor="middle" '
            f'transform="rotate(-90 16 {top + ph / 2:.0f})">{escape(self.ylabel)}</text>'
        )
        out.append(f'<text x="{left}" y="{top - 12}">{escape(self.title)}</text>')

        legend = []
        for i, (xs, ys, label, css) in enumerate(self._lines):
            color = COLORS[i % len(COLORS)]
            # NaN gaps break a series into separate runs
            pts = " ".join(
                f"{_fmt(sx(x))},{_fmt(sy(y))}"
                for x, y in zip(xs, ys)
                if math.isfinite(x) and math.isfinite(y)
            )
            out.append(
                f'<polyline class="{css}" fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>'
            )
            legend.append((label, color))
        for j, (xs, ys, label, css, radius, marker) in enumerate(self._points):
            color = COLORS[(len(self._lines) + j) % len(COLORS)]
            out.append(f'<g class="{css}" fill="{color}">')
            for x, y in zip(xs, ys):
                if not (math.isfinite(x) and math.isfinite(y)):
                    continue
                cx, cy = sx(x), sy(y)
                if marker == "cross":
                    r = radius
                    out.append(
                        f'<path d="M{_fmt(cx - r)},{_fmt(cy - r)}L{_fmt(cx + r)},{_fmt(cy + r)}'
                        f'M{_fmt(cx - r)},{_fmt(cy + r)}L{_fmt(cx + r)},{_fmt(cy - r)}" '
                        f'stroke="{color}" stroke-width="2.5"/>'
                    )
                else:
                    out.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(radius)}"/>')
            out.append("</g>")
            legend.append((label, color))

        out.append('<g class="legend">')
        for i, (label, color) in enumerate(legend):
            y = top + 16 + 16 * i
            out.append(f'<rect x="{left + pw - 150}" y="{y - 9}" width="10" height="10" fill="{color}"/>')
            out.append(f'<text x="{left + pw - 135}" y="{y}">{escape(label)}</text>')
        out.append("</g>")
        out.append("</svg>")
        return "\n".join(out) + "\n"


def _finite_pairs(xs, ys):
    pairs = [(x, y) for x, y in zip(xs, ys) if math.isfinite(x) and math.isfinite(y)]
    return [p[0] for p in pairs], [p[1] for p in pairs]


def trajectory_svg(cols, target: Optional[Sequence[float]] = None) -> str:
    """Vehicle path, estimate scatter and (when known) the true target."""
    fig = Figure("Vehicle trajectory and target estimates", "x [m]", "y [m]", equal_aspect=True)
    fig.line(cols["x"], cols["y"], "vehicle", "path")
    ex, ey = _finite_pairs(cols["p_hat_x"], cols["p_hat_y"])
    fig.scatter(ex, ey, "estimates", "estimate", radius=1.5)
    if target is not None:
        fig.scatter([target[0]], [target[1]], "target", "target", radius=6.0, marker="cross")
    return fig.render()


def est_error_svg(cols) -> str:
    fig = Figure("Estimation error", "t [s]", "e_est [m]")
    fig.line(cols["t"], cols["e_est"], "e_est", "est-error")
    return fig.render()


def range_svg(cols) -> str:
    fig = Figure("True and estimated range", "t [s]", "range [m]")
    fig.line(cols["t"], cols["r_true"], "true range", "range-true")
    fig.line(cols["t"], cols["r_hat"], "estimated range", "range-est")
    return fig.render()


def sweep_svg(cols) -> str:
    fig = Figure("Search time versus beta", "beta", "mean search time [s]")
    fig.scatter(cols["beta"], cols["mean_search_time"], "mean search time", "sweep", radius=3.0)
    return fig.render()
