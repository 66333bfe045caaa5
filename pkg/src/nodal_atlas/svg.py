"""Static SVG overlays with a fixed 800x600 viewport.

Output is plain text built from formatted numbers, so identical inputs
give byte-identical files.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .geometry import (DiscComplementRegion, Domain, Line2, PolygonUnionRegion, Region,
                       StripRegion, line_domain_clip)

WIDTH, HEIGHT = 800, 600
MARGIN = 40
LEGEND_W = 170


def _f(v: float) -> str:
    return f"{v:.3f}"


class Canvas:
    """Uniformly scaled drawing area for one domain."""

    def __init__(self, D: Domain, title: str = ""):
        self.D = D
        xmin, ymin, xmax, ymax = D.bbox
        w = max(xmax - xmin, 1e-12)
        h = max(ymax - ymin, 1e-12)
        self.scale = min((WIDTH - LEGEND_W - 2 * MARGIN) / w, (HEIGHT - 2 * MARGIN) / h)
        self.x0 = MARGIN + 0.5 * ((WIDTH - LEGEND_W - 2 * MARGIN) - self.scale * w) - self.scale * xmin
        self.y0 = HEIGHT - MARGIN - 0.5 * ((HEIGHT - 2 * MARGIN) - self.scale * h) + self.scale * ymin
        self.items: list[str] = []
        self.legend: list[tuple[str, str, str]] = []
        self.title = title

    def tx(self, p) -> tuple[float, float]:
        return self.x0 + self.scale * p[0], self.y0 - self.scale * p[1]

    def _pts(self, pts) -> str:
        return " ".join(f"{_f(x)},{_f(y)}" for x, y in (self.tx(p) for p in pts))

    def polygon(self, pts, stroke="black", fill="none", width=1.5, opacity=1.0, dash=None,
                clip=False):
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        extra += ' clip-path="url(#domain)"' if clip else ""
        self.items.append(f'<polygon points="{self._pts(pts)}" stroke="{stroke}" fill="{fill}" '
                          f'stroke-width="{width}" fill-opacity="{opacity}"{extra}/>')

    def segments(self, segs, stroke="red", width=1.5, opacity=1.0):
        if len(segs) == 0:
            return
        d = " ".join(f"M{_f(a[0])},{_f(a[1])}L{_f(b[0])},{_f(b[1])}"
                     for a, b in ((self.tx(s[0]), self.tx(s[1])) for s in segs))
        self.items.append(f'<path d="{d}" stroke="{stroke}" stroke-width="{width}" '
                          f'stroke-opacity="{opacity}" fill="none"/>')

    def polyline(self, pts, stroke="gray", width=0.8, opacity=1.0):
        if len(pts) < 2:
            return
        self.items.append(f'<polyline points="{self._pts(pts)}" stroke="{stroke}" '
                          f'stroke-width="{width}" stroke-opacity="{opacity}" fill="none"/>')

    def circle(self, c, r, stroke="black", fill="none", dash=None, clip=False, width=1.0):
        x, y = self.tx(c)
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        extra += ' clip-path="url(#domain)"' if clip else ""
        self.items.append(f'<circle cx="{_f(x)}" cy="{_f(y)}" r="{_f(r * self.scale)}" '
                          f'stroke="{stroke}" fill="{fill}" stroke-width="{width}"{extra}/>')

    def marker(self, p, color="black", r=3.0):
        x, y = self.tx(p)
        self.items.append(f'<circle cx="{_f(x)}" cy="{_f(y)}" r="{r}" fill="{color}"/>')

    def add_legend(self, label: str, color: str, style: str = "line"):
        self.legend.append((label, color, style))

    def region(self, R: Region, color: str, label: str):
        """Outline of a region, clipped to the domain."""
        if isinstance(R, DiscComplementRegion):
            for c, r in zip(R.centers, R.radii):
                self.circle(c, r, stroke=color, dash="6,3", clip=True, width=1.5)
        elif isinstance(R, PolygonUnionRegion):
            for poly in R.polygons:
                self.polygon(poly.vertices, stroke=color, fill=color, opacity=0.15, width=1.0)
        elif isinstance(R, StripRegion):
            xmin, ymin, xmax, ymax = self.D.bbox
            lo, hi = R.center - R.half_width, R.center + R.half_width
            self.polygon([(lo, ymin), (hi, ymin), (hi, ymax), (lo, ymax)], stroke=color,
                         fill=color, opacity=0.15, dash="6,3", clip=True, width=1.0)
        else:
            return
        self.add_legend(label, color, "region")

    def render(self) -> str:
        out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
               f'viewBox="0 0 {WIDTH} {HEIGHT}">',
               f'<defs><clipPath id="domain"><polygon points="{self._pts(self.D.vertices)}"/>'
               f'</clipPath></defs>',
               f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>']
        out += self.items
        out.append(f'<polygon points="{self._pts(self.D.vertices)}" stroke="black" '
                   f'fill="none" stroke-width="2"/>')
        lx = WIDTH - LEGEND_W + 10
        ly = MARGIN
        if self.title:
            out.append(f'<text x="{lx}" y="{ly}" font-family="sans-serif" font-size="13" '
                       f'font-weight="bold">{_esc(self.title)}</text>')
            ly += 22
        entries = [("domain", "black", "line")] + self.legend
        for label, color, style in entries:
            if style == "region":
                out.append(f'<rect x="{lx}" y="{ly - 9}" width="18" height="10" fill="{color}" '
                           f'fill-opacity="0.3" stroke="{color}"/>')
            elif style == "dot":
                out.append(f'<circle cx="{lx + 9}" cy="{ly - 4}" r="3" fill="{color}"/>')
            else:
                out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 18}" y2="{ly - 4}" '
                           f'stroke="{color}" stroke-width="2"/>')
            out.append(f'<text x="{lx + 24}" y="{ly}" font-family="sans-serif" '
                       f'font-size="12">{_esc(label)}</text>')
            ly += 18
        out.append("</svg>")
        return "\n".join(out) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.render())


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def nodal_figure(D: Domain, segments, regions=(), title="nodal line") -> Canvas:
    cv = Canvas(D, title)
    colors = ["#1f77b4", "#2ca02c", "#9467bd"]
    for (label, R), color in zip(regions, colors):
        cv.region(R, color, label)
    cv.segments(segments, stroke="#d62728", width=2.0)
    cv.add_legend("nodal line", "#d62728")
    return cv


def mirror_figure(D: Domain, traj, max_lines: int = 60, title="mirror coupling") -> Canvas:
    """Paths of both particles and a sample of pre-coupling mirror positions."""
    cv = Canvas(D, title)
    n_pre = traj.n_precoupling
    if n_pre > 0:
        origin, direction = traj.mirror_lines()
        pick = np.unique(np.linspace(0, n_pre - 1, min(max_lines, n_pre)).astype(int))
        segs = []
        for i in pick:
            for p, q in line_domain_clip(Line2(origin[i], direction[i]), D):
                segs.append((p, q))
        cv.segments(np.array(segs).reshape(-1, 2, 2), stroke="#ff7f0e", width=0.8, opacity=0.6)
    cv.add_legend("mirror K_t", "#ff7f0e")
    step = max(1, len(traj.t) // 2000)
    cv.polyline(traj.X[::step], stroke="#1f77b4", opacity=0.7)
    cv.polyline(traj.Y[::step], stroke="#2ca02c", opacity=0.7)
    cv.add_legend("X path", "#1f77b4")
    cv.add_legend("Y path", "#2ca02c")
    cv.marker(traj.X[0], "#1f77b4")
    cv.marker(traj.Y[0], "#2ca02c")
    return cv
