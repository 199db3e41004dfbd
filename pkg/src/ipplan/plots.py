"""Figures as plain SVG, built from a small scene graph.

Plot builders emit primitives in data coordinates; :meth:`Scene.render` maps
them into pixel space (y up) in one place.  Keeping the scene inspectable
means tests can assert on geometry instead of parsing markup.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from .gp import GpModel, posterior_covariance
from .graph import SpatialGraph

__all__ = [
    "Line",
    "Polyline",
    "Polygon",
    "Circle",
    "Text",
    "Scene",
    "PALETTE",
    "colormap",
    "reward_curves_scene",
    "value_vs_budget_scene",
    "path_overlay_scene",
    "write_svg",
]

PALETTE = ["#1f6feb", "#d73a49", "#2da44e", "#b08800", "#8250df", "#57606a"]


@dataclass(frozen=True)
class Line:
    x1: float
    y1: float
    x2: float
    y2: float
    stroke: str = "#888888"
    width: float = 1.0


@dataclass(frozen=True)
class Polyline:
    points: tuple
    stroke: str = "#1f6feb"
    width: float = 1.5
    dash: str | None = None


@dataclass(frozen=True)
class Polygon:
    points: tuple
    fill: str = "#1f6feb"
    opacity: float = 0.2


@dataclass(frozen=True)
class Circle:
    cx: float
    cy: float
    r_px: float = 3.0  # marker size is fixed in pixels, not data units
    fill: str = "#1f6feb"
    stroke: str = "none"


@dataclass(frozen=True)
class Text:
    x: float
    y: float
    s: str
    size_px: float = 11.0
    anchor: str = "middle"
    color: str = "#333333"


class Scene:
    def __init__(self, title: str = ""):
        self.title = title
        self.elements: list = []

    def add(self, *elements) -> None:
        self.elements.extend(elements)

    def data_bounds(self) -> tuple[float, float, float, float]:
        xs: list[float] = []
        ys: list[float] = []
        for e in self.elements:
            if isinstance(e, Line):
                xs += [e.x1, e.x2]
                ys += [e.y1, e.y2]
            elif isinstance(e, (Polyline, Polygon)):
                xs += [p[0] for p in e.points]
                ys += [p[1] for p in e.points]
            elif isinstance(e, (Circle, Text)):
                xs.append(e.cx if isinstance(e, Circle) else e.x)
                ys.append(e.cy if isinstance(e, Circle) else e.y)
        if not xs:
            return (0.0, 0.0, 1.0, 1.0)
        xmin, xmax = min(xs), max(xs)
        ymin, ymax = min(ys), max(ys)
        if xmax - xmin == 0:
            xmin, xmax = xmin - 0.5, xmax + 0.5
        if ymax - ymin == 0:
            ymin, ymax = ymin - 0.5, ymax + 0.5
        return (xmin, ymin, xmax, ymax)

    def render(self, width: int = 640, height: int = 420, pad: int = 46) -> str:
        xmin, ymin, xmax, ymax = self.data_bounds()
        sx = (width - 2 * pad) / (xmax - xmin)
        sy = (height - 2 * pad) / (ymax - ymin)

        def X(x):
            return pad + (x - xmin) * sx

        def Y(y):  # svg y axis points down; data y points up
            return height - pad - (y - ymin) * sy

        parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
            f'height="{height}" viewBox="0 0 {width} {height}">',
            f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
        ]
        if self.title:
            parts.append(
                f'<text x="{width / 2:.1f}" y="{pad / 2:.1f}" text-anchor="middle" '
                f'font-size="14" font-family="sans-serif" fill="#111111">'
                f"{escape(self.title)}</text>"
            )
        for e in self.elements:
            if isinstance(e, Line):
                parts.append(
                    f'<line x1="{X(e.x1):.2f}" y1="{Y(e.y1):.2f}" x2="{X(e.x2):.2f}" '
                    f'y2="{Y(e.y2):.2f}" stroke="{e.stroke}" stroke-width="{e.width}"/>'
                )
            elif isinstance(e, Polyline):
                pts = " ".join(f"{X(x):.2f},{Y(y):.2f}" for x, y in e.points)
                dash = f' stroke-dasharray="{e.dash}"' if e.dash else ""
                parts.append(
                    f'<polyline points="{pts}" fill="none" stroke="{e.stroke}" '
                    f'stroke-width="{e.width}"{dash}/>'
                )
            elif isinstance(e, Polygon):
                pts = " ".join(f"{X(x):.2f},{Y(y):.2f}" for x, y in e.points)
                parts.append(
                    f'<polygon points="{pts}" fill="{e.fill}" '
                    f'fill-opacity="{e.opacity}" stroke="none"/>'
                )
            elif isinstance(e, Circle):
                parts.append(
                    f'<circle cx="{X(e.cx):.2f}" cy="{Y(e.cy):.2f}" r="{e.r_px}" '
                    f'fill="{e.fill}" stroke="{e.stroke}"/>'
                )
            elif isinstance(e, Text):
                parts.append(
                    f'<text x="{X(e.x):.2f}" y="{Y(e.y):.2f}" text-anchor="{e.anchor}" '
                    f'font-size="{e.size_px}" font-family="sans-serif" '
                    f'fill="{e.color}">{escape(e.s)}</text>'
                )
            else:
                raise TypeError(f"unknown scene element {type(e).__name__}")
        parts.append("</svg>")
        return "\n".join(parts)


def colormap(t: float) -> str:
    """Dark violet to teal to yellow over t in [0, 1]."""
    anchors = [(68, 1, 84), (33, 145, 140), (253, 231, 37)]
    t = min(max(float(t), 0.0), 1.0)
    pos = t * (len(anchors) - 1)
    i = min(int(pos), len(anchors) - 2)
    frac = pos - i
    rgb = [round(a + (b - a) * frac) for a, b in zip(anchors[i], anchors[i + 1])]
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def _ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    """A handful of round tick positions covering [lo, hi]."""
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / target
    mag = 10 ** math.floor(math.log10(raw))
    for mult in (1, 2, 5, 10):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    out = []
    v = first
    while v <= hi + step * 1e-9:
        out.append(round(v, 12))
        v += step
    return out


def _axes(scene: Scene, xmin, ymin, xmax, ymax, x_label: str, y_label: str) -> None:
    """Frame plus tick labels, drawn in data space."""
    scene.add(
        Line(xmin, ymin, xmax, ymin, stroke="#222222"),
        Line(xmin, ymin, xmin, ymax, stroke="#222222"),
    )
    dx, dy = xmax - xmin, ymax - ymin
    for t in _ticks(xmin, xmax):
        scene.add(
            Line(t, ymin, t, ymin - 0.015 * dy, stroke="#222222"),
            Text(t, ymin - 0.06 * dy, f"{t:g}", size_px=10),
        )
    for t in _ticks(ymin, ymax):
        scene.add(
            Line(xmin, t, xmin - 0.012 * dx, t, stroke="#222222"),
            Text(xmin - 0.05 * dx, t, f"{t:g}", size_px=10, anchor="end"),
        )
    scene.add(
        Text((xmin + xmax) / 2, ymin - 0.12 * dy, x_label, size_px=12),
        Text(xmin - 0.1 * dx, ymax + 0.04 * dy, y_label, size_px=12, anchor="start"),
    )


def reward_curves_scene(
    epoch_traces: list[list[float]],
    best_traces: list[list[float]] | None = None,
    epoch_size: int = 50,
    title: str = "training reward",
) -> Scene:
    """Mean per-epoch reward with a min-max band over seeds; optionally the
    running best value, drawn in episode units converted to epochs."""
    if not epoch_traces or not epoch_traces[0]:
        raise ValueError("need at least one non-empty trace")
    n = min(len(t) for t in epoch_traces)
    arr = np.asarray([t[:n] for t in epoch_traces], dtype=float)
    xs = np.arange(1, n + 1, dtype=float)
    lo, hi = arr.min(axis=0), arr.max(axis=0)
    mean = arr.mean(axis=0)
    scene = Scene(title)
    if len(epoch_traces) > 1:
        band = tuple(zip(xs, hi)) + tuple(zip(xs[::-1], lo[::-1]))
        scene.add(Polygon(band, fill=PALETTE[0], opacity=0.18))
    scene.add(Polyline(tuple(zip(xs, mean)), stroke=PALETTE[0], width=2.0))
    if best_traces:
        m = min(len(t) for t in best_traces)
        barr = np.asarray([t[:m] for t in best_traces], dtype=float).mean(axis=0)
        bx = (np.arange(1, m + 1, dtype=float)) / epoch_size
        scene.add(
            Polyline(tuple(zip(bx, barr)), stroke=PALETTE[1], width=1.5, dash="5,3")
        )
    xmin, ymin, xmax, ymax = scene.data_bounds()
    _axes(scene, xmin, ymin, xmax, ymax, "epoch", "reward (nats)")
    return scene


def value_vs_budget_scene(
    series: dict[str, list[tuple[float, float]]], title: str = "information vs budget"
) -> Scene:
    """One line per solver over (budget, value) pairs, with a legend."""
    if not series:
        raise ValueError("need at least one series")
    scene = Scene(title)
    for k, (name, pts) in enumerate(sorted(series.items())):
        if not pts:
            raise ValueError(f"series {name!r} is empty")
        color = PALETTE[k % len(PALETTE)]
        pts = sorted(pts)
        scene.add(Polyline(tuple(pts), stroke=color, width=2.0))
        for x, y in pts:
            scene.add(Circle(x, y, 3.0, fill=color))
    xmin, ymin, xmax, ymax = scene.data_bounds()
    dy = ymax - ymin
    for k, name in enumerate(sorted(series)):
        y = ymax - 0.05 * dy * k
        scene.add(
            Line(xmin + 0.02 * (xmax - xmin), y, xmin + 0.07 * (xmax - xmin), y,
                 stroke=PALETTE[k % len(PALETTE)], width=3.0),
            Text(xmin + 0.09 * (xmax - xmin), y, name, size_px=11, anchor="start"),
        )
    _axes(scene, xmin, ymin, xmax, ymax, "budget", "information (nats)")
    return scene


def path_overlay_scene(
    graph: SpatialGraph, model: GpModel, path: list[int], title: str = ""
) -> Scene:
    """The walk on top of the graph, vertices shaded by the entropy that
    remains at each location once the pilot survey is taken into account."""
    scene = Scene(title)
    for u, v, _ in graph.edges:
        pu, pv = graph.position(u), graph.position(v)
        scene.add(Line(pu[0], pu[1], pv[0], pv[1], stroke="#cccccc", width=1.0))
    post = posterior_covariance(model, model.observation_set(np.zeros((0, 2))))
    ent = 0.5 * np.log(2.0 * np.pi * np.e * np.clip(np.diag(post), 1e-300, None))
    span = float(ent.max() - ent.min())
    for v in graph.ids:
        p = graph.position(v)
        t = 0.5 if span == 0 else (ent[graph.index_of(v)] - ent.min()) / span
        scene.add(Circle(p[0], p[1], 4.0, fill=colormap(float(t))))
    if path:
        pts = tuple((graph.position(v)[0], graph.position(v)[1]) for v in path)
        scene.add(Polyline(pts, stroke="#d73a49", width=2.5))
        s, t_ = graph.position(path[0]), graph.position(path[-1])
        scene.add(
            Circle(s[0], s[1], 6.0, fill="none", stroke="#d73a49"),
            Circle(t_[0], t_[1], 6.0, fill="#d73a49"),
        )
    return scene


def write_svg(scene: Scene, path, **render_kwargs) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(scene.render(**render_kwargs))
