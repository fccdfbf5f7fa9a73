"""SVG pictures of executed paths, one polyline per trial."""

from __future__ import annotations

from pathlib import Path as FsPath
from typing import Optional, Union
from xml.sax.saxutils import escape

from .geometry import AxisRect, Point2
from .world import GlobalWorld


class Viewport:
    """Affine map from world coordinates to SVG pixels (y axis flipped)."""

    def __init__(self, bounds: AxisRect, size: float = 600.0, margin: float = 10.0):
        self.bounds = bounds
        self.margin = margin
        self.scale = (size - 2 * margin) / max(bounds.width, bounds.height)
        self.width = bounds.width * self.scale + 2 * margin
        self.height = bounds.height * self.scale + 2 * margin

    def to_px(self, p: Point2) -> Point2:
        return (self.margin + (p[0] - self.bounds.xmin) * self.scale,
                self.margin + (self.bounds.ymax - p[1]) * self.scale)

    def to_world(self, q: Point2) -> Point2:
        return (self.bounds.xmin + (q[0] - self.margin) / self.scale,
                self.bounds.ymax - (q[1] - self.margin) / self.scale)


def _hue(i: int, n: int) -> str:
    return f"hsl({360.0 * i / max(n, 1):.3f},80%,45%)"


def render_svg(world: GlobalWorld, paths: list[list[Point2]], sensing: Optional[list[tuple[list[Point2], float]]] = None,
               size: float = 600.0, title: str = "") -> str:
    vp = Viewport(world.bounds, size)
    fmt = lambda v: f"{v:.6f}"
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{fmt(vp.width)}" height="{fmt(vp.height)}" '
           f'viewBox="0 0 {fmt(vp.width)} {fmt(vp.height)}">']
    if title:
        out.append(f"<title>{escape(title)}</title>")
    x0, y0 = vp.to_px((world.bounds.xmin, world.bounds.ymax))
    out.append(f'<rect class="bounds" x="{fmt(x0)}" y="{fmt(y0)}" width="{fmt(world.bounds.width * vp.scale)}" '
               f'height="{fmt(world.bounds.height * vp.scale)}" fill="white" stroke="black"/>')
    for r in world.obstacles:
        px, py = vp.to_px((r.xmin, r.ymax))
        out.append(f'<rect class="obstacle" x="{fmt(px)}" y="{fmt(py)}" width="{fmt(r.width * vp.scale)}" '
                   f'height="{fmt(r.height * vp.scale)}" fill="#555"/>')
    if sensing:
        for i, (centres, r_s) in enumerate(sensing):
            for c in centres:
                cx, cy = vp.to_px(c)
                out.append(f'<circle class="sensed" cx="{fmt(cx)}" cy="{fmt(cy)}" r="{fmt(r_s * vp.scale)}" '
                           f'fill="none" stroke="{_hue(i, len(sensing))}" stroke-opacity="0.4" stroke-width="0.5"/>')
    for i, pts in enumerate(paths):
        if not pts:
            continue
        coords = " ".join(f"{fmt(a)},{fmt(b)}" for a, b in (vp.to_px(p) for p in pts))
        out.append(f'<polyline class="trial" data-trial="{i}" points="{coords}" fill="none" '
                   f'stroke="{_hue(i, len(paths))}" stroke-width="1.5"/>')
    for label, p, colour in (("start", world.start, "green"), ("goal", world.goal, "red")):
        cx, cy = vp.to_px(p)
        out.append(f'<circle class="{label}" cx="{fmt(cx)}" cy="{fmt(cy)}" r="4" fill="{colour}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_traces(rows: list[dict], world: GlobalWorld, out: Union[str, FsPath], show_sensing: bool = False,
                size: float = 600.0) -> FsPath:
    """Draw each trial's executed path, coloured by run order.

    ``rows`` are results-file rows for one world (any planners/budgets the
    caller selected). Failed trials are drawn up to where they stopped.
    """
    paths = [[tuple(p) for p in r["path"]] for r in rows]
    sensing = None
    if show_sensing:
        sensing = [([tuple(q["start"]) for q in r["per_query"]], r["sensor_range"]) for r in rows]
    svg = render_svg(world, paths, sensing, size, title=world.name)
    out = FsPath(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(svg, encoding="utf-8")
    return out
