"""SVG drawings of rotated diagrams, their point configurations and limit shapes.

Coordinates are scaled by 1/n so that the box spans [0, c + 1] horizontally.
Descending unit segments of the boundary carry right-triangle markers (the
points a_i), ascending ones carry left-triangle markers (the complementary
points, i.e. the coordinates of the complement-conjugate diagram).
"""
from __future__ import annotations

import xml.etree.ElementTree as ET
from typing import Sequence

import numpy as np

from . import partitions as P

SVG_NS = "http://www.w3.org/2000/svg"
PX = 60.0
MARGIN = 20.0


def _fmt(x: float) -> str:
    return f"{x:.3f}".rstrip("0").rstrip(".")


def _points(pts) -> str:
    return " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts)


class _Canvas:
    def __init__(self, width: float, height: float, scale: float):
        self.scale = scale
        self.height = height
        self.root = ET.Element(
            "svg",
            xmlns=SVG_NS,
            width=_fmt(width * scale + 2 * MARGIN),
            height=_fmt(height * scale + 2 * MARGIN),
            viewBox=f"0 0 {_fmt(width * scale + 2 * MARGIN)} {_fmt(height * scale + 2 * MARGIN)}",
        )

    def xy(self, x: float, y: float) -> tuple[float, float]:
        return MARGIN + x * self.scale, MARGIN + (self.height - y) * self.scale

    def poly(self, tag: str, pts, **attrs) -> ET.Element:
        return ET.SubElement(self.root, tag, points=_points(self.xy(x, y) for x, y in pts), **attrs)

    def to_string(self) -> str:
        return ET.tostring(self.root, encoding="unicode", xml_declaration=True)


def render_svg(
    lam: Sequence[int] | None,
    n: int,
    k: int,
    overlay: tuple[np.ndarray, np.ndarray] | None = None,
    title: str | None = None,
    scale: float = PX,
) -> str:
    """Return a self-contained SVG document.

    Parameters
    ----------
    lam : partition in the n x k box, or None to draw only the frame and overlay
    overlay : optional (x, f(x)) arrays already in scaled coordinates
    """
    width = (n + k) / n
    height = width
    if overlay is not None:
        height = max(height, float(np.max(overlay[1])))
    cv = _Canvas(width, height, scale)
    if title:
        ET.SubElement(cv.root, "title").text = title

    # the box, and the region under the empty diagram down to the baseline
    box = [(0, 1), (1, 0), (width, k / n), (k / n, width), (0, 1)]
    cv.poly("polyline", box, fill="none", stroke="#999", **{"class": "frame"})
    lower = [(0, 1), (0, 0), (width, 0), (width, k / n), (1, 0), (0, 1)]
    cv.poly("polyline", lower, fill="none", stroke="#ccc", **{"stroke-dasharray": "4 3", "class": "half-hexagon"})

    if lam is not None:
        prof = P.profile(lam, n, k)
        xs, ys = prof.xs / n, prof.values / n
        cv.poly("polyline", list(zip(xs, ys)), fill="none", stroke="black", **{"stroke-width": "2", "class": "boundary"})
        coords = set(prof.descents)
        u = 1.0 / n
        for j in range(n + k):
            x0, y0, y1 = j / n, ys[j], ys[j + 1]
            if j in coords:
                tri = [(x0, y0), (x0 + u, y1), (x0, y1)]
                cv.poly("polygon", tri, fill="#d62728", **{"class": "point", "data-a": str(j)})
            else:
                tri = [(x0, y0), (x0 + u, y1), (x0 + u, y0)]
                cv.poly("polygon", tri, fill="#1f77b4", **{"class": "dual-point", "data-a": str(j)})

    if overlay is not None:
        ox, oy = overlay
        cv.poly("polyline", list(zip(ox, oy)), fill="none", stroke="#2ca02c", **{"stroke-width": "1.5", "class": "limit-shape"})
    return cv.to_string()
