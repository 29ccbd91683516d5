"""Deterministic SVG overlays: domain outline, divergent mask, fitted arcs.

Everything is rendered from plain data (domain spec, node triples, line
report dicts) so a stored report can be re-rendered byte-identically
without re-solving.
"""

from __future__ import annotations

import math

import numpy as np

from .config import build_domain
from .geometry import CircleArc

_CANVAS = 720.0
_MARGIN = 36.0
_HEAT = ("#fecaca", "#f87171", "#dc2626", "#7f1d1d")
_MAX_RECTS = 20000


def _fmt(v: float) -> str:
    return f"{v:.2f}"


class _Frame:
    """World-to-pixel map with a flipped y axis."""

    def __init__(self, bbox: tuple[float, float, float, float]):
        x0, y0, x1, y1 = bbox
        span = max(x1 - x0, y1 - y0, 1e-12)
        self.scale = (_CANVAS - 2 * _MARGIN) / span
        self.x0, self.y1 = x0, y1
        self.width = (x1 - x0) * self.scale + 2 * _MARGIN
        self.height = (y1 - y0) * self.scale + 2 * _MARGIN

    def map(self, x: float, y: float) -> tuple[float, float]:
        return (
            _MARGIN + (x - self.x0) * self.scale,
            _MARGIN + (self.y1 - y) * self.scale,
        )


def _polyline(frame: _Frame, pts, close: bool = False) -> str:
    coords = [frame.map(float(x), float(y)) for x, y in pts]
    data = "M " + " L ".join(f"{_fmt(px)} {_fmt(py)}" for px, py in coords)
    if close:
        data += " Z"
    return data


def _piece_points(geom, n: int = 128):
    ss = np.linspace(0.0, geom.length, n)
    return [geom.point_at(float(s)) for s in ss]


def _arc_points(rep: dict, n: int = 160):
    cx, cy = rep["arc"]["center"]
    radius = rep["arc"]["radius"]
    a0, a1 = rep["arc"]["angles"]
    angles = np.linspace(a0, a1, n)
    return [(cx + radius * math.cos(a), cy + radius * math.sin(a)) for a in angles]


def _heat_rects(frame: _Frame, triples, spacing: float, tau: float) -> list[str]:
    hot = [(x, y, v) for x, y, v in triples if v > tau]
    stride = 1
    while len(hot) // (stride * stride) > _MAX_RECTS:
        stride += 1
    if stride > 1:
        keep = []
        snap = stride * spacing
        seen = set()
        for x, y, v in hot:
            key = (round(x / snap), round(y / snap))
            if key not in seen:
                seen.add(key)
                keep.append((x, y, v))
        hot = keep
    size = spacing * stride * frame.scale
    out = []
    for x, y, v in hot:
        level = min(int(math.log2(max(v / tau, 1.0))), len(_HEAT) - 1)
        px, py = frame.map(x, y)
        out.append(
            f'<rect x="{_fmt(px - size / 2)}" y="{_fmt(py - size / 2)}" '
            f'width="{_fmt(size)}" height="{_fmt(size)}" fill="{_HEAT[level]}"/>'
        )
    return out


def _endpoint_marker(frame: _Frame, ep: dict) -> str:
    px, py = frame.map(*ep["point"])
    if ep["kind"] == "corner":
        pts = f"{_fmt(px)},{_fmt(py - 7)} {_fmt(px + 7)},{_fmt(py)} {_fmt(px)},{_fmt(py + 7)} {_fmt(px - 7)},{_fmt(py)}"
        return f'<polygon points="{pts}" fill="#15803d"/>'
    if ep["kind"] == "on_boundary_piece":
        return (
            f'<rect x="{_fmt(px - 5)}" y="{_fmt(py - 5)}" width="10" height="10" '
            f'fill="#1d4ed8"/>'
        )
    return f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="5" fill="#6b7280"/>'


def _nu_ticks(frame: _Frame, rep: dict, n: int = 9) -> list[str]:
    cx, cy = rep["arc"]["center"]
    toward = rep["nu_toward_center"]
    out = []
    for x, y in _arc_points(rep, n):
        dx, dy = cx - x, cy - y
        norm = math.hypot(dx, dy)
        if norm < 1e-12:
            continue
        if not toward:
            dx, dy = -dx, -dy
        px, py = frame.map(x, y)
        qx = px + 14.0 * dx / norm
        qy = py - 14.0 * dy / norm
        out.append(
            f'<line x1="{_fmt(px)}" y1="{_fmt(py)}" x2="{_fmt(qx)}" y2="{_fmt(qy)}" '
            f'stroke="#7c3aed" stroke-width="1.5"/>'
        )
    return out


def render_overview(
    title: str,
    domain_spec: dict | None,
    node_triples,
    spacing: float | None,
    tau: float | None,
    line_reports: list[dict],
) -> str:
    """Build the scenario overlay SVG as a string (stable byte-for-byte)."""
    if domain_spec is None:
        body = (
            f'<text x="24" y="48" font-size="20" fill="#111">{title}</text>'
            '<text x="24" y="76" font-size="14" fill="#555">'
            "no spatial fields in this scenario</text>"
        )
        return (
            '<svg xmlns="http://www.w3.org/2000/svg" width="480" height="120" '
            'viewBox="0 0 480 120"><rect width="480" height="120" fill="#ffffff"/>'
            f"{body}</svg>"
        )

    dom = build_domain(domain_spec)
    frame = _Frame(dom.bounding_box)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(frame.width)}" '
        f'height="{_fmt(frame.height + 28)}" '
        f'viewBox="0 0 {_fmt(frame.width)} {_fmt(frame.height + 28)}">',
        f'<rect width="{_fmt(frame.width)}" height="{_fmt(frame.height + 28)}" fill="#ffffff"/>',
    ]
    if node_triples is not None and spacing is not None and tau is not None:
        parts.extend(_heat_rects(frame, node_triples, spacing, tau))
    for piece in dom.all_pieces():
        closed = isinstance(piece.geometry, CircleArc) and piece.geometry.is_full_circle()
        parts.append(
            f'<path d="{_polyline(frame, _piece_points(piece.geometry), closed)}" '
            'fill="none" stroke="#111827" stroke-width="2"/>'
        )
    for rep in line_reports:
        color = "#16a34a" if rep["accepted"] else "#9ca3af"
        dash = "" if rep["accepted"] else ' stroke-dasharray="6 4"'
        parts.append(
            f'<path d="{_polyline(frame, _arc_points(rep))}" fill="none" '
            f'stroke="{color}" stroke-width="2.5"{dash}/>'
        )
        if rep["accepted"]:
            parts.extend(_nu_ticks(frame, rep))
        for ep in rep.get("endpoints") or []:
            parts.append(_endpoint_marker(frame, ep))
    parts.append(
        f'<text x="{_fmt(_MARGIN)}" y="{_fmt(frame.height + 18)}" font-size="14" '
        f'fill="#111">{title}</text>'
    )
    parts.append("</svg>")
    return "".join(parts)
