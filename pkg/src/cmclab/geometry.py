"""Planar domains bounded by circle arcs and straight segments.

The domains used throughout the package are bounded by closed chains of
circle arcs and segments.  Chains are ordered and positively oriented
(interior on the left); a domain may additionally carry hole chains,
each negatively oriented.  Every boundary piece stores the exterior
curvature of the curve it lies on, signed with respect to the inward
normal: a piece bulging away from the interior (disk boundary seen from
inside) has positive curvature, a piece bulging into the interior has
negative curvature, a segment has zero.

Angles are radians, lengths are plain floats; arcs are parametrized by
arclength from their start point.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParameterError, RangeError

__all__ = [
    "Point2",
    "Segment",
    "CircleArc",
    "BoundaryArc",
    "Domain",
    "Curve",
    "arc_from_point_normal",
    "region_area",
    "curve_length",
    "disk_domain",
    "annulus_domain",
    "lens_domain",
]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Point2:
    """A point of the plane."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ParameterError(f"non-finite point ({self.x}, {self.y})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)

    def shifted(self, dx: float, dy: float) -> "Point2":
        return Point2(self.x + dx, self.y + dy)


def _norm(v) -> float:
    return math.hypot(v[0], v[1])


@dataclass(frozen=True)
class Segment:
    """Directed straight segment from ``start`` to ``end``."""

    start: Point2
    end: Point2

    def __post_init__(self):
        if self.length <= 0.0:
            raise ParameterError("degenerate segment")

    @property
    def length(self) -> float:
        return math.hypot(self.end.x - self.start.x, self.end.y - self.start.y)

    def point_at(self, s: float) -> np.ndarray:
        """Point at arclength ``s`` from the start."""
        t = s / self.length
        return np.array(
            [
                self.start.x + t * (self.end.x - self.start.x),
                self.start.y + t * (self.end.y - self.start.y),
            ]
        )

    def tangent_at(self, s: float) -> np.ndarray:
        d = np.array([self.end.x - self.start.x, self.end.y - self.start.y])
        return d / self.length

    def normal_at(self, s: float) -> np.ndarray:
        """Left normal of the traversal direction (inward for a positive chain)."""
        t = self.tangent_at(s)
        return np.array([-t[1], t[0]])

    def endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        return self.start.as_array(), self.end.as_array()

    def translate(self, dx: float, dy: float) -> "Segment":
        return Segment(self.start.shifted(dx, dy), self.end.shifted(dx, dy))

    def bbox(self) -> tuple[float, float, float, float]:
        return (
            min(self.start.x, self.end.x),
            min(self.start.y, self.end.y),
            max(self.start.x, self.end.x),
            max(self.start.y, self.end.y),
        )

    # --- queries used by masks and the solver ---------------------------------

    def distance(self, px: np.ndarray, py: np.ndarray) -> np.ndarray:
        """Distance from points ``(px, py)`` to the segment (vectorized)."""
        ax, ay = self.start.x, self.start.y
        dx, dy = self.end.x - ax, self.end.y - ay
        ll = dx * dx + dy * dy
        t = np.clip(((px - ax) * dx + (py - ay) * dy) / ll, 0.0, 1.0)
        return np.hypot(px - (ax + t * dx), py - (ay + t * dy))

    def project(self, px: float, py: float) -> tuple[float, float]:
        """Return (arclength on piece, distance) of the closest point."""
        ax, ay = self.start.x, self.start.y
        dx, dy = self.end.x - ax, self.end.y - ay
        ll = dx * dx + dy * dy
        t = min(max(((px - ax) * dx + (py - ay) * dy) / ll, 0.0), 1.0)
        qx, qy = ax + t * dx, ay + t * dy
        return t * self.length, math.hypot(px - qx, py - qy)

    def ray_crossings(self, px: np.ndarray, py: np.ndarray) -> np.ndarray:
        """Count crossings of the rightward ray from each point (0 or 1).

        Half-open rule in y, so a shared chain vertex is never counted twice.
        """
        y1, y2 = self.start.y, self.end.y
        straddles = (y1 <= py) != (y2 <= py)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (py - y1) / (y2 - y1)
            xc = self.start.x + t * (self.end.x - self.start.x)
        return (straddles & (xc > px)).astype(np.int64)

    def intersect_segment(self, p: np.ndarray, q: np.ndarray) -> list[tuple[float, float]]:
        """Intersections with the open segment p->q.

        Returns a list of (t, s): t is the parameter along p->q in (0, 1],
        s the arclength along this piece.
        """
        r = q - p
        a = self.start.as_array()
        d = self.end.as_array() - a
        denom = r[0] * d[1] - r[1] * d[0]
        if abs(denom) < 1e-15 * (abs(r[0]) + abs(r[1])) * self.length:
            return []
        diff = a - p
        t = (diff[0] * d[1] - diff[1] * d[0]) / denom
        u = (diff[0] * r[1] - diff[1] * r[0]) / denom
        if -1e-12 <= u <= 1.0 + 1e-12 and 1e-12 < t <= 1.0 + 1e-12:
            return [(min(t, 1.0), min(max(u, 0.0), 1.0) * self.length)]
        return []

    def intersect_circle(self, center: np.ndarray, radius: float) -> list[float]:
        """Arclengths on this piece where it meets the given circle."""
        a = self.start.as_array()
        d = self.end.as_array() - a
        f = a - center
        A = d @ d
        B = 2.0 * (f @ d)
        C = f @ f - radius * radius
        disc = B * B - 4.0 * A * C
        if disc < 0.0:
            return []
        sq = math.sqrt(disc)
        out = []
        for t in ((-B - sq) / (2 * A), (-B + sq) / (2 * A)):
            if -1e-12 <= t <= 1.0 + 1e-12:
                out.append(min(max(t, 0.0), 1.0) * self.length)
        return out


def _wrap_angle(theta: float) -> float:
    """Wrap to (-pi, pi]."""
    out = math.remainder(theta, _TWO_PI)
    return out


def _sin_wrapped(theta: float) -> float:
    # canonical evaluation so coincident chain angles (0 vs 2*pi) produce
    # bit-identical heights in the crossing parity test
    return math.sin(math.remainder(theta, _TWO_PI))


@dataclass(frozen=True)
class CircleArc:
    """Arc of a circle, traversed from ``angle_start`` to ``angle_end``.

    For counterclockwise arcs ``angle_end >= angle_start``; for clockwise
    arcs ``angle_end <= angle_start``.  The sweep magnitude is at most a
    full turn.
    """

    center: Point2
    radius: float
    angle_start: float
    angle_end: float
    orientation: str = "ccw"

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ParameterError(f"arc radius must be positive, got {self.radius}")
        if self.orientation not in ("ccw", "cw"):
            raise ParameterError(f"orientation must be 'ccw' or 'cw', got {self.orientation!r}")
        sweep = self.angle_end - self.angle_start
        if self.orientation == "ccw" and sweep < -1e-14:
            raise ParameterError("ccw arc must have angle_end >= angle_start")
        if self.orientation == "cw" and sweep > 1e-14:
            raise ParameterError("cw arc must have angle_end <= angle_start")
        if abs(sweep) > _TWO_PI + 1e-9:
            raise ParameterError("arc sweep exceeds a full turn")
        if abs(sweep) < 1e-14:
            raise ParameterError("degenerate arc (zero sweep)")

    @property
    def sweep(self) -> float:
        return self.angle_end - self.angle_start

    @property
    def length(self) -> float:
        return self.radius * abs(self.sweep)

    def angle_at(self, s) -> np.ndarray:
        """Angle on the circle at arclength ``s`` from the start."""
        sign = 1.0 if self.orientation == "ccw" else -1.0
        return self.angle_start + sign * np.asarray(s, dtype=float) / self.radius

    def point_at(self, s) -> np.ndarray:
        """Point at arclength ``s``; vectorized, returns shape (..., 2)."""
        th = self.angle_at(s)
        return np.stack(
            [self.center.x + self.radius * np.cos(th), self.center.y + self.radius * np.sin(th)],
            axis=-1,
        )

    def normal_at(self, s) -> np.ndarray:
        """Unit normal pointing from the arc toward its center."""
        th = self.angle_at(s)
        return np.stack([-np.cos(th), -np.sin(th)], axis=-1)

    def tangent_at(self, s) -> np.ndarray:
        th = self.angle_at(s)
        sign = 1.0 if self.orientation == "ccw" else -1.0
        return np.stack([-sign * np.sin(th), sign * np.cos(th)], axis=-1)

    def endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        return self.point_at(0.0), self.point_at(self.length)

    def translate(self, dx: float, dy: float) -> "CircleArc":
        return CircleArc(
            self.center.shifted(dx, dy),
            self.radius,
            self.angle_start,
            self.angle_end,
            self.orientation,
        )

    def is_full_circle(self) -> bool:
        return abs(abs(self.sweep) - _TWO_PI) < 1e-12

    def contains_angle(self, theta: float, slack: float = 1e-12) -> bool:
        """Whether the circle angle ``theta`` lies within the swept span."""
        lo, hi = sorted((self.angle_start, self.angle_end))
        span = hi - lo
        if span >= _TWO_PI - 1e-12:
            return True
        rel = math.remainder(theta - lo, _TWO_PI)
        if rel < 0:
            rel += _TWO_PI
        return rel <= span + slack / self.radius

    def arclength_of_angle(self, theta: float) -> float:
        """Arclength from the start to circle angle ``theta`` (assumed on the arc)."""
        sign = 1.0 if self.orientation == "ccw" else -1.0
        rel = math.remainder(sign * (theta - self.angle_start), _TWO_PI)
        if rel < 0:
            rel += _TWO_PI
        return min(rel * self.radius, self.length)

    def bbox(self) -> tuple[float, float, float, float]:
        a, b = self.endpoints()
        xs = [a[0], b[0]]
        ys = [a[1], b[1]]
        # axis-extreme circle points that lie on the swept span
        for k, (ex, ey) in enumerate([(1, 0), (0, 1), (-1, 0), (0, -1)]):
            th = k * math.pi / 2.0
            if self.contains_angle(th):
                xs.append(self.center.x + self.radius * ex)
                ys.append(self.center.y + self.radius * ey)
        return min(xs), min(ys), max(xs), max(ys)

    # --- queries ---------------------------------------------------------------

    def distance(self, px: np.ndarray, py: np.ndarray) -> np.ndarray:
        """Distance from points to the arc (vectorized)."""
        dx = px - self.center.x
        dy = py - self.center.y
        r = np.hypot(dx, dy)
        theta = np.arctan2(dy, dx)
        on_span = self._angles_on_span(theta)
        d_circle = np.abs(r - self.radius)
        a, b = self.endpoints()
        d_ends = np.minimum(np.hypot(px - a[0], py - a[1]), np.hypot(px - b[0], py - b[1]))
        return np.where(on_span, d_circle, d_ends)

    def _angles_on_span(self, theta: np.ndarray) -> np.ndarray:
        lo, hi = sorted((self.angle_start, self.angle_end))
        span = hi - lo
        if span >= _TWO_PI - 1e-12:
            return np.ones_like(theta, dtype=bool)
        rel = np.remainder(theta - lo, _TWO_PI)
        return rel <= span

    def project(self, px: float, py: float) -> tuple[float, float]:
        """Return (arclength on piece, distance) of the closest arc point."""
        dx, dy = px - self.center.x, py - self.center.y
        theta = math.atan2(dy, dx)
        if self.contains_angle(theta):
            s = self.arclength_of_angle(theta)
            return s, abs(math.hypot(dx, dy) - self.radius)
        a, b = self.endpoints()
        da = math.hypot(px - a[0], py - a[1])
        db = math.hypot(px - b[0], py - b[1])
        return (0.0, da) if da <= db else (self.length, db)

    def ray_crossings(self, px: np.ndarray, py: np.ndarray) -> np.ndarray:
        """Count crossings of the rightward ray from each point.

        The arc is split at the horizontal-tangent angles +-pi/2 into
        y-monotone pieces, each lying in one x-half of its circle, and the
        half-open rule is applied per piece, which keeps the parity exact at
        shared endpoints and tangencies.
        """
        lo, hi = sorted((self.angle_start, self.angle_end))
        cuts = [lo]
        k = math.ceil((lo + math.pi / 2.0) / math.pi)
        while True:
            c = k * math.pi - math.pi / 2.0
            if c >= hi - 1e-15:
                break
            if c > lo + 1e-15:
                cuts.append(c)
            k += 1
        cuts.append(hi)

        cx, cy, R = self.center.x, self.center.y, self.radius
        total = np.zeros(np.shape(px), dtype=np.int64)
        with np.errstate(invalid="ignore"):
            for a, b in zip(cuts[:-1], cuts[1:]):
                ya = cy + R * _sin_wrapped(a)
                yb = cy + R * _sin_wrapped(b)
                straddles = (ya <= py) != (yb <= py)
                mid = 0.5 * (a + b)
                sign = 1.0 if math.cos(mid) >= 0.0 else -1.0
                t = R * R - (py - cy) ** 2
                xc = cx + sign * np.sqrt(np.maximum(t, 0.0))
                total += (straddles & (t >= 0.0) & (xc > px)).astype(np.int64)
        return total

    def intersect_segment(self, p: np.ndarray, q: np.ndarray) -> list[tuple[float, float]]:
        """Intersections with the open segment p->q; returns (t on p->q, s on arc)."""
        r = q - p
        f = p - np.array([self.center.x, self.center.y])
        A = r @ r
        B = 2.0 * (f @ r)
        C = f @ f - self.radius * self.radius
        disc = B * B - 4.0 * A * C
        if disc < 0.0:
            return []
        sq = math.sqrt(disc)
        out = []
        for t in ((-B - sq) / (2 * A), (-B + sq) / (2 * A)):
            if not (1e-12 < t <= 1.0 + 1e-12):
                continue
            pt = p + t * r
            theta = math.atan2(pt[1] - self.center.y, pt[0] - self.center.x)
            if self.contains_angle(theta, slack=1e-9):
                out.append((min(t, 1.0), self.arclength_of_angle(theta)))
        return out

    def intersect_circle(self, center: np.ndarray, radius: float) -> list[float]:
        """Arclengths on this piece where it meets the circle (center, radius)."""
        cx = np.array([self.center.x, self.center.y])
        d = math.hypot(*(center - cx))
        r1, r2 = self.radius, radius
        if d < 1e-15:
            return []  # concentric: no transversal intersection
        if d > r1 + r2 + 1e-14 or d < abs(r1 - r2) - 1e-14:
            return []
        a = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d)
        h2 = r1 * r1 - a * a
        h = math.sqrt(max(h2, 0.0))
        ex = (center - cx) / d
        base = cx + a * ex
        perp = np.array([-ex[1], ex[0]])
        pts = [base + h * perp, base - h * perp] if h > 1e-14 else [base]
        out = []
        for pt in pts:
            theta = math.atan2(pt[1] - self.center.y, pt[0] - self.center.x)
            if self.contains_angle(theta, slack=1e-9):
                out.append(self.arclength_of_angle(theta))
        return out


Piece = Segment | CircleArc


@dataclass(frozen=True)
class BoundaryArc:
    """Boundary piece: geometry plus exterior curvature and a data tag.

    ``exterior_curvature`` is the curvature of the best exterior comparison
    curve along this piece, signed with respect to the inward normal.  For a
    circle-arc piece its magnitude must equal 1/radius.
    """

    geometry: Piece
    exterior_curvature: float
    data_tag: str = "boundary"

    def __post_init__(self):
        if isinstance(self.geometry, CircleArc):
            expected = 1.0 / self.geometry.radius
            if abs(abs(self.exterior_curvature) - expected) > 1e-9 * expected:
                raise ParameterError(
                    "exterior curvature of an arc piece must be +-1/radius: "
                    f"got {self.exterior_curvature}, radius {self.geometry.radius}"
                )
        elif isinstance(self.geometry, Segment):
            if self.exterior_curvature != 0.0:
                raise ParameterError("segment pieces have zero exterior curvature")
        else:
            raise ParameterError(f"unsupported piece geometry {type(self.geometry)!r}")

    def translate(self, dx: float, dy: float) -> "BoundaryArc":
        return BoundaryArc(self.geometry.translate(dx, dy), self.exterior_curvature, self.data_tag)


def _chain_signed_area(chain: tuple[BoundaryArc, ...]) -> float:
    """Signed area enclosed by a closed chain (shoelace over chords plus
    circular-segment corrections, exact for arc/segment chains)."""
    area = 0.0
    for piece in chain:
        a, b = piece.geometry.endpoints()
        area += 0.5 * (a[0] * b[1] - b[0] * a[1])
        if isinstance(piece.geometry, CircleArc):
            phi = piece.geometry.sweep
            area += 0.5 * piece.geometry.radius ** 2 * (phi - math.sin(phi))
    return area


def _chain_is_closed(chain: tuple[BoundaryArc, ...], tol: float) -> bool:
    n = len(chain)
    for k in range(n):
        _, b = chain[k].geometry.endpoints()
        a, _ = chain[(k + 1) % n].geometry.endpoints()
        if _norm(b - a) > tol:
            return False
    return True


@dataclass(frozen=True)
class Domain:
    """Region bounded by a positively oriented outer chain and optional
    negatively oriented hole chains."""

    pieces: tuple[BoundaryArc, ...]
    holes: tuple[tuple[BoundaryArc, ...], ...] = ()

    def __post_init__(self):
        if not self.pieces:
            raise ParameterError("domain needs at least one boundary piece")
        tol = self.tolerance
        if not _chain_is_closed(self.pieces, tol):
            raise DomainError("outer boundary chain is not closed")
        if _chain_signed_area(self.pieces) <= 0.0:
            raise DomainError("outer boundary chain must be positively oriented")
        for hole in self.holes:
            if not _chain_is_closed(hole, tol):
                raise DomainError("hole chain is not closed")
            if _chain_signed_area(hole) >= 0.0:
                raise DomainError("hole chains must be negatively oriented")

    # --- basic metrics ----------------------------------------------------------

    @property
    def bounding_box(self) -> tuple[float, float, float, float]:
        boxes = [p.geometry.bbox() for p in self.pieces]
        xmin = min(b[0] for b in boxes)
        ymin = min(b[1] for b in boxes)
        xmax = max(b[2] for b in boxes)
        ymax = max(b[3] for b in boxes)
        return xmin, ymin, xmax, ymax

    @property
    def tolerance(self) -> float:
        """Boundary-point matching tolerance: 1e-9 x bounding-box diagonal."""
        xmin, ymin, xmax, ymax = self.bounding_box
        return 1e-9 * math.hypot(xmax - xmin, ymax - ymin)

    def area(self) -> float:
        return _chain_signed_area(self.pieces) + sum(
            _chain_signed_area(h) for h in self.holes
        )

    def all_pieces(self) -> list[BoundaryArc]:
        """Outer pieces followed by hole pieces; index = piece id."""
        out = list(self.pieces)
        for hole in self.holes:
            out.extend(hole)
        return out

    def chains(self) -> list[tuple[BoundaryArc, ...]]:
        return [self.pieces, *self.holes]

    def corners(self) -> list[tuple[np.ndarray, float]]:
        """Chain junction points with a genuine tangent break.

        Returns (point, turn angle); turn > 0 is a convex corner.
        """
        out = []
        for chain in self.chains():
            n = len(chain)
            for k in range(n):
                g1 = chain[k].geometry
                g2 = chain[(k + 1) % n].geometry
                _, b = g1.endpoints()
                t_in = g1.tangent_at(g1.length)
                t_out = g2.tangent_at(0.0)
                turn = math.atan2(
                    t_in[0] * t_out[1] - t_in[1] * t_out[0], t_in @ t_out
                )
                if abs(turn) > 1e-9:
                    out.append((b, turn))
        return out

    # --- containment and distance -----------------------------------------------

    def _ray_parity(self, px: np.ndarray, py: np.ndarray) -> np.ndarray:
        crossings = np.zeros(px.shape, dtype=np.int64)
        for piece in self.all_pieces():
            crossings += piece.geometry.ray_crossings(px, py)
        return (crossings % 2) == 1

    def contains(self, px, py) -> np.ndarray:
        """Point-in-domain test; points on the boundary (within tolerance)
        count as inside."""
        px = np.asarray(px, dtype=float)
        py = np.asarray(py, dtype=float)
        inside = self._ray_parity(px, py)
        # Where the ray height matches a junction of two boundary pieces the
        # half-open rule can see two float spellings of the same point; nudge
        # the ray and recount.  The nudge stays far below `tolerance`, so it
        # cannot move a point across the boundary beyond the `near` slack.
        junction_ys = np.array(
            [y for p in self.all_pieces() for (_, y) in p.geometry.endpoints()]
        )
        if junction_ys.size:
            xmin, ymin, xmax, ymax = self.bounding_box
            fuzz = 1e-12 * max(math.hypot(xmax - xmin, ymax - ymin), 1.0)
            gap = np.abs(np.atleast_1d(py)[..., None] - junction_ys).min(axis=-1)
            risky = (gap <= fuzz).reshape(py.shape)
            if np.any(risky):
                py_shift = np.where(risky, py + 37.0 * fuzz, py)
                inside = np.where(risky, self._ray_parity(px, py_shift), inside)
        near = self.distance(px, py) <= self.tolerance
        return inside | near

    def distance(self, px, py) -> np.ndarray:
        """Distance to the union of all boundary pieces."""
        px = np.asarray(px, dtype=float)
        py = np.asarray(py, dtype=float)
        d = np.full(px.shape, np.inf)
        for piece in self.all_pieces():
            d = np.minimum(d, piece.geometry.distance(px, py))
        return d

    def nearest_piece(self, px: float, py: float) -> tuple[int, float, float]:
        """Return (piece id, arclength on piece, distance) of the closest piece."""
        best = (-1, 0.0, math.inf)
        for k, piece in enumerate(self.all_pieces()):
            s, d = piece.geometry.project(px, py)
            if d < best[2]:
                best = (k, s, d)
        return best

    def exterior_curvature_at(self, bx: float, by: float) -> float:
        """Exterior curvature at a boundary point.

        At a chain corner the value is +inf when the corner is convex toward
        the exterior and -inf when it is reflex.
        """
        tol = self.tolerance
        for point, turn in self.corners():
            if math.hypot(bx - point[0], by - point[1]) <= tol:
                return math.inf if turn > 0.0 else -math.inf
        k, _, d = self.nearest_piece(bx, by)
        if d > tol:
            raise DomainError(f"point ({bx}, {by}) is not on the boundary")
        return self.all_pieces()[k].exterior_curvature

    # --- sampling ----------------------------------------------------------------

    def boundary_curve(self, max_spacing: float, chain: int = 0) -> "Curve":
        """Closed positively oriented sample curve of one boundary chain."""
        pieces = self.chains()[chain]
        pts = []
        for piece in pieces:
            g = piece.geometry
            n = max(2, int(math.ceil(g.length / max_spacing)) + 1)
            s = np.linspace(0.0, g.length, n)
            samples = (
                g.point_at(s)
                if isinstance(g, CircleArc)
                else np.stack([g.point_at(v) for v in s])
            )
            pts.append(samples[:-1])
        pts.append(pts[0][:1])
        return Curve(np.vstack(pts))

    def translate(self, dx: float, dy: float) -> "Domain":
        return Domain(
            tuple(p.translate(dx, dy) for p in self.pieces),
            tuple(tuple(p.translate(dx, dy) for p in h) for h in self.holes),
        )

    # --- serialization -------------------------------------------------------------

    def to_dict(self) -> dict:
        def piece_dict(p: BoundaryArc) -> dict:
            g = p.geometry
            if isinstance(g, CircleArc):
                return {
                    "kind": "arc",
                    "center": [g.center.x, g.center.y],
                    "radius": g.radius,
                    "angle_start": g.angle_start,
                    "angle_end": g.angle_end,
                    "orientation": g.orientation,
                    "exterior_curvature": p.exterior_curvature,
                    "data_tag": p.data_tag,
                }
            return {
                "kind": "segment",
                "start": [g.start.x, g.start.y],
                "end": [g.end.x, g.end.y],
                "exterior_curvature": p.exterior_curvature,
                "data_tag": p.data_tag,
            }

        return {
            "pieces": [piece_dict(p) for p in self.pieces],
            "holes": [[piece_dict(p) for p in h] for h in self.holes],
        }

    @staticmethod
    def from_dict(data: dict) -> "Domain":
        def parse_piece(d: dict) -> BoundaryArc:
            kind = d.get("kind")
            if kind == "arc":
                g = CircleArc(
                    Point2(*d["center"]),
                    d["radius"],
                    d["angle_start"],
                    d["angle_end"],
                    d.get("orientation", "ccw"),
                )
            elif kind == "segment":
                g = Segment(Point2(*d["start"]), Point2(*d["end"]))
            else:
                raise DomainError(f"unknown piece kind {kind!r}")
            return BoundaryArc(g, d["exterior_curvature"], d.get("data_tag", "boundary"))

        return Domain(
            tuple(parse_piece(p) for p in data["pieces"]),
            tuple(tuple(parse_piece(p) for p in h) for h in data.get("holes", [])),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "Domain":
        return Domain.from_dict(json.loads(text))


class Curve:
    """Polyline sample of a curve, with its cumulative arclength table."""

    def __init__(self, samples: np.ndarray, max_spacing: float | None = None):
        samples = np.asarray(samples, dtype=float)
        if samples.ndim != 2 or samples.shape[1] != 2 or samples.shape[0] < 1:
            raise ParameterError("curve samples must have shape (n, 2), n >= 1")
        seg = np.hypot(*(np.diff(samples, axis=0).T))
        if max_spacing is not None and seg.size and seg.max() > max_spacing * (1 + 1e-9):
            raise ParameterError(
                f"curve sample spacing {seg.max():g} exceeds limit {max_spacing:g}"
            )
        self.samples = samples
        self.arclength_table = np.concatenate([[0.0], np.cumsum(seg)])

    @property
    def length(self) -> float:
        return float(self.arclength_table[-1])

    def reversed(self) -> "Curve":
        return Curve(self.samples[::-1].copy())

    @staticmethod
    def from_arc(arc: CircleArc, max_spacing: float) -> "Curve":
        n = max(2, int(math.ceil(arc.length / max_spacing)) + 1)
        s = np.linspace(0.0, arc.length, n)
        return Curve(arc.point_at(s))

    @staticmethod
    def from_segment(seg: Segment, max_spacing: float) -> "Curve":
        n = max(2, int(math.ceil(seg.length / max_spacing)) + 1)
        t = np.linspace(0.0, seg.length, n)
        return Curve(np.stack([seg.point_at(v) for v in t]))

    def concatenated(self, other: "Curve") -> "Curve":
        if _norm(self.samples[-1] - other.samples[0]) > 1e-12:
            raise ParameterError("curves do not join end to start")
        return Curve(np.vstack([self.samples, other.samples[1:]]))


def region_area(dom: Domain) -> float:
    """Exact area of the domain."""
    return dom.area()


def curve_length(c: Curve) -> float:
    """Polyline length of the sampled curve."""
    return c.length


def arc_from_point_normal(p: Point2, normal, mean_curvature: float, dom: Domain) -> CircleArc:
    """Maximal arc of curvature 2H through ``p`` staying inside ``dom``.

    The arc lies on the circle of radius 1/(2H) centered at
    p + normal/(2H), so its curvature vector at ``p`` is 2H * normal.
    Raises DomainError if ``p`` is not strictly interior.
    """
    if mean_curvature <= 0.0:
        raise ParameterError("mean curvature must be positive")
    normal = np.asarray(normal, dtype=float)
    if abs(_norm(normal) - 1.0) > 1e-9:
        raise ParameterError("normal must be a unit vector")
    inside = bool(dom.contains(p.x, p.y))
    d_bnd = float(dom.distance(p.x, p.y))
    if not inside or d_bnd <= dom.tolerance:
        raise DomainError("base point must lie strictly inside the domain")

    radius = 1.0 / (2.0 * mean_curvature)
    center = np.array([p.x, p.y]) + radius * normal

    angles: list[float] = []
    for piece in dom.all_pieces():
        for s in piece.geometry.intersect_circle(center, radius):
            pt = (
                piece.geometry.point_at(s)
                if isinstance(piece.geometry, CircleArc)
                else piece.geometry.point_at(s)
            )
            angles.append(math.atan2(pt[1] - center[1], pt[0] - center[0]))

    theta_p = math.atan2(p.y - center[1], p.x - center[0])
    if not angles:
        return CircleArc(
            Point2(*center), radius, theta_p, theta_p + _TWO_PI, "ccw"
        )

    # deduplicate near-coincident intersection angles
    angles = sorted(_wrap_angle(a) for a in angles)
    merged: list[float] = []
    for a in angles:
        if not merged or a - merged[-1] > 1e-9:
            merged.append(a)
    if merged and (merged[0] + _TWO_PI) - merged[-1] <= 1e-9:
        merged.pop(0)
    if not merged:
        return CircleArc(Point2(*center), radius, theta_p, theta_p + _TWO_PI, "ccw")

    # locate the angular interval containing theta_p
    rel = [(a - theta_p) % _TWO_PI for a in merged]
    above = min(rel)  # first boundary hit going ccw from p
    below = max(rel)  # last hit, i.e. first going cw from p
    start = theta_p - (_TWO_PI - below)
    end = theta_p + above
    return CircleArc(Point2(*center), radius, start, end, "ccw")


# --- builders -------------------------------------------------------------------


def disk_domain(center: Point2, radius: float, data_tag: str = "boundary") -> Domain:
    """Disk; boundary curvature +1/radius."""
    arc = CircleArc(center, radius, 0.0, _TWO_PI, "ccw")
    return Domain((BoundaryArc(arc, 1.0 / radius, data_tag),))

def annulus_domain(
    center: Point2,
    r_inner: float,
    r_outer: float,
    outer_tag: str = "outer",
    inner_tag: str = "inner",
) -> Domain:
    """Annulus; the inner circle bulges into the region, curvature -1/r_inner."""
    if not 0.0 < r_inner < r_outer:
        raise ParameterError("annulus needs 0 < r_inner < r_outer")
    outer = CircleArc(center, r_outer, 0.0, _TWO_PI, "ccw")
    inner = CircleArc(center, r_inner, 0.0, -_TWO_PI, "cw")
    return Domain(
        (BoundaryArc(outer, 1.0 / r_outer, outer_tag),),
        ((BoundaryArc(inner, -1.0 / r_inner, inner_tag),),),
    )


def lens_domain(
    half_gap: float,
    arc_radius: float,
    west_radius: float | None = None,
    east_tag: str = "east",
    west_tag: str = "west",
    center: Point2 = Point2(0.0, 0.0),
) -> Domain:
    """Lens between two convex arcs meeting at (0, +-half_gap).

    The east arc (radius arc_radius) bulges to x > 0, the west arc to
    x < 0.  The west radius defaults to the east one; passing a smaller
    value sharpens the west side without moving the corners.
    """
    r_west = arc_radius if west_radius is None else west_radius
    if not 0.0 < half_gap < arc_radius:
        raise ParameterError("lens needs 0 < half_gap < arc_radius")
    if not half_gap < r_west:
        raise ParameterError("lens needs half_gap < west radius")
    c_e = math.sqrt(arc_radius**2 - half_gap**2)
    phi_e = math.atan2(half_gap, c_e)
    c_w = math.sqrt(r_west**2 - half_gap**2)
    phi_w = math.atan2(half_gap, c_w)
    east = CircleArc(Point2(center.x - c_e, center.y), arc_radius, -phi_e, phi_e, "ccw")
    west = CircleArc(
        Point2(center.x + c_w, center.y),
        r_west,
        math.pi - phi_w,
        math.pi + phi_w,
        "ccw",
    )
    return Domain(
        (
            BoundaryArc(east, 1.0 / arc_radius, east_tag),
            BoundaryArc(west, 1.0 / r_west, west_tag),
        )
    )
